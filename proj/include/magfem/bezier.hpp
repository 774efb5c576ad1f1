#pragma once

// Bernstein bases on the parent domain [0,1]^3 and Gauss rules mapped to it.
//
// Local ordering of control points: BQ2 a = i + 3j + 9k, BQ1 a = i + 2j + 4k,
// with i running along xi_1.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "magfem/errors.hpp"
#include "magfem/tensor.hpp"

namespace magfem {

struct Basis1d {
  int count = 0;
  std::array<double, 3> value{};
  std::array<double, 3> deriv{};
};

inline Basis1d bernstein1d(int degree, double xi) {
  Basis1d b;
  const double s = 1.0 - xi;
  if (degree == 1) {
    b.count = 2;
    b.value = {s, xi, 0.0};
    b.deriv = {-1.0, 1.0, 0.0};
  } else if (degree == 2) {
    b.count = 3;
    b.value = {s * s, 2.0 * xi * s, xi * xi};
    b.deriv = {-2.0 * s, 2.0 - 4.0 * xi, 2.0 * xi};
  } else {
    throw UnsupportedDegree("bernstein1d: degree " + std::to_string(degree) + " (supported: 1, 2)");
  }
  return b;
}

struct QuadPoint {
  Vector3 xi;
  double weight;
};

/// Gauss-Legendre points and weights on [0,1]; weights sum to 1.
inline std::vector<std::pair<double, double>> gauss_line(int n) {
  std::vector<double> x, w;
  switch (n) {
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      x = {-a, a};
      w = {1.0, 1.0};
      break;
    }
    case 3: {
      const double a = std::sqrt(0.6);
      x = {-a, 0.0, a};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    }
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x = {-b, -a, a, b};
      w = {wb, wa, wa, wb};
      break;
    }
    default:
      throw UnsupportedRule("gauss rule with " + std::to_string(n) +
                            " points per direction (supported: 2, 3, 4)");
  }
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(0.5 * (x[i] + 1.0), 0.5 * w[i]);
  return out;
}

/// Tensor-product Gauss-Legendre rule on [0,1]^3; weights sum to 1.
inline std::vector<QuadPoint> gauss_rule(int points_per_dir) {
  const auto g = gauss_line(points_per_dir);
  std::vector<QuadPoint> rule;
  rule.reserve(g.size() * g.size() * g.size());
  for (const auto& [z, wz] : g)
    for (const auto& [y, wy] : g)
      for (const auto& [x, wx] : g) rule.push_back({Vector3(x, y, z), wx * wy * wz});
  return rule;
}

/// Tensor-product Bernstein values and parametric gradients.
template <int Count>
struct ShapeValues {
  Eigen::Matrix<double, Count, 1> N;
  Eigen::Matrix<double, Count, 3> dN;
};

template <int Degree>
ShapeValues<(Degree + 1) * (Degree + 1) * (Degree + 1)> hex_shape(const Vector3& xi) {
  constexpr int n = Degree + 1;
  const Basis1d bx = bernstein1d(Degree, xi(0));
  const Basis1d by = bernstein1d(Degree, xi(1));
  const Basis1d bz = bernstein1d(Degree, xi(2));
  ShapeValues<n * n * n> s;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int a = i + n * j + n * n * k;
        s.N(a) = bx.value[i] * by.value[j] * bz.value[k];
        s.dN(a, 0) = bx.deriv[i] * by.value[j] * bz.value[k];
        s.dN(a, 1) = bx.value[i] * by.deriv[j] * bz.value[k];
        s.dN(a, 2) = bx.value[i] * by.value[j] * bz.deriv[k];
      }
  return s;
}

using Shape27 = ShapeValues<27>;
using Shape8 = ShapeValues<8>;

inline Shape27 shape_bq2(const Vector3& xi) { return hex_shape<2>(xi); }
inline Shape8 shape_bq1(const Vector3& xi) { return hex_shape<1>(xi); }

/// BQ2 local index of BQ1 corner c.
constexpr int corner_of(int c) {
  return 2 * (c & 1) + 3 * 2 * ((c >> 1) & 1) + 9 * 2 * ((c >> 2) & 1);
}

/// Parametric position of BQ2 control point a (its Greville abscissa).
inline Vector3 greville_bq2(int a) {
  return Vector3(0.5 * (a % 3), 0.5 * ((a / 3) % 3), 0.5 * (a / 9));
}

/// Faces of the parent hex: 0 xi1=0, 1 xi1=1, 2 xi2=0, 3 xi2=1, 4 xi3=0, 5 xi3=1.
/// Returns the nine BQ2 local indices of the face, ordered (s, t) with s
/// fastest, where (s, t) are the two remaining parametric directions in
/// increasing order.
inline std::array<int, 9> face_nodes_bq2(int face) {
  const int dir = face / 2;
  const int fixed = (face % 2) * 2;
  std::array<int, 9> out{};
  int c = 0;
  for (int t = 0; t < 3; ++t)
    for (int s = 0; s < 3; ++s) {
      int ijk[3];
      ijk[dir] = fixed;
      ijk[dir == 0 ? 1 : 0] = s;
      ijk[dir == 2 ? 1 : 2] = t;
      out[c++] = ijk[0] + 3 * ijk[1] + 9 * ijk[2];
    }
  return out;
}

}  // namespace magfem
