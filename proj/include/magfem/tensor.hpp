#pragma once

// Fixed-size tensor algebra and finite-strain kinematics at a material point.
//
// Second-order tensors are stored as full 3x3 matrices. Fourth-order tensors
// and mixed third-order tensors are flattened to 9x9 / 9x3 matrices with the
// pair index (i, J) -> 3 * i + J.

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "magfem/errors.hpp"

namespace magfem {

using Vector3 = Eigen::Vector3d;
using Tensor2 = Eigen::Matrix3d;
using Vector9 = Eigen::Matrix<double, 9, 1>;
using Matrix9 = Eigen::Matrix<double, 9, 9>;
using Matrix93 = Eigen::Matrix<double, 9, 3>;
using Matrix39 = Eigen::Matrix<double, 3, 9>;

inline constexpr double kSingularTolerance = 1e-14;

constexpr int pair_index(int i, int j) { return 3 * i + j; }

inline Vector9 flatten(const Tensor2& t) {
  Vector9 v;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v(pair_index(i, j)) = t(i, j);
  return v;
}

inline Tensor2 unflatten(const Vector9& v) {
  Tensor2 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = v(pair_index(i, j));
  return t;
}

inline double det3(const Tensor2& t) {
  return t(0, 0) * (t(1, 1) * t(2, 2) - t(1, 2) * t(2, 1)) -
         t(0, 1) * (t(1, 0) * t(2, 2) - t(1, 2) * t(2, 0)) +
         t(0, 2) * (t(1, 0) * t(2, 1) - t(1, 1) * t(2, 0));
}

/// Inverse by cofactors. Throws SingularTensor when |det| <= 1e-14.
inline Tensor2 inv3(const Tensor2& t) {
  const double d = det3(t);
  if (!(std::abs(d) > kSingularTolerance)) {
    std::ostringstream msg;
    msg << "inv3: singular tensor (det = " << d << ")";
    throw SingularTensor(msg.str());
  }
  Tensor2 c;
  c(0, 0) = t(1, 1) * t(2, 2) - t(1, 2) * t(2, 1);
  c(0, 1) = t(0, 2) * t(2, 1) - t(0, 1) * t(2, 2);
  c(0, 2) = t(0, 1) * t(1, 2) - t(0, 2) * t(1, 1);
  c(1, 0) = t(1, 2) * t(2, 0) - t(1, 0) * t(2, 2);
  c(1, 1) = t(0, 0) * t(2, 2) - t(0, 2) * t(2, 0);
  c(1, 2) = t(0, 2) * t(1, 0) - t(0, 0) * t(1, 2);
  c(2, 0) = t(1, 0) * t(2, 1) - t(1, 1) * t(2, 0);
  c(2, 1) = t(0, 1) * t(2, 0) - t(0, 0) * t(2, 1);
  c(2, 2) = t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0);
  return c / d;
}

inline double ddot(const Tensor2& a, const Tensor2& b) { return (a.array() * b.array()).sum(); }

inline Tensor2 sym(const Tensor2& a) { return 0.5 * (a + a.transpose()); }

/// Deformation measures at one material point.
struct DeformationState {
  Tensor2 F = Tensor2::Identity();
  Tensor2 Finv = Tensor2::Identity();
  double J = 1.0;
  Tensor2 Fbar = Tensor2::Identity();
  Tensor2 Cbar = Tensor2::Identity();
  Tensor2 Cbar_inv = Tensor2::Identity();
  double I1bar = 3.0;
  double I2bar = 3.0;
};

inline void require_positive_jacobian(double J, const char* where) {
  if (!(J > 0.0)) {
    std::ostringstream msg;
    msg << where << ": non-positive Jacobian det(F) = " << J;
    throw NonPositiveJacobian(msg.str());
  }
}

inline DeformationState kinematics(const Tensor2& F) {
  DeformationState s;
  s.F = F;
  s.J = det3(F);
  require_positive_jacobian(s.J, "kinematics");
  s.Finv = inv3(F);
  s.Fbar = std::pow(s.J, -1.0 / 3.0) * F;
  s.Cbar = s.Fbar.transpose() * s.Fbar;
  s.Cbar_inv = std::pow(s.J, 2.0 / 3.0) * s.Finv * s.Finv.transpose();
  s.I1bar = s.Cbar.trace();
  s.I2bar = 0.5 * (s.I1bar * s.I1bar - (s.Cbar * s.Cbar).trace());
  return s;
}

/// Spatial magnetic field h = F^{-T} H.
inline Vector3 push_forward_H(const Tensor2& F, const Vector3& H_ref) {
  require_positive_jacobian(det3(F), "push_forward_H");
  return inv3(F).transpose() * H_ref;
}

inline Vector3 pull_back_H(const Tensor2& F, const Vector3& h) { return F.transpose() * h; }

/// Spatial induction b = (1/J) F B.
inline Vector3 push_forward_B(const Tensor2& F, const Vector3& B_ref) {
  const double J = det3(F);
  require_positive_jacobian(J, "push_forward_B");
  return F * B_ref / J;
}

inline Vector3 pull_back_B(const Tensor2& F, const Vector3& b) {
  const double J = det3(F);
  require_positive_jacobian(J, "pull_back_B");
  return J * inv3(F) * b;
}

/// Push-forward of a material tangent dP_iJ/dF_kL to the spatial tangent
/// (1/J) F_jJ F_lL dP_iJ/dF_kL.
inline Matrix9 push_forward_tangent(const Tensor2& F, double J, const Matrix9& dPdF) {
  // M maps (i,J) -> (i,j) with weight F_jJ
  Matrix9 M = Matrix9::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int jj = 0; jj < 3; ++jj) M(pair_index(i, j), pair_index(i, jj)) = F(j, jj);
  return M * dPdF * M.transpose() / J;
}

/// Spatial pressure contribution p (delta_ij delta_kl - delta_il delta_jk).
inline Matrix9 pressure_tangent(double p) {
  Matrix9 e = Matrix9::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double v = 0.0;
          if (i == j && k == l) v += p;
          if (i == l && j == k) v -= p;
          e(pair_index(i, j), pair_index(k, l)) = v;
        }
  return e;
}

}  // namespace magfem
