#pragma once

// Closed-form homogeneous solutions used to check the cube benchmarks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "magfem/errors.hpp"

namespace magfem {

struct OracleResult {
  double input = 0.0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

inline double relative_error(double numeric, double analytic) {
  return std::abs(numeric - analytic) / std::max(std::abs(analytic), 1e-12);
}

inline OracleResult make_oracle_result(double input, double analytic, double numeric) {
  return {input, analytic, numeric, relative_error(numeric, analytic)};
}

/// Root of f on [a, b] with f(a) f(b) <= 0: bisection to a narrow bracket,
/// then safeguarded Newton to 1e-12.
inline double bracketed_root(const std::function<double(double)>& f,
                             const std::function<double(double)>& df, double a, double b) {
  double fa = f(a);
  for (int it = 0; it < 60 && b - a > 1e-6 * std::max(1.0, std::abs(b)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm <= 0.0) == (fa <= 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  double x = 0.5 * (a + b);
  for (int it = 0; it < 100; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx <= 0.0) == (fa <= 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
    }
    const double d = df(x);
    double xn = d != 0.0 ? x - fx / d : 0.5 * (a + b);
    if (!(xn >= a && xn <= b)) xn = 0.5 * (a + b);
    const double step = std::abs(xn - x);
    x = xn;
    if (step <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

/// Positive root of lambda^3 - k lambda^2 - 1 = 0: the stretch of an
/// incompressible Neo-Hookean cube with k = Br.Ba / (mu mu0).
inline double cubic_stretch_oracle(double k) {
  auto f = [k](double l) { return l * l * l - k * l * l - 1.0; };
  auto df = [k](double l) { return 3.0 * l * l - 2.0 * k * l; };
  const double hi = k > 0.0 ? k + 1.0 : 1.0;
  return bracketed_root(f, df, 0.0, hi);
}

/// Locking measure 2 lambda^2 + lambda^-4 - 3 of equibiaxial stretch lambda.
inline double biaxial_locking_measure(double lambda) {
  return 2.0 * lambda * lambda + std::pow(lambda, -4.0) - 3.0;
}

/// Normalized potential (phi / L) sqrt(mu0 / mu) that holds an incompressible
/// Gent cube at in-plane stretch lambda.
inline double gent_potential_oracle(double lambda, double Im) {
  if (!(lambda >= 1.0)) {
    std::ostringstream msg;
    msg << "gent_potential_oracle: stretch " << lambda << " below 1";
    throw LockingStretch(msg.str());
  }
  const double q = 1.0 - biaxial_locking_measure(lambda) / Im;
  if (!(q > 0.0)) {
    std::ostringstream msg;
    msg << "gent_potential_oracle: stretch " << lambda << " at or beyond locking for Im = " << Im;
    throw LockingStretch(msg.str());
  }
  return std::sqrt((std::pow(lambda, -2.0) - std::pow(lambda, -8.0)) / q);
}

/// Stretch at which the locking measure reaches `fraction` * Im.
inline double gent_locking_stretch(double Im, double fraction = 1.0) {
  auto f = [=](double l) { return biaxial_locking_measure(l) - fraction * Im; };
  auto df = [](double l) { return 4.0 * l - 4.0 * std::pow(l, -5.0); };
  double hi = 2.0;
  while (f(hi) < 0.0) hi *= 2.0;
  return bracketed_root(f, df, 1.0, hi);
}

/// Ascending branch of the potential-stretch relation: its upper end is the
/// first local maximum of the potential, or the Gent guard stretch if the
/// relation keeps rising up to there.
struct GentBranch {
  double lambda_max = 1.0;
  double phibar_max = 0.0;
};

inline GentBranch gent_ascending_branch(double Im, double guard = 0.999) {
  const double l_end = gent_locking_stretch(Im, guard);
  const int n = 20000;
  GentBranch b{1.0, 0.0};
  double prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double l = 1.0 + (l_end - 1.0) * i / n;
    const double v = gent_potential_oracle(l, Im);
    if (v < prev) {
      // refine the maximum by golden-section search on [l - 2h, l]
      const double h = (l_end - 1.0) / n;
      double a = l - 2.0 * h, c = l;
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 100; ++it) {
        const double x1 = c - g * (c - a), x2 = a + g * (c - a);
        if (gent_potential_oracle(x1, Im) > gent_potential_oracle(x2, Im)) c = x2;
        else a = x1;
      }
      b.lambda_max = 0.5 * (a + c);
      b.phibar_max = gent_potential_oracle(b.lambda_max, Im);
      return b;
    }
    prev = v;
    b = {l, v};
  }
  return b;
}

/// Inverse of gent_potential_oracle on the ascending branch.
inline double gent_stretch_for_potential(double phibar, double Im) {
  const auto br = gent_ascending_branch(Im);
  if (!(phibar >= 0.0) || phibar > br.phibar_max) {
    std::ostringstream msg;
    msg << "gent_stretch_for_potential: potential " << phibar << " outside [0, " << br.phibar_max
        << "]";
    throw LockingStretch(msg.str());
  }
  auto f = [=](double l) { return gent_potential_oracle(l, Im) - phibar; };
  double a = 1.0, b = br.lambda_max;
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double m = 0.5 * (a + b);
    if (f(m) < 0.0) a = m;
    else b = m;
  }
  return 0.5 * (a + b);
}

/// Closed-form relaxation of the scalar surrogate dA/dt = (c - A) / tau.
inline double relaxation_exact(double A0, double c, double tau, double t) {
  return c + (A0 - c) * std::exp(-t / tau);
}

}  // namespace magfem
