#pragma once

// Newton history audit: iteration counts and the quadratic ratio test.
//
// Residuals are made dimensionless with the running reference the solver
// uses for its relative tolerance (the largest predictor residual seen so
// far). A reduction r_k -> r_k+1 passes when rho_k+1 <= C rho_k^2, or when
// r_k+1 already lies below the stopping tolerance, where round-off dominates.

#include <algorithm>
#include <cmath>
#include <vector>

#include "magfem/problem.hpp"
#include "magfem/solver.hpp"

namespace magfem {

struct NewtonAudit {
  double C = 10.0;
  double tol_rel = 1e-8;
  double tol_abs = 1e-10;

  int steps = 0;
  long evaluations = 0;
  int solves = 0;
  int checked = 0;  ///< reductions tested against C
  int failures = 0;
  double worst_C = 0.0;  ///< largest rho_k+1 / rho_k^2 among tested reductions
  double ref = 0.0;

  explicit NewtonAudit(const SolverSettings& s, double c = 10.0)
      : C(c), tol_rel(s.tol_rel), tol_abs(s.tol_abs) {}

  void add(const StepReport& r) {
    ++steps;
    evaluations += r.evaluations;
    for (const auto& h : r.substep_residuals) add_solve(h);
  }

  void add_solve(const std::vector<double>& h) {
    if (h.empty()) return;
    ++solves;
    ref = std::max(ref, h.front());
    const int m = static_cast<int>(h.size());
    for (int k = std::max(1, m - 3); k + 1 < m; ++k) {
      if (h[k + 1] <= tol_abs || h[k + 1] <= tol_rel * ref) continue;
      const double rk = h[k] / ref, rk1 = h[k + 1] / ref;
      const double c = rk1 / (rk * rk);
      ++checked;
      worst_C = std::max(worst_C, c);
      if (!(c <= C)) ++failures;
    }
  }

  double mean_evaluations() const { return steps ? double(evaluations) / steps : 0.0; }
  bool quadratic() const { return failures == 0; }
};

}  // namespace magfem
