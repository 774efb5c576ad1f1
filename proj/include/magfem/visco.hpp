#pragma once

// Generalized-alpha integration of the Maxwell-branch internal variables
//   dA/dt = (Cbar^{-1} - A) / tau
// and the corresponding viscous Cauchy stress and spatial tangent.

#include <span>
#include <sstream>
#include <vector>

#include "magfem/errors.hpp"
#include "magfem/tensor.hpp"

namespace magfem {

struct MaxwellBranch {
  double mu_v = 0.0;  ///< viscous shear modulus
  double tau = 1.0;   ///< relaxation time
};

struct GAlphaParams {
  double rho_inf = 0.0;
  double alpha_m = 1.5;
  double alpha_f = 1.0;
  double gamma = 1.0;
};

inline GAlphaParams galpha_params(double rho_inf) {
  if (!(rho_inf >= 0.0 && rho_inf <= 1.0)) {
    std::ostringstream msg;
    msg << "galpha_params: spectral radius " << rho_inf << " outside [0, 1]";
    throw OutOfRange(msg.str());
  }
  GAlphaParams g;
  g.rho_inf = rho_inf;
  g.alpha_f = 1.0 / (1.0 + rho_inf);
  g.alpha_m = (3.0 - rho_inf) / (2.0 * (1.0 + rho_inf));
  g.gamma = 0.5 + g.alpha_m - g.alpha_f;
  return g;
}

struct BranchState {
  Tensor2 A = Tensor2::Identity();
  Tensor2 Adot = Tensor2::Zero();
};

/// Internal-variable history at one quadrature point. `n` holds the last
/// converged values, `np1` the trial values of the current step.
struct QuadPointState {
  std::vector<BranchState> n;
  std::vector<BranchState> np1;
  Tensor2 Cbar_inv_n = Tensor2::Identity();
  double J_n = 1.0;
  Tensor2 Cbar_inv_np1 = Tensor2::Identity();
  double J_np1 = 1.0;
};

/// Stress-free start: A = I and Adot consistent with the evolution law at
/// the initial deformation.
inline QuadPointState initial_quad_point_state(std::span<const MaxwellBranch> branches,
                                               const Tensor2& Cbar_inv0 = Tensor2::Identity(),
                                               double J0 = 1.0) {
  QuadPointState qp;
  qp.Cbar_inv_n = qp.Cbar_inv_np1 = Cbar_inv0;
  qp.J_n = qp.J_np1 = J0;
  for (const auto& b : branches) {
    BranchState s;
    s.A = Tensor2::Identity();
    s.Adot = (Cbar_inv0 - Tensor2::Identity()) / b.tau;
    qp.n.push_back(s);
  }
  qp.np1 = qp.n;
  return qp;
}

/// One generalized-alpha step for a single branch. Cbar^{-1} at n + alpha_f
/// is the linear interpolation of the end-point tensors.
inline BranchState advance_branch(const BranchState& prev, const Tensor2& Cbar_inv_n,
                                  const Tensor2& Cbar_inv_np1, double tau, double dt,
                                  const GAlphaParams& ga) {
  if (dt <= 0.0) return prev;
  const double am = ga.alpha_m, af = ga.alpha_f, g = ga.gamma;
  const double r = g * dt / (am * tau);
  const Tensor2 Cinv_af = af * Cbar_inv_np1 + (1.0 - af) * Cbar_inv_n;
  BranchState next;
  next.A = (r * Cinv_af + (1.0 - (1.0 - af) * r) * prev.A - (g - am) * dt / (am * g) * prev.Adot) /
           (1.0 + af * r);
  next.Adot = (next.A - prev.A) / (g * dt) + (g - 1.0) / g * prev.Adot;
  return next;
}

inline QuadPointState update_internal(const QuadPointState& qp, const Tensor2& Cbar_inv_np1,
                                      std::span<const MaxwellBranch> branches, double dt,
                                      const GAlphaParams& ga) {
  QuadPointState out = qp;
  out.np1.resize(qp.n.size());
  for (std::size_t k = 0; k < qp.n.size(); ++k)
    out.np1[k] = advance_branch(qp.n[k], qp.Cbar_inv_n, Cbar_inv_np1, branches[k].tau, dt, ga);
  return out;
}

/// Single-branch convenience overload.
inline QuadPointState update_internal(const QuadPointState& qp, const Tensor2& Cbar_inv_np1,
                                      double tau, double dt, const GAlphaParams& ga) {
  std::vector<MaxwellBranch> b(qp.n.size(), MaxwellBranch{0.0, tau});
  return update_internal(qp, Cbar_inv_np1, b, dt, ga);
}

/// Accept the trial state of the current step.
inline void commit(QuadPointState& qp, const Tensor2& Cbar_inv_np1, double J_np1) {
  qp.n = qp.np1;
  qp.Cbar_inv_n = Cbar_inv_np1;
  qp.J_n = J_np1;
  qp.Cbar_inv_np1 = Cbar_inv_np1;
  qp.J_np1 = J_np1;
}

/// Accept the trial state recorded by the last evaluation at this point.
inline void commit(QuadPointState& qp) { commit(qp, qp.Cbar_inv_np1, qp.J_np1); }

/// gamma dt / (alpha_f gamma dt + alpha_m tau).
inline double lambda_factor(const GAlphaParams& ga, double dt, double tau) {
  return ga.gamma * dt / (ga.alpha_f * ga.gamma * dt + ga.alpha_m * tau);
}

/// Derivative dA_{n+1}/dCbar^{-1}_{n+1} of the update. Equals alpha_f times
/// lambda_factor; the two coincide for rho_inf = 0.
inline double algorithmic_lambda(const GAlphaParams& ga, double dt, double tau) {
  if (dt <= 0.0) return 0.0;
  return ga.alpha_f * lambda_factor(ga, dt, tau);
}

struct ViscousResponse {
  Tensor2 sigma = Tensor2::Zero();
  Matrix9 e = Matrix9::Zero();
};

/// Viscous Cauchy stress mu_v J^{-5/3} [Ahat - I_AC/3 I] and its spatial
/// tangent, including the -mu_v Lambda / J term from the dependence of A on
/// the current deformation.
inline ViscousResponse visco_stress_tangent(const Tensor2& F, const Tensor2& A, double mu_v,
                                            double Lambda, double J) {
  const Tensor2 Ahat = sym(F * A * F.transpose());
  const double I_AC = ddot(A, F.transpose() * F);
  const double c1 = mu_v * std::pow(J, -5.0 / 3.0);
  const double c2 = mu_v * Lambda / J;

  ViscousResponse r;
  r.sigma = c1 * (Ahat - I_AC / 3.0 * Tensor2::Identity());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const double dik = i == k, dil = i == l, djk = j == k, djl = j == l, dij = i == j,
                       dkl = k == l;
          const double first = dik * Ahat(j, l) - 2.0 / 3.0 * dkl * Ahat(i, j) -
                               2.0 / 3.0 * dij * Ahat(k, l) + 2.0 / 9.0 * I_AC * dij * dkl +
                               1.0 / 3.0 * I_AC * dil * djk;
          const double second = dik * djl + dil * djk - 2.0 / 3.0 * dij * dkl;
          r.e(pair_index(i, j), pair_index(k, l)) = c1 * first - c2 * second;
        }
  return r;
}

inline double viscous_energy(const Tensor2& A, const Tensor2& Cbar, double mu_v) {
  return 0.5 * mu_v * (ddot(A, Cbar) - 3.0 - std::log(det3(A)));
}

}  // namespace magfem
