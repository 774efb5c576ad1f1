#pragma once

// Strain-energy contributions of hard and soft magneto-active polymers,
// their first Piola-Kirchhoff stresses, referential inductions and the
// spatial tangents consumed by the element kernels.

#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include "magfem/errors.hpp"
#include "magfem/tensor.hpp"
#include "magfem/visco.hpp"

namespace magfem {

enum class HyperModel { NeoHookean, Gent };
enum class MagneticMode { None, Hard, Soft };

struct MaterialSpec {
  HyperModel hyper_model = HyperModel::NeoHookean;
  double mu = 1.0;
  double Im = 1.0;
  bool incompressible = true;
  double kappa = 0.0;
  std::vector<MaxwellBranch> maxwell_branches;
  double mu0 = 1.2566;
  MagneticMode magnetic_mode = MagneticMode::None;
  Vector3 Br = Vector3::Zero();
  double alpha = -0.5;
  double beta = -4.0;
  double eta = -0.5;

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("material: " + m); };
    if (!(mu > 0.0)) fail("mu must be positive");
    if (hyper_model == HyperModel::Gent && !(Im > 0.0)) fail("Im must be positive for Gent");
    if (!incompressible && !(kappa > 0.0)) fail("kappa must be positive when compressible");
    for (const auto& b : maxwell_branches) {
      if (!(b.mu_v >= 0.0)) fail("mu_v must be non-negative");
      if (!(b.tau > 0.0)) fail("tau must be positive");
    }
    if (!(mu0 > 0.0)) fail("mu0 must be positive");
  }
};

/// Fraction of I_m at which the Gent model reports locking.
inline constexpr double kGentGuard = 0.999;

namespace detail {

// Value with first and second derivatives with respect to (F, H).
struct Jet {
  double v = 0.0;
  Vector9 dF = Vector9::Zero();
  Matrix9 dFF = Matrix9::Zero();
  Vector3 dH = Vector3::Zero();
  Matrix93 dFH = Matrix93::Zero();
  Tensor2 dHH = Tensor2::Zero();
};

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet c;
  c.v = a.v * b.v;
  c.dF = a.dF * b.v + a.v * b.dF;
  c.dH = a.dH * b.v + a.v * b.dH;
  c.dFF = a.dFF * b.v + a.v * b.dFF + a.dF * b.dF.transpose() + b.dF * a.dF.transpose();
  c.dFH = a.dFH * b.v + a.v * b.dFH + a.dF * b.dH.transpose() + b.dF * a.dH.transpose();
  c.dHH = a.dHH * b.v + a.v * b.dHH + a.dH * b.dH.transpose() + b.dH * a.dH.transpose();
  return c;
}

inline Jet operator*(double s, Jet a) {
  a.v *= s;
  a.dF *= s;
  a.dFF *= s;
  a.dH *= s;
  a.dFH *= s;
  a.dHH *= s;
  return a;
}

inline Jet operator+(Jet a, const Jet& b) {
  a.v += b.v;
  a.dF += b.dF;
  a.dFF += b.dFF;
  a.dH += b.dH;
  a.dFH += b.dFH;
  a.dHH += b.dHH;
  return a;
}

// f(a) given f, f', f'' at a.v
inline Jet compose(const Jet& a, double f, double f1, double f2) {
  Jet c;
  c.v = f;
  c.dF = f1 * a.dF;
  c.dH = f1 * a.dH;
  c.dFF = f2 * a.dF * a.dF.transpose() + f1 * a.dFF;
  c.dFH = f2 * a.dF * a.dH.transpose() + f1 * a.dFH;
  c.dHH = f2 * a.dH * a.dH.transpose() + f1 * a.dHH;
  return c;
}

// d(F^{-T})_iJ / dF_kL = -F^{-T}_iL F^{-T}_kJ
inline Matrix9 d_inverse_transpose(const Tensor2& Fit) {
  Matrix9 m;
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J)
      for (int k = 0; k < 3; ++k)
        for (int L = 0; L < 3; ++L) m(pair_index(i, J), pair_index(k, L)) = -Fit(i, L) * Fit(k, J);
  return m;
}

// J^c
inline Jet jacobian_power(const DeformationState& s, double c) {
  const Tensor2 Fit = s.Finv.transpose();
  const Vector9 g = flatten(Fit);
  Jet j;
  j.v = std::pow(s.J, c);
  j.dF = c * j.v * g;
  j.dFF = c * j.v * (c * g * g.transpose() + d_inverse_transpose(Fit));
  return j;
}

// I1 = F:F
inline Jet first_invariant(const Tensor2& F) {
  Jet j;
  j.v = ddot(F, F);
  j.dF = 2.0 * flatten(F);
  j.dFF = 2.0 * Matrix9::Identity();
  return j;
}

// A:C with A held fixed
inline Jet contraction_AC(const Tensor2& F, const Tensor2& A) {
  Jet j;
  j.v = ddot(A, F.transpose() * F);
  j.dF = 2.0 * flatten(F * A);
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J)
      for (int L = 0; L < 3; ++L) j.dFF(pair_index(i, J), pair_index(i, L)) = 2.0 * A(J, L);
  return j;
}

// H . H
inline Jet field_square(const Vector3& H) {
  Jet j;
  j.v = H.squaredNorm();
  j.dH = 2.0 * H;
  j.dHH = 2.0 * Tensor2::Identity();
  return j;
}

// H . C^{-1} H
inline Jet field_Cinv_field(const DeformationState& s, const Vector3& H) {
  const Tensor2& Finv = s.Finv;
  const Tensor2 Fit = Finv.transpose();
  const Tensor2 Cinv = Finv * Fit;
  const Vector3 h = Fit * H;
  const Vector3 g = Finv * h;
  Jet j;
  j.v = h.squaredNorm();
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J) {
      const int a = pair_index(i, J);
      j.dF(a) = -2.0 * h(i) * g(J);
      for (int k = 0; k < 3; ++k)
        for (int L = 0; L < 3; ++L)
          j.dFF(a, pair_index(k, L)) =
              2.0 * (h(k) * Finv(L, i) * g(J) + h(i) * Finv(J, k) * g(L) + h(i) * h(k) * Cinv(J, L));
      for (int M = 0; M < 3; ++M) j.dFH(a, M) = -2.0 * (Fit(i, M) * g(J) + h(i) * Cinv(J, M));
    }
  j.dH = 2.0 * g;
  j.dHH = 2.0 * Cinv;
  return j;
}

// H . C H
inline Jet field_C_field(const Tensor2& F, const Vector3& H) {
  const Vector3 q = F * H;
  Jet j;
  j.v = q.squaredNorm();
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J) {
      const int a = pair_index(i, J);
      j.dF(a) = 2.0 * q(i) * H(J);
      for (int L = 0; L < 3; ++L) j.dFF(a, pair_index(i, L)) = 2.0 * H(J) * H(L);
      for (int M = 0; M < 3; ++M) j.dFH(a, M) = 2.0 * (F(i, M) * H(J) + (J == M ? q(i) : 0.0));
    }
  j.dH = 2.0 * F.transpose() * q;
  j.dHH = 2.0 * F.transpose() * F;
  return j;
}

}  // namespace detail

struct DeviatoricResponse {
  double energy = 0.0;
  Tensor2 P = Tensor2::Zero();
  Matrix9 dPdF = Matrix9::Zero();  ///< material tangent dP_iJ/dF_kL
  Matrix9 e = Matrix9::Zero();     ///< spatial push-forward
};

inline DeviatoricResponse eval_deviatoric(const MaterialSpec& spec, const DeformationState& s) {
  using namespace detail;
  const Jet I1bar = jacobian_power(s, -2.0 / 3.0) * first_invariant(s.F);
  const double x = I1bar.v - 3.0;
  Jet psi;
  if (spec.hyper_model == HyperModel::NeoHookean) {
    psi = compose(I1bar, 0.5 * spec.mu * x, 0.5 * spec.mu, 0.0);
  } else {
    if (x >= kGentGuard * spec.Im) {
      std::ostringstream msg;
      msg << "Gent locking: I1bar - 3 = " << x << " with Im = " << spec.Im;
      throw GentLockingLimit(msg.str());
    }
    const double q = 1.0 - x / spec.Im;
    psi = compose(I1bar, -0.5 * spec.mu * spec.Im * std::log(q), 0.5 * spec.mu / q,
                  0.5 * spec.mu / (spec.Im * q * q));
  }
  DeviatoricResponse r;
  r.energy = psi.v;
  r.P = unflatten(psi.dF);
  r.dPdF = psi.dFF;
  r.e = push_forward_tangent(s.F, s.J, psi.dFF);
  return r;
}

struct VolumetricResponse {
  double psi = 0.0;
  double dpsi = 0.0;
  double d2psi = 0.0;
};

/// Psi_vol = kappa/2 (J - 1)^2.
inline VolumetricResponse eval_volumetric(const MaterialSpec& spec, double J) {
  require_positive_jacobian(J, "eval_volumetric");
  const double k = spec.kappa;
  return {0.5 * k * (J - 1.0) * (J - 1.0), k * (J - 1.0), k};
}

struct PressureConstants {
  double J_hat = 1.0;
  double theta_hat = 0.0;
};

/// Constants of the pressure energy p [J - J_hat - theta_hat p / 2], frozen
/// at the last converged Jacobian J_n.
inline PressureConstants pressure_constants(const MaterialSpec& spec, double J_n) {
  require_positive_jacobian(J_n, "pressure_constants");
  if (spec.incompressible) return {1.0, 0.0};
  const auto v = eval_volumetric(spec, J_n);
  if (v.d2psi == 0.0) throw ZeroCurvature("pressure_constants: zero volumetric curvature");
  return {J_n - v.dpsi / v.d2psi, 1.0 / v.d2psi};
}

struct HardMagneticResponse {
  double energy = 0.0;
  Tensor2 P = Tensor2::Zero();
};

/// Psi = -(1/mu0) Ba . F Br. The stress does not depend on F, so the
/// tangent contribution is zero.
inline HardMagneticResponse eval_hard_magnetic(const MaterialSpec& spec, const Tensor2& F,
                                               const Vector3& Ba) {
  HardMagneticResponse r;
  r.energy = -Ba.dot(F * spec.Br) / spec.mu0;
  r.P = -Ba * spec.Br.transpose() / spec.mu0;
  return r;
}

struct SoftMagneticResponse {
  double energy = 0.0;
  Tensor2 P = Tensor2::Zero();
  Matrix9 dPdF = Matrix9::Zero();
  Matrix93 dPdH = Matrix93::Zero();
  Vector3 B = Vector3::Zero();       ///< referential induction -dPsi/dH
  Tensor2 dBdH = Tensor2::Zero();
  Matrix93 p_coup = Matrix93::Zero();
  Matrix39 p_coup_hat = Matrix39::Zero();
  Tensor2 d_perm = Tensor2::Zero();
  Matrix9 e = Matrix9::Zero();
};

/// Coupling tensors from the material derivatives of P and B.
///   p_ijk  = -(1/J) F_jJ dP_iJ/dH_K F_kK
///   ph_ijk =  (1/J) F_iI dB_I/dF_jK F_kK
///   d_ij   = -(1/J) F_iI dB_I/dH_J F_jJ
inline void push_forward_coupling(const Tensor2& F, double J, const Matrix93& dPdH,
                                  const Matrix39& dBdF, const Tensor2& dBdH, Matrix93& p,
                                  Matrix39& p_hat, Tensor2& d) {
  p.setZero();
  p_hat.setZero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        double sp = 0.0, sh = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            sp += F(j, a) * dPdH(pair_index(i, a), b) * F(k, b);
            sh += F(i, a) * dBdF(a, pair_index(j, b)) * F(k, b);
          }
        p(pair_index(i, j), k) = -sp / J;
        p_hat(i, pair_index(j, k)) = sh / J;
      }
  d = -F * dBdH * F.transpose() / J;
}

/// Free-space energy -(mu0 J / 2) C^{-1}:(H x H) plus the coupling energy
/// mu0 [alpha I + beta Cbar + eta Cbar^{-1}] : (H x H).
inline SoftMagneticResponse eval_soft_magnetic(const MaterialSpec& spec, const DeformationState& s,
                                               const Vector3& H) {
  using namespace detail;
  const double mu0 = spec.mu0;
  const Jet s_inv = field_Cinv_field(s, H);
  Jet psi = (-0.5 * mu0) * (jacobian_power(s, 1.0) * s_inv);
  if (spec.alpha != 0.0) psi = psi + (spec.alpha * mu0) * field_square(H);
  if (spec.beta != 0.0)
    psi = psi + (spec.beta * mu0) * (jacobian_power(s, -2.0 / 3.0) * field_C_field(s.F, H));
  if (spec.eta != 0.0) psi = psi + (spec.eta * mu0) * (jacobian_power(s, 2.0 / 3.0) * s_inv);

  SoftMagneticResponse r;
  r.energy = psi.v;
  r.P = unflatten(psi.dF);
  r.dPdF = psi.dFF;
  r.dPdH = psi.dFH;
  r.B = -psi.dH;
  r.dBdH = -psi.dHH;
  const Matrix39 dBdF = -psi.dFH.transpose();
  push_forward_coupling(s.F, s.J, r.dPdH, dBdF, r.dBdH, r.p_coup, r.p_coup_hat, r.d_perm);
  r.e = push_forward_tangent(s.F, s.J, psi.dFF);
  return r;
}

/// Summed response at one quadrature point.
struct StressTangent {
  double energy = 0.0;
  Tensor2 P = Tensor2::Zero();          ///< total first Piola-Kirchhoff stress incl. p J F^{-T}
  Tensor2 sigma_eff = Tensor2::Zero();  ///< (1/J) P F^T
  Matrix9 e_mat = Matrix9::Zero();
  Vector3 B_ref = Vector3::Zero();
  Vector3 b = Vector3::Zero();
  Matrix93 p_coup = Matrix93::Zero();
  Matrix39 p_coup_hat = Matrix39::Zero();
  Tensor2 d_perm = Tensor2::Zero();
};

/// Viscous history input for one point; may be empty for elastic materials.
struct ViscousInput {
  std::span<const BranchState> history;  ///< converged branch states at t_n
  Tensor2 Cbar_inv_n = Tensor2::Identity();
  GAlphaParams ga{};
  double dt = 0.0;
};

/// Deviatoric + magnetic + viscous contributions, plus the pressure terms
/// p delta_ij in the stress and p [delta_ij delta_kl - delta_il delta_jk] in
/// the tangent. Trial branch states are written to `branches_np1` when given.
inline StressTangent assemble_point_response(const MaterialSpec& spec, const DeformationState& s,
                                             const Vector3& H_ref, const Vector3& Ba, double p,
                                             const ViscousInput& visco = {},
                                             std::vector<BranchState>* branches_np1 = nullptr) {
  StressTangent out;
  const auto dev = eval_deviatoric(spec, s);
  out.energy = dev.energy;
  Tensor2 P = dev.P;
  Matrix9 e = dev.e;

  if (spec.magnetic_mode == MagneticMode::Hard) {
    const auto hm = eval_hard_magnetic(spec, s.F, Ba);
    out.energy += hm.energy;
    P += hm.P;
  } else if (spec.magnetic_mode == MagneticMode::Soft) {
    const auto sm = eval_soft_magnetic(spec, s, H_ref);
    out.energy += sm.energy;
    P += sm.P;
    e += sm.e;
    out.B_ref = sm.B;
    out.b = s.F * sm.B / s.J;
    out.p_coup = sm.p_coup;
    out.p_coup_hat = sm.p_coup_hat;
    out.d_perm = sm.d_perm;
  }

  Tensor2 sigma = P * s.F.transpose() / s.J;

  const auto& branches = spec.maxwell_branches;
  if (!branches.empty()) {
    if (visco.history.size() != branches.size())
      throw ConfigError("assemble_point_response: branch history size mismatch");
    if (branches_np1) branches_np1->resize(branches.size());
    for (std::size_t k = 0; k < branches.size(); ++k) {
      const auto next = advance_branch(visco.history[k], visco.Cbar_inv_n, s.Cbar_inv,
                                       branches[k].tau, visco.dt, visco.ga);
      const double lam = algorithmic_lambda(visco.ga, visco.dt, branches[k].tau);
      const auto v = visco_stress_tangent(s.F, next.A, branches[k].mu_v, lam, s.J);
      sigma += v.sigma;
      e += v.e;
      out.energy += viscous_energy(next.A, s.Cbar, branches[k].mu_v);
      if (branches_np1) (*branches_np1)[k] = next;
    }
  }

  out.sigma_eff = sigma + p * Tensor2::Identity();
  out.e_mat = e + pressure_tangent(p);
  out.P = s.J * out.sigma_eff * s.Finv.transpose();
  return out;
}

/// Central-difference tangents of the full point pipeline, used only as a
/// verification oracle.
struct FdTangents {
  Matrix9 e = Matrix9::Zero();
  Matrix93 p_coup = Matrix93::Zero();
  Matrix39 p_coup_hat = Matrix39::Zero();
  Tensor2 d_perm = Tensor2::Zero();
};

inline FdTangents fd_tangent_oracle(const MaterialSpec& spec, const Tensor2& F,
                                    const Vector3& H_ref, const Vector3& Ba, double p,
                                    const ViscousInput& visco = {}) {
  const double h = 1e-6 * (1.0 + F.norm());
  const double hH = 1e-6 * (1.0 + H_ref.norm());
  auto response = [&](const Tensor2& Fp, const Vector3& Hp) {
    return assemble_point_response(spec, kinematics(Fp), Hp, Ba, p, visco);
  };

  Matrix9 dPdF;
  Matrix39 dBdF;
  for (int k = 0; k < 3; ++k)
    for (int L = 0; L < 3; ++L) {
      Tensor2 Fp = F, Fm = F;
      Fp(k, L) += h;
      Fm(k, L) -= h;
      const auto rp = response(Fp, H_ref);
      const auto rm = response(Fm, H_ref);
      dPdF.col(pair_index(k, L)) = flatten(rp.P - rm.P) / (2.0 * h);
      dBdF.col(pair_index(k, L)) = (rp.B_ref - rm.B_ref) / (2.0 * h);
    }
  Matrix93 dPdH;
  Tensor2 dBdH;
  for (int K = 0; K < 3; ++K) {
    Vector3 Hp = H_ref, Hm = H_ref;
    Hp(K) += hH;
    Hm(K) -= hH;
    const auto rp = response(F, Hp);
    const auto rm = response(F, Hm);
    dPdH.col(K) = flatten(rp.P - rm.P) / (2.0 * hH);
    dBdH.col(K) = (rp.B_ref - rm.B_ref) / (2.0 * hH);
  }
  const double J = det3(F);
  FdTangents out;
  out.e = push_forward_tangent(F, J, dPdF);
  push_forward_coupling(F, J, dPdH, dBdF, dBdH, out.p_coup, out.p_coup_hat, out.d_perm);
  return out;
}

}  // namespace magfem
