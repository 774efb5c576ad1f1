#pragma once

// Element residuals and stiffness blocks of the mixed BQ2/BQ1 hexahedron.
//
// Unknown layout inside an element: u as 3a + i over the 27 control points,
// p over the 8 corners, phi over the 27 control points. Current-configuration
// integrals use dv = J dV; the pressure constraint rows use dV.

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "magfem/bezier.hpp"
#include "magfem/constitutive.hpp"
#include "magfem/mesh.hpp"
#include "magfem/visco.hpp"

namespace magfem {

inline constexpr int kQuadPerElem = 27;

struct ElementBlocks {
  Eigen::MatrixXd K_uu, K_up, K_pp, K_uphi, K_phiu, K_phiphi;
  Eigen::VectorXd R_u, R_p, R_phi;
  double max_abs_J_minus_1 = 0.0;
  double min_J = 1e300;

  void reset(bool coupled) {
    K_uu.setZero(81, 81);
    K_up.setZero(81, 8);
    K_pp.setZero(8, 8);
    R_u.setZero(81);
    R_p.setZero(8);
    if (coupled) {
      K_uphi.setZero(81, 27);
      K_phiu.setZero(27, 81);
      K_phiphi.setZero(27, 27);
      R_phi.setZero(27);
    } else {
      K_uphi.resize(0, 0);
      K_phiu.resize(0, 0);
      K_phiphi.resize(0, 0);
      R_phi.resize(0);
    }
    max_abs_J_minus_1 = 0.0;
    min_J = 1e300;
  }
};

/// Element unknowns gathered from the global vectors.
struct ElementFields {
  Eigen::Matrix<double, 27, 3> u = Eigen::Matrix<double, 27, 3>::Zero();
  Eigen::Matrix<double, 8, 1> p = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 27, 1> phi = Eigen::Matrix<double, 27, 1>::Zero();
};

struct ElementContext {
  GAlphaParams ga{};
  double dt = 0.0;
  Vector3 Ba = Vector3::Zero();
  bool coupled = false;
  bool residual_only = false;
};

namespace detail {

struct ReferenceRule {
  std::vector<QuadPoint> points;
  std::vector<Shape27> bq2;
  std::vector<Shape8> bq1;
};

inline const ReferenceRule& reference_rule() {
  static const ReferenceRule r = [] {
    ReferenceRule out;
    out.points = gauss_rule(3);
    for (const auto& q : out.points) {
      out.bq2.push_back(shape_bq2(q.xi));
      out.bq1.push_back(shape_bq1(q.xi));
    }
    return out;
  }();
  return r;
}

}  // namespace detail

/// Kinematic quantities at quadrature point q of element e.
struct PointKinematics {
  Eigen::Matrix<double, 27, 3> dNdX;
  double dV = 0.0;  ///< reference volume weight
  Tensor2 F = Tensor2::Identity();
  Vector3 H = Vector3::Zero();
  double p = 0.0;
};

inline PointKinematics point_kinematics(const MixedMesh& mesh, int e, int q,
                                        const ElementFields& f) {
  const auto& rule = detail::reference_rule();
  const auto& s = rule.bq2[q];
  const auto& conn = mesh.elems_u[e];
  Tensor2 Jac = Tensor2::Zero();
  for (int a = 0; a < 27; ++a) Jac += mesh.nodes[conn[a]] * s.dN.row(a);
  const double detJ = det3(Jac);
  if (!(detJ > 0.0)) throw NonPositiveJacobian("element: degenerate geometry map");
  PointKinematics k;
  k.dNdX = s.dN * inv3(Jac);
  k.dV = detJ * rule.points[q].weight;
  k.F = Tensor2::Identity() + f.u.transpose() * k.dNdX;
  k.H = -k.dNdX.transpose() * f.phi;
  k.p = rule.bq1[q].N.dot(f.p);
  return k;
}

/// Residuals and stiffness blocks of element e. Trial internal variables and
/// kinematics are written into `qp` (one entry per quadrature point).
inline void element_kernel(const MixedMesh& mesh, int e, const MaterialSpec& spec,
                           const ElementFields& f, std::span<QuadPointState> qp,
                           const ElementContext& ctx, ElementBlocks& out) {
  const auto& rule = detail::reference_rule();
  if (qp.size() != rule.points.size())
    throw ConfigError("element_kernel: quadrature state size mismatch");
  out.reset(ctx.coupled);
  const bool magnetic_field = spec.magnetic_mode == MagneticMode::Soft;
  if (ctx.coupled && !magnetic_field)
    throw ConfigError("element_kernel: coupled problem requires a soft-magnetic material");

  std::vector<BranchState> trial;
  for (int q = 0; q < kQuadPerElem; ++q) {
    const auto k = point_kinematics(mesh, e, q, f);
    const DeformationState s = kinematics(k.F);
    const double J = s.J;
    const double dv = J * k.dV;
    const Eigen::Matrix<double, 27, 3> dNdx = k.dNdX * s.Finv;
    const auto& Np = rule.bq1[q].N;

    auto& state = qp[q];
    ViscousInput visco;
    visco.history = state.n;
    visco.Cbar_inv_n = state.Cbar_inv_n;
    visco.ga = ctx.ga;
    visco.dt = ctx.dt;
    const auto pc = pressure_constants(spec, state.J_n);
    const auto r = assemble_point_response(spec, s, k.H, ctx.Ba, k.p, visco, &trial);
    state.np1 = trial;
    state.Cbar_inv_np1 = s.Cbar_inv;
    state.J_np1 = J;
    out.max_abs_J_minus_1 = std::max(out.max_abs_J_minus_1, std::abs(J - 1.0));
    out.min_J = std::min(out.min_J, J);

    const Tensor2& sig = r.sigma_eff;
    for (int a = 0; a < 27; ++a) {
      const Vector3 g = sig * dNdx.row(a).transpose();
      out.R_u.segment<3>(3 * a) += g * dv;
    }
    out.R_p += Np * (J - pc.J_hat - pc.theta_hat * k.p) * k.dV;
    if (ctx.coupled)
      for (int a = 0; a < 27; ++a) out.R_phi(a) += dNdx.row(a).dot(r.b) * dv;
    if (ctx.residual_only) continue;

    // W(3a+i, (kl)) = sum_j dN_a,j e_(ij)(kl), then column 3b+k of K_uu is
    // sum_l W(:, (kl)) dN_b,l
    const Matrix9& em = r.e_mat;
    Eigen::Matrix<double, 81, 9> W;
    for (int a = 0; a < 27; ++a)
      for (int i = 0; i < 3; ++i)
        W.row(3 * a + i) = dv * (dNdx(a, 0) * em.row(pair_index(i, 0)) +
                                 dNdx(a, 1) * em.row(pair_index(i, 1)) +
                                 dNdx(a, 2) * em.row(pair_index(i, 2)));
    for (int kk = 0; kk < 3; ++kk) {
      Eigen::Map<Eigen::Matrix<double, 81, 27>, 0, Eigen::OuterStride<243>> cols(
          out.K_uu.data() + 81 * kk);
      cols.noalias() += W.middleCols<3>(3 * kk) * dNdx.transpose();
    }
    for (int a = 0; a < 27; ++a)
      for (int i = 0; i < 3; ++i) out.K_up.row(3 * a + i) += dNdx(a, i) * dv * Np.transpose();
    if (pc.theta_hat != 0.0) out.K_pp -= pc.theta_hat * k.dV * (Np * Np.transpose());

    if (ctx.coupled) {
      out.K_phiphi += dNdx * r.d_perm * dNdx.transpose() * dv;
      for (int a = 0; a < 27; ++a) {
        // rows (3a+i) of K_uphi: sum_j dN_a,j p_(ij)k dN_b,k
        for (int i = 0; i < 3; ++i) {
          Vector3 w = Vector3::Zero();
          for (int j = 0; j < 3; ++j) w += dNdx(a, j) * r.p_coup.row(pair_index(i, j)).transpose();
          out.K_uphi.row(3 * a + i) += (dNdx * w).transpose() * dv;
        }
        // row a of K_phiu: sum_i dN_a,i ph_i(kl) dN_b,l
        Vector9 w = r.p_coup_hat.transpose() * dNdx.row(a).transpose();
        for (int b = 0; b < 27; ++b)
          for (int kk = 0; kk < 3; ++kk) {
            double v = 0.0;
            for (int l = 0; l < 3; ++l) v += w(pair_index(kk, l)) * dNdx(b, l);
            out.K_phiu(a, 3 * b + kk) += v * dv;
          }
      }
    }
  }
}

/// Integrals of N_a dA over a reference boundary face, one entry per face
/// control point (ordered as face_nodes_bq2).
inline std::array<double, 9> face_load_weights(const MixedMesh& mesh, const FaceRef& fr) {
  const auto loc = face_nodes_bq2(fr.face);
  const int dir = fr.face / 2;
  const int sdir = dir == 0 ? 1 : 0;
  const int tdir = dir == 2 ? 1 : 2;
  std::array<double, 9> w{};
  const auto line = gauss_line(3);
  for (const auto& [t, wt] : line)
    for (const auto& [sv, ws] : line) {
      Vector3 xi;
      xi(dir) = (fr.face % 2) ? 1.0 : 0.0;
      xi(sdir) = sv;
      xi(tdir) = t;
      const auto s = shape_bq2(xi);
      Vector3 ds = Vector3::Zero(), dt = Vector3::Zero();
      for (int a = 0; a < 27; ++a) {
        const Vector3& X = mesh.nodes[mesh.elems_u[fr.elem][a]];
        ds += X * s.dN(a, sdir);
        dt += X * s.dN(a, tdir);
      }
      const double dA = ds.cross(dt).norm() * ws * wt;
      for (int c = 0; c < 9; ++c) w[c] += s.N(loc[c]) * dA;
    }
  return w;
}

}  // namespace magfem
