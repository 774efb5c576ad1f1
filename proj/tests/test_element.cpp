#include <gtest/gtest.h>

#include "magfem/element.hpp"
#include "test_support.hpp"

using namespace magfem;

namespace {

struct Bench {
  MixedMesh mesh = structured_hex_mesh(Vector3(1.0, 0.8, 1.2), {1, 1, 1});
  MaterialSpec spec;
  std::vector<QuadPointState> qp;
  ElementContext ctx;

  explicit Bench(const MaterialSpec& m) : spec(m) {
    qp.assign(kQuadPerElem, initial_quad_point_state(m.maxwell_branches));
    ctx.coupled = m.magnetic_mode == MagneticMode::Soft;
    ctx.ga = galpha_params(0.0);
    ctx.dt = 0.1;
  }

  ElementBlocks eval(const ElementFields& f, bool residual_only = false) {
    ElementBlocks b;
    ctx.residual_only = residual_only;
    element_kernel(mesh, 0, spec, f, qp, ctx, b);
    return b;
  }
};

ElementFields random_fields(test::Gen& g, double amp, bool coupled) {
  ElementFields f;
  for (int a = 0; a < 27; ++a) {
    f.u.row(a) = g.vector(amp).transpose();
    if (coupled) f.phi(a) = g.uniform(-1, 1);
  }
  for (int c = 0; c < 8; ++c) f.p(c) = g.uniform(-0.5, 0.5);
  return f;
}

MaterialSpec soft_visco() {
  MaterialSpec m;
  m.mu = 1.0;
  m.mu0 = 0.8;
  m.magnetic_mode = MagneticMode::Soft;
  m.maxwell_branches = {{0.6, 0.3}};
  return m;
}

// Full element residual [R_u; R_p; R_phi] as one vector.
Eigen::VectorXd stack(const ElementBlocks& b) {
  Eigen::VectorXd r(b.R_u.size() + b.R_p.size() + b.R_phi.size());
  r << b.R_u, b.R_p, b.R_phi;
  return r;
}

}  // namespace

TEST(ElementKernel, ReferenceStateIsEquilibrium) {
  MaterialSpec m;
  m.mu = 1000.0;
  Bench s(m);
  const auto b = s.eval(ElementFields{});
  EXPECT_LT(b.R_u.norm(), 1e-10);
  EXPECT_LT(b.R_p.norm(), 1e-14);
  EXPECT_EQ(b.max_abs_J_minus_1, 0.0);
}

TEST(ElementKernel, IncompressiblePressureBlockVanishes) {
  test::Gen g(1);
  MaterialSpec m;
  Bench s(m);
  EXPECT_EQ(s.eval(random_fields(g, 0.05, false)).K_pp.norm(), 0.0);
  m.incompressible = false;
  m.kappa = 50.0;
  Bench c(m);
  const auto b = c.eval(ElementFields{});
  // -theta_hat * int N_p N_p dV, whose entries sum to -volume / kappa
  EXPECT_NEAR(b.K_pp.sum(), -0.96 / 50.0, 1e-14);
}

TEST(ElementKernel, ConstantPressureLoadsBoundaryOnly) {
  MaterialSpec m;
  Bench s(m);
  ElementFields f;
  f.p.setConstant(2.5);
  const auto b = s.eval(f);
  // translation of the element produces no net force
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (int a = 0; a < 27; ++a) sum += b.R_u(3 * a + c);
    EXPECT_NEAR(sum, 0.0, 1e-12);
    Eigen::VectorXd t = Eigen::VectorXd::Zero(81);
    for (int a = 0; a < 27; ++a) t(3 * a + c) = 1.0;
    EXPECT_LT((b.K_up.transpose() * t).norm(), 1e-12);
  }
  // the only interior control point carries no force
  EXPECT_LT(b.R_u.template segment<3>(3 * 13).norm(), 1e-12);
  // face xmax: x-force equals pressure times area
  double fx = 0.0;
  for (int a : face_nodes_bq2(1)) fx += b.R_u(3 * a);
  EXPECT_NEAR(fx, 2.5 * 0.8 * 1.2, 1e-12);
}

TEST(ElementKernel, RigidTranslationLeavesResidualUnchanged) {
  test::Gen g(2);
  MaterialSpec m;
  m.maxwell_branches = {{0.5, 1.0}};
  Bench s(m);
  const auto f = random_fields(g, 0.05, false);
  const auto a = s.eval(f, true);
  auto shifted = f;
  const Vector3 t(0.3, -0.7, 1.1);
  for (int n = 0; n < 27; ++n) shifted.u.row(n) += t.transpose();
  const auto b = s.eval(shifted, true);
  EXPECT_LT((a.R_u - b.R_u).norm(), 1e-12 * std::max(1.0, a.R_u.norm()));
  EXPECT_LT((a.R_p - b.R_p).norm(), 1e-14);
}

TEST(ElementKernel, StiffnessSymmetry) {
  test::Gen g(3);
  MaterialSpec m;
  m.hyper_model = HyperModel::Gent;
  m.Im = 10.0;
  Bench s(m);
  for (int n = 0; n < 5; ++n) {
    const auto b = s.eval(random_fields(g, 0.05, false));
    EXPECT_LT((b.K_uu - b.K_uu.transpose()).norm(), 1e-9 * b.K_uu.norm());
  }
  Bench c(soft_visco());
  c.spec.maxwell_branches.clear();
  c.qp.assign(kQuadPerElem, initial_quad_point_state({}));
  for (int n = 0; n < 5; ++n) {
    const auto b = c.eval(random_fields(g, 0.05, true));
    EXPECT_LT((b.K_uphi - b.K_phiu.transpose()).norm(), 1e-10 * b.K_uphi.norm());
    EXPECT_LT((b.K_uu - b.K_uu.transpose()).norm(), 1e-9 * b.K_uu.norm());
    EXPECT_LT((b.K_phiphi - b.K_phiphi.transpose()).norm(), 1e-10 * b.K_phiphi.norm());
  }
}

// Every block against central differences of the element residual, for a
// coupled viscoelastic element away from the reference state.
TEST(ElementKernel, BlocksAreResidualDerivatives) {
  test::Gen g(4);
  for (int n = 0; n < 3; ++n) {
    Bench s(soft_visco());
    for (auto& q : s.qp) {
      q.n[0].A = g.spd(0.1);
      q.Cbar_inv_n = kinematics(g.deformation(0.05)).Cbar_inv;
    }
    const auto f = random_fields(g, 0.06, true);
    const auto b = s.eval(f);
    Eigen::MatrixXd K(116, 116);
    K << b.K_uu, b.K_up, b.K_uphi, b.K_up.transpose(), b.K_pp, Eigen::MatrixXd::Zero(8, 27),
        b.K_phiu, Eigen::MatrixXd::Zero(27, 8), b.K_phiphi;
    Eigen::MatrixXd fd(116, 116);
    const double h = 1e-6;
    for (int j = 0; j < 116; ++j) {
      auto fp = f, fm = f;
      if (j < 81) {
        fp.u(j / 3, j % 3) += h;
        fm.u(j / 3, j % 3) -= h;
      } else if (j < 89) {
        fp.p(j - 81) += h;
        fm.p(j - 81) -= h;
      } else {
        fp.phi(j - 89) += h;
        fm.phi(j - 89) -= h;
      }
      fd.col(j) = (stack(s.eval(fp, true)) - stack(s.eval(fm, true))) / (2 * h);
    }
    EXPECT_LT((K - fd).norm() / fd.norm(), 1e-6);
    EXPECT_LT((K.topLeftCorner(81, 81) - fd.topLeftCorner(81, 81)).norm() / b.K_uu.norm(), 1e-6);
    EXPECT_LT((b.K_uphi - fd.block(0, 89, 81, 27)).norm() / b.K_uphi.norm(), 1e-6);
    EXPECT_LT((b.K_phiu - fd.block(89, 0, 27, 81)).norm() / b.K_phiu.norm(), 1e-6);
    EXPECT_LT((b.K_phiphi - fd.block(89, 89, 27, 27)).norm() / b.K_phiphi.norm(), 1e-6);
  }
}

TEST(ElementKernel, CoupledProblemNeedsSoftMaterial) {
  MaterialSpec m;
  Bench s(m);
  s.ctx.coupled = true;
  EXPECT_THROW(s.eval(ElementFields{}), ConfigError);
}

TEST(ElementKernel, InvertedElementThrows) {
  MaterialSpec m;
  Bench s(m);
  ElementFields f;
  for (int a = 0; a < 27; ++a) f.u(a, 0) = -2.0 * greville_bq2(a)(0);
  EXPECT_THROW(s.eval(f), NonPositiveJacobian);
}

TEST(FaceLoads, WeightsSumToFaceArea) {
  const auto m = structured_hex_mesh(Vector3(2, 3, 4), {1, 1, 1});
  const double area[6] = {12, 12, 8, 8, 6, 6};
  for (int f = 0; f < 6; ++f) {
    const auto w = face_load_weights(m, {0, f});
    double s = 0.0;
    for (double v : w) s += v;
    EXPECT_NEAR(s, area[f], 1e-12);
  }
}
