#include <gtest/gtest.h>

#include <cmath>

#include "magfem/constitutive.hpp"
#include "test_support.hpp"

using namespace magfem;

namespace {

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

MaterialSpec neo_hookean(double mu) {
  MaterialSpec m;
  m.mu = mu;
  return m;
}

}  // namespace

TEST(Deviatoric, ReferenceStateIsStressFree) {
  const auto r = eval_deviatoric(neo_hookean(1000), kinematics(Tensor2::Identity()));
  EXPECT_DOUBLE_EQ(r.energy, 0.0);
  EXPECT_LT(r.P.norm(), 1e-12);
}

TEST(Deviatoric, NeoHookeanUniaxialEnergy) {
  const double c = 1.0 / std::sqrt(2.0);
  const auto r = eval_deviatoric(neo_hookean(1000), kinematics(Vector3(2, c, c).asDiagonal()));
  EXPECT_NEAR(r.energy, 1000.0, 1e-9);
}

TEST(Deviatoric, GentGuard) {
  MaterialSpec m = neo_hookean(1.0);
  m.hyper_model = HyperModel::Gent;
  m.Im = 5.0;
  // equibiaxial stretch with I1bar - 3 = 5
  const double l = std::sqrt(4.0);  // 2 l^2 + l^-4 - 3 = 5.0625 > 5
  EXPECT_THROW(eval_deviatoric(m, kinematics(Vector3(l, l, 1 / (l * l)).asDiagonal())),
               GentLockingLimit);
  EXPECT_NO_THROW(eval_deviatoric(m, kinematics(Vector3(1.2, 1.2, 1 / 1.44).asDiagonal())));
}

TEST(Deviatoric, Objectivity) {
  test::Gen g(3);
  MaterialSpec gent = neo_hookean(2.0);
  gent.hyper_model = HyperModel::Gent;
  gent.Im = 8.0;
  for (int n = 0; n < 100; ++n) {
    const Tensor2 F = g.deformation(0.3), R = g.rotation();
    for (const auto& m : {neo_hookean(2.0), gent}) {
      const double a = eval_deviatoric(m, kinematics(F)).energy;
      const double b = eval_deviatoric(m, kinematics(R * F)).energy;
      EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST(Deviatoric, GentApproachesNeoHookean) {
  test::Gen g(4);
  MaterialSpec gent = neo_hookean(3.0);
  gent.hyper_model = HyperModel::Gent;
  gent.Im = 1e8;
  for (int n = 0; n < 50; ++n) {
    const auto s = kinematics(g.deformation(0.2));
    const double a = eval_deviatoric(neo_hookean(3.0), s).energy;
    const double b = eval_deviatoric(gent, s).energy;
    EXPECT_NEAR(b, a, 1e-6 * std::abs(a));
  }
}

TEST(Deviatoric, StressIsEnergyGradient) {
  test::Gen g(8);
  MaterialSpec gent = neo_hookean(1.5);
  gent.hyper_model = HyperModel::Gent;
  gent.Im = 4.0;
  for (int n = 0; n < 20; ++n) {
    const Tensor2 F = g.deformation(0.25);
    for (const auto& m : {neo_hookean(1.5), gent}) {
      const auto r = eval_deviatoric(m, kinematics(F));
      Tensor2 fd;
      const double h = 1e-6;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Tensor2 Fp = F, Fm = F;
          Fp(i, j) += h;
          Fm(i, j) -= h;
          fd(i, j) = (eval_deviatoric(m, kinematics(Fp)).energy -
                      eval_deviatoric(m, kinematics(Fm)).energy) /
                     (2 * h);
        }
      EXPECT_LT(rel_diff(r.P, fd), 1e-7);
    }
  }
}

TEST(Volumetric, QuadraticForm) {
  MaterialSpec m = neo_hookean(1.0);
  m.incompressible = false;
  m.kappa = 1e6;
  auto v = eval_volumetric(m, 1.0);
  EXPECT_EQ(v.psi, 0.0);
  EXPECT_EQ(v.dpsi, 0.0);
  EXPECT_EQ(v.d2psi, 1e6);
  v = eval_volumetric(m, 1.1);
  EXPECT_NEAR(v.psi, 5000.0, 1e-8);
  EXPECT_NEAR(v.dpsi, 1e5, 1e-8);
  EXPECT_EQ(v.d2psi, 1e6);
  const double h = 1e-5;
  const double fd = (eval_volumetric(m, 1.3 + h).psi - eval_volumetric(m, 1.3 - h).psi) / (2 * h);
  EXPECT_NEAR(eval_volumetric(m, 1.3).dpsi, fd, 1e-7 * std::abs(fd));
  EXPECT_THROW(eval_volumetric(m, 0.0), NonPositiveJacobian);
}

TEST(PressureConstants, IncompressibleAndQuadratic) {
  MaterialSpec m = neo_hookean(1.0);
  for (double Jn : {0.5, 1.0, 1.7}) {
    const auto c = pressure_constants(m, Jn);
    EXPECT_EQ(c.J_hat, 1.0);
    EXPECT_EQ(c.theta_hat, 0.0);
  }
  m.incompressible = false;
  m.kappa = 1e6;
  auto c = pressure_constants(m, 1.2);
  EXPECT_NEAR(c.J_hat, 1.0, 1e-14);
  EXPECT_NEAR(c.theta_hat, 1e-6, 1e-20);
  c = pressure_constants(m, 1.0);
  EXPECT_EQ(c.J_hat, 1.0);
  EXPECT_EQ(c.theta_hat, 1e-6);
  EXPECT_THROW(pressure_constants(m, -1.0), NonPositiveJacobian);
}

TEST(HardMagnetic, ReferenceValues) {
  MaterialSpec m = neo_hookean(1000);
  m.magnetic_mode = MagneticMode::Hard;
  m.mu0 = 0.001;
  m.Br = Vector3(0, 2.0, 0);
  const auto r = eval_hard_magnetic(m, Tensor2::Identity(), Vector3(0, 1.5, 0));
  EXPECT_NEAR(r.energy, -3.0 / 0.001, 1e-9);
  Tensor2 P = Tensor2::Zero();
  P(1, 1) = -3.0 / 0.001;
  EXPECT_LT((r.P - P).norm(), 1e-9);
  EXPECT_EQ(eval_hard_magnetic(m, Tensor2::Identity(), Vector3(1, 0, 0)).energy, 0.0);
  // Ba.Br = 3 mu mu0 gives the cube load parameter k = 3
  const Vector3 Ba(0, 3.0 * 1000 * 0.001 / 2.0, 0);
  EXPECT_NEAR(Ba.dot(m.Br) / (m.mu * m.mu0), 3.0, 1e-14);
}

TEST(SoftMagnetic, ZeroFieldIsInert) {
  test::Gen g(2);
  MaterialSpec m = neo_hookean(1.0);
  m.magnetic_mode = MagneticMode::Soft;
  const auto r = eval_soft_magnetic(m, kinematics(g.deformation()), Vector3::Zero());
  EXPECT_EQ(r.energy, 0.0);
  EXPECT_EQ(r.P.norm(), 0.0);
  EXPECT_EQ(r.B.norm(), 0.0);
}

TEST(SoftMagnetic, ReferenceStateEnergyAndInduction) {
  MaterialSpec m = neo_hookean(1.0);
  m.magnetic_mode = MagneticMode::Soft;
  m.mu0 = 1.2566;
  const double h = 0.7;
  const auto r = eval_soft_magnetic(m, kinematics(Tensor2::Identity()), Vector3(0, 0, h));
  EXPECT_NEAR(r.energy, -5.5 * m.mu0 * h * h, 1e-13);
  EXPECT_LT((r.B - Vector3(0, 0, 11.0 * m.mu0 * h)).norm(), 1e-13);
}

TEST(SoftMagnetic, FreeSpacePermittivityAtReference) {
  MaterialSpec m = neo_hookean(1.0);
  m.magnetic_mode = MagneticMode::Soft;
  m.mu0 = 2.0;
  m.alpha = m.beta = m.eta = 0.0;
  const auto r = eval_soft_magnetic(m, kinematics(Tensor2::Identity()), Vector3(0.3, -0.2, 1.0));
  EXPECT_LT((r.d_perm + 2.0 * Tensor2::Identity()).norm(), 1e-14);
}

TEST(SoftMagnetic, InductionIsNegativeFieldGradient) {
  test::Gen g(12);
  MaterialSpec m = neo_hookean(1.0);
  m.magnetic_mode = MagneticMode::Soft;
  for (int n = 0; n < 20; ++n) {
    const auto s = kinematics(g.deformation());
    const Vector3 H = g.vector(2.0);
    const auto r = eval_soft_magnetic(m, s, H);
    Vector3 fd;
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Vector3 Hp = H, Hm = H;
      Hp(k) += h;
      Hm(k) -= h;
      fd(k) = -(eval_soft_magnetic(m, s, Hp).energy - eval_soft_magnetic(m, s, Hm).energy) / (2 * h);
    }
    EXPECT_LT(rel_diff(r.B, fd), 1e-8);
  }
}

TEST(SoftMagnetic, CouplingPairing) {
  test::Gen g(13);
  MaterialSpec m = neo_hookean(1.0);
  m.magnetic_mode = MagneticMode::Soft;
  for (int n = 0; n < 50; ++n) {
    const auto r = eval_soft_magnetic(m, kinematics(g.deformation()), g.vector(2.0));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          EXPECT_NEAR(r.p_coup(pair_index(i, j), k), r.p_coup_hat(k, pair_index(i, j)),
                      1e-12 * std::max(1.0, r.p_coup.norm()));
  }
}

TEST(PointResponse, ReferenceStates) {
  MaterialSpec m = neo_hookean(1.0);
  m.maxwell_branches = {{0.5, 1.0}};
  std::vector<BranchState> hist(1);
  ViscousInput v;
  v.history = hist;
  v.dt = 0.1;
  v.ga = galpha_params(0.0);
  const auto s = kinematics(Tensor2::Identity());
  auto r = assemble_point_response(m, s, Vector3::Zero(), Vector3::Zero(), 0.0, v);
  EXPECT_LT(r.sigma_eff.norm(), 1e-14);
  EXPECT_LT(r.P.norm(), 1e-14);
  EXPECT_EQ(r.energy, 0.0);
  r = assemble_point_response(m, s, Vector3::Zero(), Vector3::Zero(), 7.0, v);
  EXPECT_LT((r.sigma_eff - 7.0 * Tensor2::Identity()).norm(), 1e-13);
}

TEST(PointResponse, CauchyStressIsSymmetric) {
  test::Gen g(14);
  MaterialSpec m = neo_hookean(1.0);
  m.magnetic_mode = MagneticMode::Soft;
  for (int n = 0; n < 50; ++n) {
    const auto r = assemble_point_response(m, kinematics(g.deformation()), g.vector(),
                                           Vector3::Zero(), g.uniform(-1, 1));
    EXPECT_LT((r.sigma_eff - r.sigma_eff.transpose()).norm(), 1e-9 * r.sigma_eff.norm());
  }
}

TEST(PointResponse, HardMagneticTangentIsGeometricOnly) {
  test::Gen g(15);
  MaterialSpec m = neo_hookean(1.0);
  MaterialSpec mh = m;
  mh.magnetic_mode = MagneticMode::Hard;
  mh.Br = Vector3(0.3, 1.0, -0.2);
  const Tensor2 F = g.deformation();
  const Vector3 Ba(0.5, 0.1, 0.9);
  const auto a = assemble_point_response(m, kinematics(F), Vector3::Zero(), Ba, 0.3);
  const auto b = assemble_point_response(mh, kinematics(F), Vector3::Zero(), Ba, 0.3);
  EXPECT_EQ((a.e_mat - b.e_mat).norm(), 0.0);
  const auto fd = fd_tangent_oracle(mh, F, Vector3::Zero(), Ba, 0.3);
  EXPECT_LT(rel_diff(b.e_mat, fd.e), 1e-6);
}

TEST(TangentOracle, NeoHookeanAtIdentity) {
  const auto m = neo_hookean(1000.0);
  const auto r = assemble_point_response(m, kinematics(Tensor2::Identity()), Vector3::Zero(),
                                         Vector3::Zero(), 0.0);
  const auto fd = fd_tangent_oracle(m, Tensor2::Identity(), Vector3::Zero(), Vector3::Zero(), 0.0);
  EXPECT_LT(rel_diff(r.e_mat, fd.e), 1e-6);
}

TEST(TangentOracle, SoftPermittivityAtRandomState) {
  test::Gen g(16);
  MaterialSpec m = neo_hookean(1.0);
  m.magnetic_mode = MagneticMode::Soft;
  const Tensor2 F = g.deformation();
  const Vector3 H = g.vector();
  const auto r = assemble_point_response(m, kinematics(F), H, Vector3::Zero(), 0.2);
  const auto fd = fd_tangent_oracle(m, F, H, Vector3::Zero(), 0.2);
  EXPECT_LT(rel_diff(r.d_perm, fd.d_perm), 1e-6);
  EXPECT_LT(rel_diff(r.p_coup, fd.p_coup), 1e-6);
  EXPECT_LT(rel_diff(r.p_coup_hat, fd.p_coup_hat), 1e-6);
  EXPECT_LT(rel_diff(r.e_mat, fd.e), 1e-6);
}

TEST(Material, Validation) {
  MaterialSpec m;
  EXPECT_NO_THROW(m.validate());
  m.mu = 0.0;
  EXPECT_THROW(m.validate(), ConfigError);
  m = {};
  m.hyper_model = HyperModel::Gent;
  m.Im = -1;
  EXPECT_THROW(m.validate(), ConfigError);
  m = {};
  m.incompressible = false;
  EXPECT_THROW(m.validate(), ConfigError);
  m = {};
  m.maxwell_branches = {{1.0, 0.0}};
  EXPECT_THROW(m.validate(), ConfigError);
}
