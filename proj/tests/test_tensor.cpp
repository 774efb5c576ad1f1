#include <gtest/gtest.h>

#include <cmath>

#include "magfem/tensor.hpp"
#include "test_support.hpp"

using namespace magfem;

TEST(Det3, ReferenceValues) {
  EXPECT_DOUBLE_EQ(det3(Tensor2::Identity()), 1.0);
  EXPECT_DOUBLE_EQ(det3(Vector3(2, 3, 4).asDiagonal().toDenseMatrix()), 24.0);
  Tensor2 shear = Tensor2::Identity();
  shear(0, 1) = 1.0;
  EXPECT_DOUBLE_EQ(det3(shear), 1.0);
}

TEST(Inv3, ReferenceValues) {
  EXPECT_TRUE(inv3(Tensor2::Identity()).isApprox(Tensor2::Identity()));
  const Tensor2 d = Vector3(2, 4, 5).asDiagonal();
  const Tensor2 expected = Vector3(0.5, 0.25, 0.2).asDiagonal();
  EXPECT_LT((inv3(d) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Inv3, SingularThrows) {
  Tensor2 t = Tensor2::Identity();
  t(2, 2) = 0.0;
  EXPECT_THROW(inv3(t), SingularTensor);
  EXPECT_THROW(inv3(1e-5 * Tensor2::Identity()), SingularTensor);
}

TEST(Inv3, MultiplyBackOnRandomSpd) {
  test::Gen g(11);
  for (int n = 0; n < 200; ++n) {
    const Tensor2 T = g.spd();
    EXPECT_LT((T * inv3(T) - Tensor2::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(det3(inv3(T)) * det3(T), 1.0, 1e-10);
  }
}

TEST(Kinematics, Identity) {
  const auto s = kinematics(Tensor2::Identity());
  EXPECT_DOUBLE_EQ(s.J, 1.0);
  EXPECT_TRUE(s.Cbar.isApprox(Tensor2::Identity()));
  EXPECT_DOUBLE_EQ(s.I1bar, 3.0);
  EXPECT_DOUBLE_EQ(s.I2bar, 3.0);
}

TEST(Kinematics, IsochoricUniaxial) {
  const double r = 1.0 / std::sqrt(2.0);
  const auto s = kinematics(Vector3(2.0, r, r).asDiagonal());
  EXPECT_NEAR(s.J, 1.0, 1e-14);
  EXPECT_NEAR(s.I1bar, 5.0, 1e-13);
}

TEST(Kinematics, PureDilation) {
  const auto s = kinematics(2.0 * Tensor2::Identity());
  EXPECT_DOUBLE_EQ(s.J, 8.0);
  EXPECT_LT((s.Fbar - Tensor2::Identity()).norm(), 1e-14);
  EXPECT_NEAR(s.I1bar, 3.0, 1e-14);
}

TEST(Kinematics, RejectsInvertedDeformation) {
  EXPECT_THROW(kinematics(Vector3(1, 1, -1).asDiagonal()), NonPositiveJacobian);
  EXPECT_THROW(kinematics(Tensor2::Zero()), NonPositiveJacobian);
}

TEST(Kinematics, PropertiesOnRandomStates) {
  test::Gen g(5);
  for (int n = 0; n < 500; ++n) {
    const Tensor2 F = g.deformation(0.4);
    const auto s = kinematics(F);
    EXPECT_NEAR(det3(s.Fbar), 1.0, 1e-12);
    EXPECT_LT((s.Cbar - s.Cbar.transpose()).norm(), 1e-14);
    EXPECT_GT(s.Cbar.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff(), 0.0);
    EXPECT_GE(s.I1bar, 3.0 - 1e-12);
    EXPECT_NEAR(s.I2bar, 0.5 * (s.I1bar * s.I1bar - (s.Cbar * s.Cbar).trace()), 1e-12);
    EXPECT_LT((s.Cbar * s.Cbar_inv - Tensor2::Identity()).norm(), 1e-12);
    const double c = g.uniform(0.2, 5.0);
    EXPECT_LT((kinematics(c * F).Cbar - s.Cbar).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PushForward, ReferenceValues) {
  EXPECT_TRUE(push_forward_H(Tensor2::Identity(), Vector3(1, 2, 3)).isApprox(Vector3(1, 2, 3)));
  EXPECT_TRUE(push_forward_H(Vector3(2, 1, 1).asDiagonal(), Vector3(1, 0, 0))
                  .isApprox(Vector3(0.5, 0, 0)));
  EXPECT_TRUE(push_forward_B(Tensor2::Identity(), Vector3(0, 0, 1)).isApprox(Vector3(0, 0, 1)));
  EXPECT_TRUE(push_forward_B(2.0 * Tensor2::Identity(), Vector3(1, 0, 0))
                  .isApprox(Vector3(0.25, 0, 0)));
  EXPECT_THROW(push_forward_H(-Tensor2::Identity(), Vector3(1, 0, 0)), NonPositiveJacobian);
  EXPECT_THROW(push_forward_B(-Tensor2::Identity(), Vector3(1, 0, 0)), NonPositiveJacobian);
}

TEST(PushForward, RoundTrips) {
  test::Gen g(9);
  for (int n = 0; n < 200; ++n) {
    const Tensor2 F = g.deformation();
    const Vector3 H = g.vector(3.0);
    EXPECT_LT((pull_back_H(F, push_forward_H(F, H)) - H).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((pull_back_B(F, push_forward_B(F, H)) - H).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// Flux of the mapped induction through each deformed face of the unit cube
// equals the referential flux, so a divergence-free field stays one.
TEST(PushForward, FluxBalanceUnderAffineMap) {
  test::Gen g(21);
  for (int n = 0; n < 50; ++n) {
    const Tensor2 F = g.deformation();
    const Vector3 B = g.vector();
    const Vector3 b = push_forward_B(F, B);
    const double J = det3(F);
    const Tensor2 cof = J * inv3(F).transpose();
    for (int d = 0; d < 3; ++d) {
      const Vector3 area = cof.col(d);  // Nanson: da = J F^-T N dA
      EXPECT_NEAR(b.dot(area), B(d), 1e-12);
    }
  }
}
