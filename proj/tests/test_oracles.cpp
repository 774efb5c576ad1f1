#include <gtest/gtest.h>

#include <cmath>

#include "magfem/oracles.hpp"

using namespace magfem;

// Reference values below come from plain bisection in long double, written
// independently of the library's root finder.
namespace {

long double bisect(long double (*f)(long double, long double), long double k, long double a,
                   long double b) {
  for (int i = 0; i < 200; ++i) {
    const long double m = 0.5L * (a + b);
    if ((f(m, k) > 0) == (f(a, k) > 0)) a = m;
    else b = m;
  }
  return 0.5L * (a + b);
}

long double cubic(long double l, long double k) { return l * l * l - k * l * l - 1; }

}  // namespace

TEST(CubicOracle, Examples) {
  EXPECT_NEAR(cubic_stretch_oracle(0.0), 1.0, 1e-12);
  EXPECT_NEAR(cubic_stretch_oracle(3.0), 3.1038, 1e-4);
  EXPECT_NEAR(cubic_stretch_oracle(-3.0), 0.5321, 1e-4);
}

TEST(CubicOracle, MatchesIndependentBisection) {
  for (int i = 0; i <= 40; ++i) {
    const double k = -5.0 + 0.25 * i;
    const double ref = static_cast<double>(bisect(cubic, k, 0.0L, 10.0L));
    EXPECT_NEAR(cubic_stretch_oracle(k), ref, 1e-12 * ref) << "k=" << k;
  }
}

TEST(CubicOracle, StrictlyIncreasing) {
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double l = cubic_stretch_oracle(-5.0 + 0.01 * i);
    EXPECT_GT(l, prev);
    prev = l;
  }
}

TEST(GentOracle, Examples) {
  EXPECT_EQ(gent_potential_oracle(1.0, 5.0), 0.0);
  EXPECT_NEAR(gent_potential_oracle(1.2, 5.0), 0.70566, 1e-5);
  EXPECT_THROW(gent_potential_oracle(0.9, 5.0), LockingStretch);
  const double lock = gent_locking_stretch(5.0);
  EXPECT_NEAR(biaxial_locking_measure(lock), 5.0, 1e-9);
  EXPECT_THROW(gent_potential_oracle(lock, 5.0), LockingStretch);
  EXPECT_GT(gent_potential_oracle(lock * (1 - 1e-9), 5.0), 1e3);
}

TEST(GentOracle, BranchMaxima) {
  // Im = 5 rises all the way to the guard; 10 and 50 turn over first
  const auto b5 = gent_ascending_branch(5.0);
  EXPECT_NEAR(biaxial_locking_measure(b5.lambda_max), 0.999 * 5.0, 1e-3);
  const auto b10 = gent_ascending_branch(10.0);
  EXPECT_NEAR(b10.lambda_max, 1.3224, 1e-3);
  EXPECT_NEAR(b10.phibar_max, 0.7118, 1e-4);
  const auto b50 = gent_ascending_branch(50.0);
  EXPECT_NEAR(b50.lambda_max, 1.268, 1e-3);
  EXPECT_NEAR(b50.phibar_max, 0.6914, 1e-4);
}

TEST(GentOracle, IncreasingOnAscendingBranch) {
  for (double Im : {5.0, 10.0, 50.0}) {
    const auto br = gent_ascending_branch(Im);
    double prev = -1.0;
    for (int i = 0; i <= 500; ++i) {
      const double v = gent_potential_oracle(1.0 + (br.lambda_max - 1.0) * i / 500.0, Im);
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(GentOracle, StiffeningRaisesPotential) {
  // smaller Im stiffens, so more potential holds the same stretch
  for (double l : {1.05, 1.1, 1.2}) {
    EXPECT_GT(gent_potential_oracle(l, 5.0), gent_potential_oracle(l, 10.0));
    EXPECT_GT(gent_potential_oracle(l, 10.0), gent_potential_oracle(l, 50.0));
  }
}

TEST(GentOracle, InverseRoundTrip) {
  for (double Im : {5.0, 10.0, 50.0}) {
    const auto br = gent_ascending_branch(Im);
    for (double f : {0.1, 0.5, 0.9, 0.95}) {
      const double phibar = f * br.phibar_max;
      const double l = gent_stretch_for_potential(phibar, Im);
      EXPECT_NEAR(gent_potential_oracle(l, Im), phibar, 1e-10 * phibar);
    }
    EXPECT_THROW(gent_stretch_for_potential(1.01 * br.phibar_max, Im), LockingStretch);
  }
}

TEST(RelativeError, Definition) {
  EXPECT_NEAR(relative_error(1.1, 1.0), 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(relative_error(1e-13, 0.0), 0.1);
  const auto r = make_oracle_result(3.0, 2.0, 2.5);
  EXPECT_DOUBLE_EQ(r.rel_error, 0.25);
}
