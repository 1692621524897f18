#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vortexnav/jacobi.hpp"

using namespace vortexnav;

TEST(Jacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const ExtremalState z{1.0 + std::fabs(U(rng)), U(rng), U(rng), U(rng)};
    const double mu = U(rng);
    const Mat4 J = extremal_jacobian(z, mu);
    for (int j = 0; j < 4; ++j) {
      const double h = 1e-6;
      ode::Vec<4> a = z.as_vec(), b = z.as_vec();
      a[j] += h;
      b[j] -= h;
      const ode::Vec<4> fa = extremal_rhs(ExtremalState::from_vec(a), mu).as_vec();
      const ode::Vec<4> fb = extremal_rhs(ExtremalState::from_vec(b), mu).as_vec();
      for (int i = 0; i < 4; ++i) {
        const double fd = (fa[i] - fb[i]) / (2.0 * h);
        EXPECT_NEAR(J[i][j], fd, 1e-6 * std::max(1.0, std::fabs(fd))) << i << "," << j;
      }
    }
  }
}

TEST(JacobiField, IsDerivativeOfExponentialInAlpha) {
  const VortexProblem p(1.8, {3.0, 0.0});
  for (double a : {0.4, 2.0, 3.3, 5.1}) {
    const double T = 2.5;
    const JacobiTrajectory jt = integrate_jacobi(p, a, T);
    ASSERT_EQ(jt.stop_reason, StopReason::ReachedTime);
    const CartesianState dx = cartesian_variation(jt.back().z, jt.back().dz);
    const double h = 1e-5;
    const CartesianState xp = exponential(p, a + h, T).endpoint();
    const CartesianState xm = exponential(p, a - h, T).endpoint();
    EXPECT_NEAR(dx.x1, (xp.x1 - xm.x1) / (2.0 * h), 1e-6);
    EXPECT_NEAR(dx.x2, (xp.x2 - xm.x2) / (2.0 * h), 1e-6);
  }
}

TEST(JacobiField, VelocityMatchesTimeDerivative) {
  const VortexProblem p(-1.0, {2.0, 1.0});
  const double a = 1.1, T = 1.7, h = 1e-5;
  const ExtremalState z = exponential(p, a, T).final_state();
  const CartesianState v = cartesian_velocity(z, p.mu());
  const CartesianState xp = exponential(p, a, T + h).endpoint();
  const CartesianState xm = exponential(p, a, T - h).endpoint();
  EXPECT_NEAR(v.x1, (xp.x1 - xm.x1) / (2.0 * h), 1e-7);
  EXPECT_NEAR(v.x2, (xp.x2 - xm.x2) / (2.0 * h), 1e-7);
}

TEST(SingularValue, MatchesEigen) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    const CartesianState a{U(rng), U(rng)}, b{U(rng), U(rng)};
    Eigen::Matrix2d M;
    M << a.x1, b.x1, a.x2, b.x2;
    const double ref = Eigen::JacobiSVD<Eigen::Matrix2d>(M).singularValues()(1);
    EXPECT_NEAR(smallest_singular_value(a, b), ref, 1e-12);
  }
  EXPECT_EQ(smallest_singular_value({0.0, 0.0}, {0.0, 0.0}), 0.0);
}

TEST(Conjugate, InitialSigmaIsOneOnWeakDrift) {
  // at t = 0 the Jacobi field vanishes; sigma starts from the normalized
  // limit, which is nonzero
  const VortexProblem p(2.0, {8.0 / 3.0, 0.0});
  const ConjugateTestResult r = conjugate_test(p, 0.3, 5.0);
  EXPECT_FALSE(r.failed);
  EXPECT_FALSE(r.first_conjugate_time.has_value());
  ASSERT_FALSE(r.t.empty());
  EXPECT_EQ(r.t.size(), r.sigma_min.size());
  for (double s : r.sigma_min) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0 + 1e-9);
  }
}

TEST(Conjugate, SigmaAtInterpolates) {
  ConjugateTestResult r;
  r.t = {0.0, 1.0, 2.0};
  r.sigma_min = {1.0, 0.5, 0.0};
  r.t_stop = 2.0;
  EXPECT_DOUBLE_EQ(*r.sigma_at(0.5), 0.75);
  EXPECT_DOUBLE_EQ(*r.sigma_at(2.0), 0.0);
  EXPECT_FALSE(r.sigma_at(2.5).has_value());
  EXPECT_FALSE(r.sigma_at(-0.1).has_value());
}

TEST(Conjugate, ScanGridAndValidation) {
  const std::vector<double> g = uniform_alpha_grid(4);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_DOUBLE_EQ(g[1], 0.5 * pi);
  const VortexProblem p(2.0, {8.0 / 3.0, 0.0});
  EXPECT_THROW(conjugate_scan(p, 1, 1.0), InvalidArgument);
  EXPECT_THROW(conjugate_test(p, 0.0, -1.0), InvalidArgument);
  const ConjugateScan s = conjugate_scan(p, 16, 10.0);
  EXPECT_EQ(s.results.size(), 16u);
  EXPECT_EQ(s.conjugate_count(), 0u);
  EXPECT_EQ(s.failure_count(), 0u);
}
