#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vortexnav/model.hpp"

using namespace vortexnav;

TEST(Angles, WrapIntoZeroTwoPi) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_NEAR(wrap_angle(-0.5), two_pi - 0.5, 1e-15);
  EXPECT_NEAR(wrap_angle(7.0 * pi), pi, 1e-12);
  for (double a : {-100.0, -3.0, 0.1, 6.2, 50.0}) {
    const double w = wrap_angle(a);
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, two_pi);
    EXPECT_NEAR(std::remainder(w - a, two_pi), 0.0, 1e-12);
  }
}

TEST(Angles, DifferenceIsShortestSigned) {
  EXPECT_NEAR(angle_difference(0.1, two_pi - 0.1), 0.2, 1e-14);
  EXPECT_NEAR(angle_difference(two_pi - 0.1, 0.1), -0.2, 1e-14);
  EXPECT_NEAR(angle_difference(3.0 + 4.0 * pi, 3.0), 0.0, 1e-12);
}

TEST(Coordinates, PolarRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const CartesianState x{U(rng), U(rng)};
    const CartesianState y = to_cartesian(to_polar(x));
    EXPECT_NEAR(x.x1, y.x1, 1e-13);
    EXPECT_NEAR(x.x2, y.x2, 1e-13);
  }
}

TEST(Coordinates, CostateRoundTripPreservesPairing) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    const double r = 0.2 + std::fabs(U(rng)), theta = U(rng);
    const CartesianState p{U(rng), U(rng)};
    const PolarCostate q = mathieu_costate(theta, r, p);
    const CartesianState back = cartesian_costate(theta, r, q);
    EXPECT_NEAR(back.x1, p.x1, 1e-13);
    EXPECT_NEAR(back.x2, p.x2, 1e-13);
    // the Euclidean norm in polar form
    EXPECT_NEAR(polar_costate_norm(r, q.p_r, q.p_theta), p.norm(), 1e-13);
    // p_theta is the angular momentum x1 p2 - x2 p1
    const CartesianState x = to_cartesian({r, theta});
    EXPECT_NEAR(q.p_theta, x.x1 * p.x2 - x.x2 * p.x1, 1e-13);
  }
}

TEST(Current, DriftIsRotationalWithSpeedMuOverR) {
  const CartesianState x{3.0, 4.0};
  const CartesianState f = drift(x, 2.0);
  EXPECT_NEAR(f.norm(), 2.0 / 5.0, 1e-15);
  EXPECT_NEAR(f.x1 * x.x1 + f.x2 * x.x2, 0.0, 1e-15);
  EXPECT_GT(x.x1 * f.x2 - x.x2 * f.x1, 0.0);  // counterclockwise for mu > 0
}

TEST(Current, StrengthRegimes) {
  EXPECT_EQ(drift_strength({3.0, 0.0}, 2.0), DriftStrength::Weak);
  EXPECT_EQ(drift_strength({2.0, 0.0}, 2.0), DriftStrength::Moderate);
  EXPECT_EQ(drift_strength({1.0, 0.0}, -2.0), DriftStrength::Strong);
  EXPECT_EQ(drift_strength({1.0, 0.0}, 0.0), DriftStrength::Weak);
}

TEST(Problem, RejectsInvalidInput) {
  EXPECT_THROW(VortexProblem(1.0, {0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(VortexProblem(std::nan(""), {1.0, 0.0}), InvalidArgument);
  EXPECT_THROW(VortexProblem(1.0, {INFINITY, 0.0}), InvalidArgument);
  Tolerances t;
  t.r_min = 0.0;
  EXPECT_THROW(VortexProblem(1.0, {1.0, 0.0}, t), InvalidArgument);
  t = {};
  t.r_max = t.r_min;
  EXPECT_THROW(VortexProblem(1.0, {1.0, 0.0}, t), InvalidArgument);
  t = {};
  t.rtol = -1.0;
  EXPECT_THROW(VortexProblem(1.0, {1.0, 0.0}, t), InvalidArgument);
}

TEST(Problem, Accessors) {
  const VortexProblem p(1.8, {0.0, 3.0});
  EXPECT_DOUBLE_EQ(p.r0(), 3.0);
  EXPECT_NEAR(p.theta0(), 0.5 * pi, 1e-15);
  EXPECT_EQ(p.strength(), DriftStrength::Weak);
  EXPECT_DOUBLE_EQ(p.with_mu(-1.0).mu(), -1.0);
  EXPECT_DOUBLE_EQ(p.with_x0({5.0, 0.0}).r0(), 5.0);
}

TEST(Scaling, SpeedNormalization) {
  EXPECT_DOUBLE_EQ(normalized_mu(4.0, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(value_at_speed(3.0, 2.0), 1.5);
  EXPECT_THROW(normalized_mu(1.0, 0.0), InvalidArgument);
  EXPECT_THROW(value_at_speed(1.0, -1.0), InvalidArgument);
}

TEST(Bounds, CircleVersusPlunge) {
  const Lemma2Bounds b = lemma2_bounds(0.1, 1.0, 2.0);
  EXPECT_NEAR(b.t_theta, two_pi / 3.0, 1e-14);
  EXPECT_NEAR(b.t_r, 0.9, 1e-15);
  EXPECT_NEAR(b.r_mu, 2.0 / (two_pi - 1.0), 1e-15);
  EXPECT_THROW(lemma2_bounds(2.0, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(lemma2_bounds(0.1, 1.0, 0.0), InvalidArgument);
}

TEST(FeasibleTime, RadialWithoutCurrent) {
  EXPECT_NEAR(feasible_transfer_time({2.0, 0.0}, {4.0, 0.0}, 0.0), 2.0, 1e-14);
  EXPECT_NEAR(feasible_transfer_time({0.0, 2.0}, {0.0, 1.0}, 0.0), 1.0, 1e-14);
}

TEST(FeasibleTime, CircleLegFollowsCurrent) {
  // from (2, 0) to (-2, 0): no radial leg, half a turn at angular rate
  // |mu| / r^2 + 1 / r
  const double mu = 4.0;
  const double rate = mu / 4.0 + 0.5;
  EXPECT_NEAR(feasible_transfer_time({2.0, 0.0}, {-2.0, 0.0}, mu), pi / rate, 1e-13);
  // the bound dominates the optimal time of the same transfer
  EXPECT_GT(feasible_transfer_time({2.0, 0.0}, {-2.0, 0.0}, mu), 1.641);
}
