#include <gtest/gtest.h>

#include <cmath>

#include "vortexnav/homotopy.hpp"

using namespace vortexnav;

namespace {

auto never = [](const auto&) -> std::optional<PathStop> { return std::nullopt; };

}  // namespace

TEST(Continuation, LinearPathIsTracedExactly) {
  // F(y, lambda) = y - 2 lambda
  auto F = [](const PathVector<1>& u) -> std::optional<MapEvaluation<1>> {
    MapEvaluation<1> ev;
    ev.F << u(0) - 2.0 * u(1);
    ev.J << 1.0, -2.0;
    return ev;
  };
  ContinuationOptions opt;
  opt.lambda_max = 1.0;
  Eigen::Matrix<double, 1, 1> y0;
  y0 << 0.0;
  const ZeroPath<1> path = follow_path<1>(F, y0, 0.0, opt, never);
  EXPECT_EQ(path.stop_reason, PathStop::ParameterBound);
  EXPECT_TRUE(path.lambda_monotone());
  for (const auto& s : path.samples) EXPECT_NEAR(s.u(0), 2.0 * s.u(1), 1e-12);
  EXPECT_GT(path.samples.back().u(1), 0.95);
}

TEST(Continuation, FollowsCircleThroughTurningPoints) {
  // y^2 + lambda^2 = 1 turns back in lambda at (+-1, 0)
  auto F = [](const PathVector<1>& u) -> std::optional<MapEvaluation<1>> {
    MapEvaluation<1> ev;
    ev.F << u(0) * u(0) + u(1) * u(1) - 1.0;
    ev.J << 2.0 * u(0), 2.0 * u(1);
    return ev;
  };
  ContinuationOptions opt;
  opt.max_steps = 5000;
  Eigen::Matrix<double, 1, 1> y0;
  y0 << 1.0;
  double swept = 0.0;
  double prev = std::atan2(0.0, 1.0);
  const ZeroPath<1> path = follow_path<1>(F, y0, 0.0, opt, [&](const PathVector<1>& u) -> std::optional<PathStop> {
    const double a = std::atan2(u(1), u(0));
    swept += std::remainder(a - prev, two_pi);
    prev = a;
    if (std::fabs(swept) > 1.5 * two_pi) return PathStop::LeftAnnulus;
    return std::nullopt;
  });
  EXPECT_EQ(path.stop_reason, PathStop::LeftAnnulus);
  for (const auto& s : path.samples) EXPECT_NEAR(std::hypot(s.u(0), s.u(1)), 1.0, 1e-8);
  EXPECT_FALSE(path.lambda_monotone());
}

TEST(Continuation, UndefinedMapEndsInStepFailure) {
  auto F = [](const PathVector<1>& u) -> std::optional<MapEvaluation<1>> {
    if (u(1) > 0.5) return std::nullopt;
    MapEvaluation<1> ev;
    ev.F << u(0) - u(1);
    ev.J << 1.0, -1.0;
    return ev;
  };
  Eigen::Matrix<double, 1, 1> y0;
  y0 << 0.0;
  const ZeroPath<1> path = follow_path<1>(F, y0, 0.0, ContinuationOptions{}, never);
  EXPECT_EQ(path.stop_reason, PathStop::StepFailure);
  EXPECT_LE(path.samples.back().u(1), 0.5);
}

TEST(SplitMap, JacobianMatchesFiniteDifferences) {
  const SplitMap F(VortexProblem(1.8, {3.0, 0.0}));
  PathVector<4> u;
  u << 2.5, 2.0, 0.3, 1.2, 4.0;
  const auto ev = F(u);
  ASSERT_TRUE(ev.has_value());
  const double h = 1e-6;
  for (int j = 0; j < 5; ++j) {
    PathVector<4> a = u, b = u;
    a(j) += h;
    b(j) -= h;
    const auto fa = F(a), fb = F(b);
    ASSERT_TRUE(fa && fb);
    for (int i = 0; i < 4; ++i) {
      const double fd = (fa->F(i) - fb->F(i)) / (2.0 * h);
      EXPECT_NEAR(ev->J(i, j), fd, 1e-5 * std::max(1.0, std::fabs(fd))) << i << "," << j;
    }
  }
}

TEST(SplitMap, UndefinedForDeadOrNonpositiveTime) {
  const SplitMap F(VortexProblem(1.8, {3.0, 0.0}));
  PathVector<4> u;
  u << -1.0, 2.0, 0.0, 0.0, 4.0;
  EXPECT_FALSE(F(u).has_value());
  // straight at the vortex for longer than r0
  u << 3.5, pi, 0.0, 0.0, 4.0;
  EXPECT_FALSE(F(u).has_value());
}

TEST(SplittingCurve, RejectsCoincidentAngles) {
  const VortexProblem p(1.8, {3.0, 0.0});
  EXPECT_THROW(splitting_curve(p, {3.5, 1.0, {0.0, 0.0}, 1.0 + two_pi}), InvalidArgument);
}

TEST(SplittingCurve, ShortArcStaysOnZeroSet) {
  // seed from a polished wavefront self-intersection at t = 3.5, then
  // continue only a short way
  const VortexProblem p(1.8, {3.0, 0.0});
  const SplitMap F(p);
  const SplitPoint seed{3.5, 3.097805, {1.442047, -0.078029}, 4.434521};
  const auto polished = correct_at_fixed_alpha2(F, seed);
  ASSERT_TRUE(polished.has_value());
  SplittingOptions opt;
  opt.continuation.max_steps = 30;
  const SplittingCurve c = splitting_curve(p, *polished, 1, opt);
  ASSERT_GT(c.size(), 10u);
  EXPECT_TRUE(c.path().lambda_monotone());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const SplitPoint q = c.point(i);
    const CartesianState x1 = exponential(p, q.alpha1, q.t).endpoint();
    const CartesianState x2 = exponential(p, q.alpha2, q.t).endpoint();
    EXPECT_LE(distance(x1, q.x), 1e-8);
    EXPECT_LE(distance(x2, q.x), 1e-8);
  }
  // points between samples are zeros as well
  const double mid = 0.5 * (c.alpha2(3) + c.alpha2(4));
  const auto q = c.point_at(3, mid);
  ASSERT_TRUE(q.has_value());
  EXPECT_NEAR(q->alpha2, mid, 1e-14);
  EXPECT_LE(distance(exponential(p, q->alpha1, q->t).endpoint(), q->x), 1e-8);
}
