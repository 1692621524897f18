#pragma once

// Extremal flow of the maximized Hamiltonian
//
//   H(z) = p_theta mu / r^2 + |p|_r,   |p|_r = sqrt(p_r^2 + p_theta^2 / r^2),
//
// in polar and Cartesian charts, the exponential map with stopping radii,
// the polynomial reparameterization and the closed form of the abnormal
// geodesics.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "ode.hpp"

namespace vortexnav {

struct ExtremalState {
  double r = 1.0;
  double theta = 0.0;
  double p_r = 0.0;
  double p_theta = 0.0;

  double costate_norm() const { return polar_costate_norm(r, p_r, p_theta); }
  PolarState polar() const { return {r, theta}; }
  CartesianState position() const { return {r * std::cos(theta), r * std::sin(theta)}; }
  CartesianState cartesian_costate() const {
    return vortexnav::cartesian_costate(theta, r, {p_r, p_theta});
  }
  ode::Vec<4> as_vec() const { return {r, theta, p_r, p_theta}; }
  static ExtremalState from_vec(const ode::Vec<4>& v) { return {v[0], v[1], v[2], v[3]}; }
};

inline double hamiltonian(const ExtremalState& z, double mu) {
  return z.p_theta * mu / (z.r * z.r) + z.costate_norm();
}

// Value of the Hamiltonian on the initial covector of angle alpha.
inline double initial_hamiltonian(double alpha, double r0, double mu) {
  return mu * std::sin(alpha) / r0 + 1.0;
}

namespace detail {

inline void polar_rhs(const ode::Vec<4>& y, ode::Vec<4>& dy, double mu) {
  const double r = y[0], p_r = y[2], p_theta = y[3];
  const double n = std::hypot(p_r, p_theta / r);
  const double w = p_theta / n;
  const double r2 = r * r;
  dy[0] = p_r / n;
  dy[1] = (mu + w) / r2;
  dy[2] = p_theta / (r2 * r) * (2.0 * mu + w);
  dy[3] = 0.0;
}

}  // namespace detail

inline ExtremalState extremal_rhs(const ExtremalState& z, double mu) {
  ode::Vec<4> dy;
  detail::polar_rhs(z.as_vec(), dy, mu);
  return ExtremalState::from_vec(dy);
}

// Initial condition (r0, theta0, cos(alpha), r0 sin(alpha)), which has unit
// costate norm. The angle alpha is measured from the outward radial
// direction, so alpha = pi points at the vortex.
inline ExtremalState initial_state(double r0, double theta0, double alpha) {
  return {r0, theta0, std::cos(alpha), r0 * std::sin(alpha)};
}

inline ExtremalState initial_state(const VortexProblem& problem, double alpha) {
  return initial_state(problem.r0(), problem.theta0(), alpha);
}

enum class StopReason { ReachedTime, HitInnerRadius, HitOuterRadius };

inline const char* to_string(StopReason s) {
  switch (s) {
    case StopReason::ReachedTime: return "reached_time";
    case StopReason::HitInnerRadius: return "hit_inner_radius";
    case StopReason::HitOuterRadius: return "hit_outer_radius";
  }
  return "?";
}

enum class Direction { Forward, Backward };

struct FlowOptions {
  // Extra times (within the integration span) that must appear as samples.
  std::vector<double> output_times;
  // Record every accepted step; otherwise only output times and endpoints.
  bool record_steps = true;
  // Backward integrates zdot = -H(z) with increasing t.
  Direction direction = Direction::Forward;
};

struct TrajectorySample {
  double t = 0.0;
  ExtremalState z;
};

struct Trajectory {
  double mu = 0.0;
  std::vector<TrajectorySample> samples;
  StopReason stop_reason = StopReason::ReachedTime;

  const TrajectorySample& back() const { return samples.back(); }
  double final_time() const { return samples.back().t; }
  const ExtremalState& final_state() const { return samples.back().z; }
  CartesianState endpoint() const { return samples.back().z.position(); }
};

inline ode::Settings integrator_settings(const Tolerances& tol) {
  ode::Settings s;
  s.rtol = tol.rtol;
  s.atol = tol.atol;
  return s;
}

namespace detail {

inline double radius_event(double r, const Tolerances& tol) {
  return std::min(r - tol.r_min, tol.r_max - r);
}

inline StopReason classify_stop(ode::Status status, double r, const Tolerances& tol) {
  switch (status) {
    case ode::Status::Completed: return StopReason::ReachedTime;
    case ode::Status::StepUnderflow: return StopReason::HitInnerRadius;
    case ode::Status::StepLimit:
      throw NumericFailure("integrator exceeded its step budget");
    case ode::Status::Event:
      return (r - tol.r_min) <= (tol.r_max - r) ? StopReason::HitInnerRadius
                                                 : StopReason::HitOuterRadius;
  }
  return StopReason::ReachedTime;
}

}  // namespace detail

// Integrates the extremal through z0 over [0, duration], stopping at the
// radii tol.r_min / tol.r_max.
inline Trajectory integrate_extremal(const ExtremalState& z0, double mu, double duration,
                                     const Tolerances& tol, const FlowOptions& opt = {}) {
  if (!(duration >= 0.0)) throw InvalidArgument("integration time must be nonnegative");
  if (!(z0.r > 0.0)) throw DomainError("initial radius must be positive");
  if (z0.p_r == 0.0 && z0.p_theta == 0.0) throw DomainError("costate must be nonzero");
  const double sign = opt.direction == Direction::Forward ? 1.0 : -1.0;
  auto rhs = [mu, sign](double, const ode::Vec<4>& y, ode::Vec<4>& dy) {
    detail::polar_rhs(y, dy, mu);
    for (double& v : dy) v *= sign;
  };
  auto event = [&tol](double, const ode::Vec<4>& y) { return detail::radius_event(y[0], tol); };
  Trajectory traj;
  traj.mu = mu;
  const double p_theta = z0.p_theta;
  auto observe = [&traj, p_theta](double t, const ode::Vec<4>& y) {
    ExtremalState z = ExtremalState::from_vec(y);
    z.p_theta = p_theta;
    traj.samples.push_back({t, z});
  };
  ode::Settings st = integrator_settings(tol);
  st.observe_steps = opt.record_steps;
  std::vector<double> outs;
  outs.reserve(opt.output_times.size());
  for (double t : opt.output_times)
    if (t > 0.0 && t < duration) outs.push_back(t);
  std::sort(outs.begin(), outs.end());
  const auto sol = ode::integrate<4>(rhs, 0.0, z0.as_vec(), duration, st,
                                     std::span<const double>(outs), event, observe);
  traj.stop_reason = detail::classify_stop(sol.status, sol.y[0], tol);
  if (traj.stop_reason == StopReason::ReachedTime && duration > 0.0 && sol.t < duration)
    traj.stop_reason = StopReason::HitInnerRadius;
  return traj;
}

// exp_{x0}(t, p0(alpha)).
inline Trajectory exponential(const VortexProblem& problem, double alpha, double t,
                              const FlowOptions& opt = {}) {
  return integrate_extremal(initial_state(problem, alpha), problem.mu(), t, problem.tol(), opt);
}

struct FlowEndpoint {
  double t = 0.0;
  ExtremalState z;
  StopReason stop_reason = StopReason::ReachedTime;
};

inline FlowEndpoint exponential_endpoint(const VortexProblem& problem, double alpha, double t) {
  FlowOptions opt;
  opt.record_steps = false;
  const Trajectory traj = exponential(problem, alpha, t, opt);
  return {traj.final_time(), traj.final_state(), traj.stop_reason};
}

// Same flow written in Cartesian coordinates (x1, x2, p1, p2).
struct CartesianExtremalState {
  double x1 = 1.0, x2 = 0.0, p1 = 0.0, p2 = 0.0;
  ode::Vec<4> as_vec() const { return {x1, x2, p1, p2}; }
  static CartesianExtremalState from_vec(const ode::Vec<4>& v) { return {v[0], v[1], v[2], v[3]}; }
};

inline CartesianExtremalState to_cartesian_extremal(const ExtremalState& z) {
  const CartesianState x = z.position();
  const CartesianState p = z.cartesian_costate();
  return {x.x1, x.x2, p.x1, p.x2};
}

inline ExtremalState to_polar_extremal(const CartesianExtremalState& c, double theta_hint) {
  const double r = std::hypot(c.x1, c.x2);
  double theta = std::atan2(c.x2, c.x1);
  theta += two_pi * std::round((theta_hint - theta) / two_pi);
  const PolarCostate q = mathieu_costate(theta, r, {c.p1, c.p2});
  return {r, theta, q.p_r, q.p_theta};
}

inline CartesianExtremalState cartesian_extremal_rhs(const CartesianExtremalState& c, double mu) {
  const double r2 = c.x1 * c.x1 + c.x2 * c.x2;
  const double r4 = r2 * r2;
  const double n = std::hypot(c.p1, c.p2);
  const double a = 2.0 * mu * c.x1 * c.x2 / r4;
  const double b = mu * (c.x2 * c.x2 - c.x1 * c.x1) / r4;
  CartesianExtremalState d;
  d.x1 = -mu * c.x2 / r2 + c.p1 / n;
  d.x2 = mu * c.x1 / r2 + c.p2 / n;
  d.p1 = -(a * c.p1 + b * c.p2);
  d.p2 = -(b * c.p1 - a * c.p2);
  return d;
}

struct CartesianSample {
  double t = 0.0;
  CartesianExtremalState z;
};

inline std::vector<CartesianSample> integrate_cartesian_extremal(
    const CartesianExtremalState& z0, double mu, double duration, const Tolerances& tol,
    std::span<const double> output_times) {
  auto rhs = [mu](double, const ode::Vec<4>& y, ode::Vec<4>& dy) {
    dy = cartesian_extremal_rhs(CartesianExtremalState::from_vec(y), mu).as_vec();
  };
  auto event = [&tol](double, const ode::Vec<4>& y) {
    return detail::radius_event(std::hypot(y[0], y[1]), tol);
  };
  std::vector<CartesianSample> out;
  auto observe = [&out](double t, const ode::Vec<4>& y) {
    out.push_back({t, CartesianExtremalState::from_vec(y)});
  };
  ode::Settings st = integrator_settings(tol);
  st.observe_steps = false;
  ode::integrate<4>(rhs, 0.0, z0.as_vec(), duration, st, output_times, event, observe);
  return out;
}

// Reparameterized flow with dt = r^3 (c r^2 - mu p_theta) ds, in which the
// vector field is polynomial. The chart fixes x = 1 in the time change.
struct CompactifiedCoefficients {
  double mu = 0.0;
  double p_theta = 0.0;
  double c = 1.0;  // value of H along the extremal
  double lambda1 = 0.0, lambda2 = 0.0, lambda3 = 0.0, lambda4 = 0.0;

  static CompactifiedCoefficients make(double mu, double p_theta, double c) {
    CompactifiedCoefficients k;
    k.mu = mu;
    k.p_theta = p_theta;
    k.c = c;
    k.lambda1 = (2.0 * mu * c + p_theta) * p_theta;
    k.lambda2 = 2.0 * (mu * p_theta) * (mu * p_theta);
    k.lambda3 = mu * c + p_theta;
    k.lambda4 = mu * mu * p_theta;
    return k;
  }

  static CompactifiedCoefficients from_extremal(const ExtremalState& z, double mu) {
    return make(mu, z.p_theta, hamiltonian(z, mu));
  }
};

struct CompactifiedState {
  double r = 1.0;
  double theta = 0.0;
  double p_r = 0.0;
  double x = 1.0;
};

inline CompactifiedState compactified_rhs(const CompactifiedState& s,
                                          const CompactifiedCoefficients& k) {
  const double r2 = s.r * s.r, r3 = r2 * s.r;
  const double x2 = s.x * s.x, x3 = x2 * s.x, x4 = x2 * x2;
  return {r3 * r2 * s.p_r, k.lambda3 * r3 * x3 - k.lambda4 * s.r * x4 * s.x,
          k.lambda1 * r2 * x4 - k.lambda2 * x4 * x2, 0.0};
}

// K1 = lambda2 x^6 / (4 r^4) - lambda1 x^4 / (2 r^2) - p_r^2 / 2.
inline double quadrature_constant(const CompactifiedState& s, const CompactifiedCoefficients& k) {
  const double r2 = s.r * s.r;
  const double x2 = s.x * s.x, x4 = x2 * x2;
  return k.lambda2 * x4 * x2 / (4.0 * r2 * r2) - k.lambda1 * x4 / (2.0 * r2) - 0.5 * s.p_r * s.p_r;
}

// dt/ds on the x = 1 chart.
inline double compactified_time_rate(const CompactifiedState& s,
                                     const CompactifiedCoefficients& k) {
  return s.r * s.r * s.r * (k.c * s.r * s.r - k.mu * k.p_theta);
}

struct CompactifiedSample {
  double s = 0.0;
  double t = 0.0;
  CompactifiedState state;
};

// Integrates the reparameterized flow together with the physical time.
inline std::vector<CompactifiedSample> integrate_compactified(const CompactifiedState& s0,
                                                              const CompactifiedCoefficients& k,
                                                              double s_end, const Tolerances& tol,
                                                              std::span<const double> outputs = {}) {
  auto rhs = [&k](double, const ode::Vec<5>& y, ode::Vec<5>& dy) {
    const CompactifiedState st{y[0], y[1], y[2], y[3]};
    const CompactifiedState d = compactified_rhs(st, k);
    dy = {d.r, d.theta, d.p_r, d.x, compactified_time_rate(st, k)};
  };
  auto event = [&tol](double, const ode::Vec<5>& y) { return detail::radius_event(y[0], tol); };
  std::vector<CompactifiedSample> out;
  auto observe = [&out](double s, const ode::Vec<5>& y) {
    out.push_back({s, y[4], {y[0], y[1], y[2], y[3]}});
  };
  ode::Settings st = integrator_settings(tol);
  st.observe_steps = outputs.empty();
  ode::integrate<5>(rhs, 0.0, ode::Vec<5>{s0.r, s0.theta, s0.p_r, s0.x, 0.0}, s_end, st, outputs,
                    event, observe);
  return out;
}

// Open time interval around t = 0 on which the abnormal closed form holds.
struct AbnormalDomain {
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool contains(double t) const { return t > t_lo && t < t_hi; }
};

inline AbnormalDomain abnormal_time_domain(double r0, double alpha) {
  const double sa = std::sin(alpha);
  if (!(r0 > 0.0)) throw DomainError("abnormal_time_domain: r0 must be positive");
  if (sa == 0.0) throw DomainError("abnormal_time_domain: sin(alpha) must be nonzero");
  const double k = sa / r0;
  const double phi0 = std::atan(-std::cos(alpha) / sa);
  const double a = (-0.5 * pi - phi0) / k;
  const double b = (0.5 * pi - phi0) / k;
  return {std::min(a, b), std::max(a, b)};
}

// Radius along the exceptional (abnormal) geodesic of initial angle alpha.
inline double abnormal_radius(double t, double r0, double alpha) {
  const AbnormalDomain dom = abnormal_time_domain(r0, alpha);
  if (!dom.contains(t)) throw DomainError("abnormal_radius: t outside the domain of the closed form");
  const double sa = std::sin(alpha), ca = std::cos(alpha);
  const double k = sa / r0;
  const double s = k * std::tan(k * t + std::atan(-ca / sa)) + ca / r0;
  const double q = s * s - 2.0 * ca * s / r0 + 1.0 / (r0 * r0);
  return 1.0 / std::sqrt(q);
}

}  // namespace vortexnav
