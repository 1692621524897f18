#pragma once

// Jacobi fields along extremals and the conjugate-time test.
//
// The Jacobi field used throughout is the derivative of the extremal with
// respect to the initial angle alpha. It is vertical at t = 0 (no state
// perturbation) and its costate part (-sin alpha, r0 cos alpha) is
// orthogonal to p0, as required by the conjugate test. A conjugate time is
// a zero of det(xdot(t), dx(t)) in the Cartesian chart.

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flow.hpp"
#include "parallel.hpp"

namespace vortexnav {

using Mat4 = std::array<std::array<double, 4>, 4>;

// Derivative of the polar extremal vector field; the theta column is zero.
inline Mat4 extremal_jacobian(const ExtremalState& z, double mu) {
  const double r = z.r, pr = z.p_r, pt = z.p_theta;
  const double n = z.costate_norm();
  const double n3 = n * n * n;
  const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2, r5 = r4 * r, r6 = r3 * r3;
  const double pt2 = pt * pt, pt3 = pt2 * pt;
  Mat4 J{};
  J[0][0] = pr * pt2 / (r3 * n3);
  J[0][2] = pt2 / (r2 * n3);
  J[0][3] = -pr * pt / (r2 * n3);
  J[1][0] = -2.0 * (mu + pt / n) / r3 + pt3 / (r5 * n3);
  J[1][2] = -pt * pr / (r2 * n3);
  J[1][3] = pr * pr / (r2 * n3);
  J[2][0] = -6.0 * mu * pt / r4 - 3.0 * pt2 / (r4 * n) + pt3 * pt / (r6 * n3);
  J[2][2] = -pt2 * pr / (r3 * n3);
  J[2][3] = 2.0 * mu / r3 + 2.0 * pt / (r3 * n) - pt3 / (r5 * n3);
  return J;
}

inline ode::Vec<4> variational_rhs(const ExtremalState& z, const ode::Vec<4>& dz, double mu) {
  const Mat4 J = extremal_jacobian(z, mu);
  ode::Vec<4> out{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) out[i] += J[i][j] * dz[j];
  return out;
}

// d/dalpha of the initial condition (r0, theta0, cos alpha, r0 sin alpha).
inline ode::Vec<4> vertical_jacobi_initial(double r0, double alpha) {
  return {0.0, 0.0, -std::sin(alpha), r0 * std::cos(alpha)};
}

inline CartesianState cartesian_velocity(const ExtremalState& z, double mu) {
  const ExtremalState d = extremal_rhs(z, mu);
  const double c = std::cos(z.theta), s = std::sin(z.theta);
  return {c * d.r - z.r * s * d.theta, s * d.r + z.r * c * d.theta};
}

inline CartesianState cartesian_variation(const ExtremalState& z, const ode::Vec<4>& dz) {
  const double c = std::cos(z.theta), s = std::sin(z.theta);
  return {c * dz[0] - z.r * s * dz[1], s * dz[0] + z.r * c * dz[1]};
}

inline double conjugate_determinant(const ExtremalState& z, const ode::Vec<4>& dz, double mu) {
  const CartesianState v = cartesian_velocity(z, mu);
  const CartesianState w = cartesian_variation(z, dz);
  return v.x1 * w.x2 - v.x2 * w.x1;
}

// Smallest singular value of the 2x2 matrix with columns a and b.
inline double smallest_singular_value(const CartesianState& a, const CartesianState& b) {
  const double s = a.x1 * a.x1 + a.x2 * a.x2 + b.x1 * b.x1 + b.x2 * b.x2;
  const double det = std::fabs(a.x1 * b.x2 - a.x2 * b.x1);
  const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * det * det));
  const double smax = std::sqrt(0.5 * (s + disc));
  return smax > 0.0 ? det / smax : 0.0;
}

// sigma_min of [xdot, dx / |dx|].
inline double conjugate_sigma(const ExtremalState& z, const ode::Vec<4>& dz, double mu) {
  const CartesianState v = cartesian_velocity(z, mu);
  const CartesianState w = cartesian_variation(z, dz);
  const double nw = w.norm();
  if (!(nw > 0.0)) return 0.0;
  return smallest_singular_value(v, w * (1.0 / nw));
}

struct JacobiSample {
  double t = 0.0;
  ExtremalState z;
  ode::Vec<4> dz{};
};

struct JacobiTrajectory {
  double mu = 0.0;
  std::vector<JacobiSample> samples;
  StopReason stop_reason = StopReason::ReachedTime;
  const JacobiSample& back() const { return samples.back(); }
};

namespace detail {

inline void augmented_rhs(const ode::Vec<8>& y, ode::Vec<8>& dy, double mu) {
  ode::Vec<4> z{y[0], y[1], y[2], y[3]}, dz4;
  polar_rhs(z, dz4, mu);
  const ExtremalState zs = ExtremalState::from_vec(z);
  const ode::Vec<4> v = variational_rhs(zs, {y[4], y[5], y[6], y[7]}, mu);
  for (std::size_t i = 0; i < 4; ++i) {
    dy[i] = dz4[i];
    dy[4 + i] = v[i];
  }
}

inline ode::Vec<8> pack(const ExtremalState& z, const ode::Vec<4>& dz) {
  return {z.r, z.theta, z.p_r, z.p_theta, dz[0], dz[1], dz[2], dz[3]};
}

inline JacobiSample unpack(double t, const ode::Vec<8>& y) {
  return {t, {y[0], y[1], y[2], y[3]}, {y[4], y[5], y[6], y[7]}};
}

}  // namespace detail

// Integrates the extremal together with a Jacobi field.
inline JacobiTrajectory integrate_jacobi(const ExtremalState& z0, const ode::Vec<4>& dz0, double mu,
                                         double duration, const Tolerances& tol,
                                         std::span<const double> outputs = {},
                                         bool record_steps = true) {
  auto rhs = [mu](double, const ode::Vec<8>& y, ode::Vec<8>& dy) { detail::augmented_rhs(y, dy, mu); };
  auto event = [&tol](double, const ode::Vec<8>& y) { return detail::radius_event(y[0], tol); };
  JacobiTrajectory out;
  out.mu = mu;
  auto observe = [&out](double t, const ode::Vec<8>& y) { out.samples.push_back(detail::unpack(t, y)); };
  ode::Settings st = integrator_settings(tol);
  st.observe_steps = record_steps;
  const auto sol =
      ode::integrate<8>(rhs, 0.0, detail::pack(z0, dz0), duration, st, outputs, event, observe);
  out.stop_reason = detail::classify_stop(sol.status, sol.y[0], tol);
  return out;
}

inline JacobiTrajectory integrate_jacobi(const VortexProblem& problem, double alpha,
                                         double duration, std::span<const double> outputs = {},
                                         bool record_steps = true) {
  return integrate_jacobi(initial_state(problem, alpha), vertical_jacobi_initial(problem.r0(), alpha),
                          problem.mu(), duration, problem.tol(), outputs, record_steps);
}

struct ConjugateOptions {
  std::size_t n_samples = 501;  // uniform sigma_min samples on [0, t_max]
  double exclude_window = 1e-3;
  double bisection_tol = 1e-10;
};

struct ConjugateTestResult {
  double alpha = 0.0;
  std::vector<double> t;
  std::vector<double> sigma_min;
  std::optional<double> first_conjugate_time;
  double t_stop = 0.0;
  StopReason stop_reason = StopReason::ReachedTime;
  double final_radius = 0.0;
  double final_sigma = 0.0;  // sigma_min at t_stop
  bool failed = false;
  std::string error;

  // sigma_min at t by linear interpolation of the samples; empty beyond the
  // stop event.
  std::optional<double> sigma_at(double tq) const {
    if (t.empty() || tq < t.front() || tq > t_stop) return std::nullopt;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (tq <= t[i]) {
        const double w = (tq - t[i - 1]) / (t[i] - t[i - 1]);
        return sigma_min[i - 1] + w * (sigma_min[i] - sigma_min[i - 1]);
      }
    }
    return sigma_min.back();
  }
};

inline ConjugateTestResult conjugate_test(const VortexProblem& problem, double alpha, double t_max,
                                          const ConjugateOptions& opt = {}) {
  if (!(t_max > 0.0)) throw InvalidArgument("conjugate_test: t_max must be positive");
  const double mu = problem.mu();
  const Tolerances& tol = problem.tol();
  ConjugateTestResult res;
  res.alpha = alpha;
  std::vector<double> grid;
  const std::size_t ns = std::max<std::size_t>(opt.n_samples, 2);
  for (std::size_t i = 1; i + 1 < ns; ++i)
    grid.push_back(t_max * static_cast<double>(i) / static_cast<double>(ns - 1));

  auto rhs = [mu](double, const ode::Vec<8>& y, ode::Vec<8>& dy) { detail::augmented_rhs(y, dy, mu); };
  auto event = [&tol](double, const ode::Vec<8>& y) { return detail::radius_event(y[0], tol); };
  auto det_of = [mu](const ode::Vec<8>& y) {
    const JacobiSample s = detail::unpack(0.0, y);
    return conjugate_determinant(s.z, s.dz, mu);
  };

  double t_prev = 0.0;
  ode::Vec<8> y_prev{};
  double d_prev = 0.0;
  bool have_prev = false;
  std::size_t next_grid = 0;
  auto observe = [&](double t, const ode::Vec<8>& y) {
    const JacobiSample s = detail::unpack(t, y);
    const bool on_grid = t == 0.0 || (next_grid < grid.size() && t == grid[next_grid]);
    if (on_grid) {
      if (t != 0.0) ++next_grid;
      res.t.push_back(t);
      res.sigma_min.push_back(conjugate_sigma(s.z, s.dz, mu));
    }
    if (t < opt.exclude_window) return;
    const double d = det_of(y);
    if (have_prev && !res.first_conjugate_time && d_prev != 0.0 &&
        (d == 0.0 || std::signbit(d) != std::signbit(d_prev))) {
      double lo = 0.0, hi = t - t_prev;
      while (hi - lo > opt.bisection_tol) {
        const double mid = 0.5 * (lo + hi);
        const double dm = det_of(ode::single_step<8>(rhs, t_prev, y_prev, mid));
        if (std::signbit(dm) == std::signbit(d_prev) && dm != 0.0) lo = mid; else hi = mid;
      }
      res.first_conjugate_time = t_prev + 0.5 * (lo + hi);
    }
    t_prev = t;
    y_prev = y;
    d_prev = d;
    have_prev = true;
  };
  try {
    ode::Settings st = integrator_settings(tol);
    st.observe_steps = true;
    const auto sol =
        ode::integrate<8>(rhs, 0.0, detail::pack(initial_state(problem, alpha),
                                                 vertical_jacobi_initial(problem.r0(), alpha)),
                          t_max, st, std::span<const double>(grid), event, observe);
    res.stop_reason = detail::classify_stop(sol.status, sol.y[0], tol);
    res.t_stop = sol.t;
    res.final_radius = sol.y[0];
    const JacobiSample last = detail::unpack(sol.t, sol.y);
    res.final_sigma = conjugate_sigma(last.z, last.dz, mu);
    if (res.t.empty() || res.t.back() != sol.t) {
      res.t.push_back(sol.t);
      res.sigma_min.push_back(res.final_sigma);
    }
  } catch (const std::exception& e) {
    res.failed = true;
    res.error = e.what();
  }
  return res;
}

struct ConjugateScan {
  std::vector<double> alpha_grid;
  std::vector<ConjugateTestResult> results;

  std::size_t conjugate_count() const {
    std::size_t n = 0;
    for (const auto& r : results) n += r.first_conjugate_time.has_value();
    return n;
  }
  std::size_t failure_count() const {
    std::size_t n = 0;
    for (const auto& r : results) n += r.failed;
    return n;
  }
};

inline std::vector<double> uniform_alpha_grid(std::size_t n) {
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = two_pi * static_cast<double>(i) / static_cast<double>(n);
  return a;
}

inline ConjugateScan conjugate_scan(const VortexProblem& problem, std::size_t n, double t_max,
                                    const ConjugateOptions& opt = {}) {
  if (n < 2) throw InvalidArgument("conjugate_scan: need at least two angles");
  ConjugateScan scan;
  scan.alpha_grid = uniform_alpha_grid(n);
  scan.results.resize(n);
  parallel_for(n, [&](std::size_t i) {
    scan.results[i] = conjugate_test(problem, scan.alpha_grid[i], t_max, opt);
  });
  return scan;
}

}  // namespace vortexnav
