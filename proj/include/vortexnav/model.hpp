#pragma once

// Problem definition for time-minimal navigation in the current of a
// motionless point vortex of circulation mu located at the origin:
//
//   xdot = F0(x) + u,  |u| <= 1,  F0(x) = mu (-x2, x1) / |x|^2.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vortexnav {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double infinity = std::numeric_limits<double>::infinity();

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an operation is asked outside the regime it is valid for
// (for instance a cut-locus computation under strong drift).
class PreconditionRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reduce an angle to [0, 2pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a, two_pi);
  if (w < 0.0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

// Signed distance between two angles on the circle, in (-pi, pi].
inline double angle_difference(double a, double b) {
  double d = std::remainder(a - b, two_pi);
  if (d <= -pi) d += two_pi;
  return d;
}

struct CartesianState {
  double x1 = 0.0;
  double x2 = 0.0;

  double norm() const { return std::hypot(x1, x2); }
  CartesianState operator+(const CartesianState& o) const { return {x1 + o.x1, x2 + o.x2}; }
  CartesianState operator-(const CartesianState& o) const { return {x1 - o.x1, x2 - o.x2}; }
  CartesianState operator*(double s) const { return {x1 * s, x2 * s}; }
  bool operator==(const CartesianState&) const = default;
};

inline double distance(const CartesianState& a, const CartesianState& b) {
  return (a - b).norm();
}

struct PolarState {
  double r = 1.0;
  double theta = 0.0;  // unwrapped
};

inline PolarState to_polar(const CartesianState& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("to_polar: the origin is excluded");
  return {r, std::atan2(x.x2, x.x1)};
}

inline CartesianState to_cartesian(const PolarState& q) {
  if (!(q.r > 0.0)) throw DomainError("to_cartesian: r must be positive");
  return {q.r * std::cos(q.theta), q.r * std::sin(q.theta)};
}

inline CartesianState rotate(const CartesianState& x, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * x.x1 - s * x.x2, s * x.x1 + c * x.x2};
}

// Velocity of the current at x.
inline CartesianState drift(const CartesianState& x, double mu) {
  const double r2 = x.x1 * x.x1 + x.x2 * x.x2;
  if (!(r2 > 0.0)) throw DomainError("drift: the vortex at the origin is excluded");
  return {-mu * x.x2 / r2, mu * x.x1 / r2};
}

enum class DriftStrength { Weak, Moderate, Strong };

inline const char* to_string(DriftStrength s) {
  switch (s) {
    case DriftStrength::Weak: return "weak";
    case DriftStrength::Moderate: return "moderate";
    case DriftStrength::Strong: return "strong";
  }
  return "?";
}

inline constexpr double moderate_rtol = 1e-9;

// Compares the current speed |mu|/r with the unit control bound.
inline DriftStrength drift_strength_at_radius(double r, double mu) {
  if (!(r > 0.0)) throw DomainError("drift_strength: r must be positive");
  const double m = std::fabs(mu);
  if (std::fabs(m - r) <= moderate_rtol * r) return DriftStrength::Moderate;
  return m < r ? DriftStrength::Weak : DriftStrength::Strong;
}

inline DriftStrength drift_strength(const CartesianState& x, double mu) {
  return drift_strength_at_radius(x.norm(), mu);
}

struct Tolerances {
  double rtol = 1e-12;
  double atol = 1e-12;
  double newton_tol = 1e-12;
  double r_min = 1e-3;
  double r_max = 100.0;
};

// The control bound is normalized to one; see value_at_speed for other bounds.
class VortexProblem {
 public:
  VortexProblem(double mu, CartesianState x0, Tolerances tol = {})
      : mu_(mu), x0_(x0), tol_(tol) {
    if (!std::isfinite(mu)) throw InvalidArgument("mu must be finite");
    if (!std::isfinite(x0.x1) || !std::isfinite(x0.x2) || !(x0.norm() > 0.0))
      throw InvalidArgument("x0 must be a finite point different from the origin");
    if (!(tol.r_min > 0.0)) throw InvalidArgument("r_min must be positive");
    if (!(tol.r_max > tol.r_min)) throw InvalidArgument("r_max must exceed r_min");
    if (!(tol.rtol > 0.0) || !(tol.atol > 0.0) || !(tol.newton_tol > 0.0))
      throw InvalidArgument("tolerances must be positive");
  }

  double mu() const { return mu_; }
  const CartesianState& x0() const { return x0_; }
  const Tolerances& tol() const { return tol_; }
  double r0() const { return x0_.norm(); }
  double theta0() const { return std::atan2(x0_.x2, x0_.x1); }
  DriftStrength strength() const { return drift_strength(x0_, mu_); }

  VortexProblem with_tolerances(const Tolerances& t) const { return {mu_, x0_, t}; }
  VortexProblem with_x0(const CartesianState& x) const { return {mu_, x, tol_}; }
  VortexProblem with_mu(double mu) const { return {mu, x0_, tol_}; }

 private:
  double mu_;
  CartesianState x0_;
  Tolerances tol_;
};

// V(x0, xf, mu, umax) = V(x0, xf, mu/umax, 1) / umax.
inline double normalized_mu(double mu, double umax) {
  if (!(umax > 0.0)) throw InvalidArgument("umax must be positive");
  return mu / umax;
}

inline double value_at_speed(double unit_speed_value, double umax) {
  if (!(umax > 0.0)) throw InvalidArgument("umax must be positive");
  return unit_speed_value / umax;
}

struct PolarCostate {
  double p_r = 0.0;
  double p_theta = 0.0;
};

inline PolarCostate mathieu_costate(double theta, double r, const CartesianState& p) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * p.x1 + s * p.x2, r * (-s * p.x1 + c * p.x2)};
}

inline CartesianState cartesian_costate(double theta, double r, const PolarCostate& q) {
  if (!(r > 0.0)) throw DomainError("cartesian_costate: r must be positive");
  const double c = std::cos(theta), s = std::sin(theta);
  const double w = q.p_theta / r;
  return {c * q.p_r - s * w, s * q.p_r + c * w};
}

// Norm of the costate in the polar chart, sqrt(p_r^2 + p_theta^2 / r^2).
inline double polar_costate_norm(double r, double p_r, double p_theta) {
  return std::hypot(p_r, p_theta / r);
}

// Time to complete a circle at radius R compared with the time to go
// straight from R to eps: below R_mu circling loses against plunging.
struct Lemma2Bounds {
  double t_theta = 0.0;
  double t_r = 0.0;
  double r_mu = 0.0;
  double eps_mu_r = 0.0;
};

inline Lemma2Bounds lemma2_bounds(double eps, double R, double mu) {
  if (!(R > 0.0)) throw InvalidArgument("lemma2_bounds: R must be positive");
  if (!(eps >= 0.0)) throw InvalidArgument("lemma2_bounds: eps must be nonnegative");
  if (eps > R) throw InvalidArgument("lemma2_bounds: eps must not exceed R");
  if (mu == 0.0) throw InvalidArgument("lemma2_bounds: mu must be nonzero");
  const double m = std::fabs(mu);
  Lemma2Bounds b;
  b.t_theta = two_pi * R * R / (m + R);
  b.t_r = R - eps;
  b.r_mu = m / (two_pi - 1.0);
  b.eps_mu_r = R * (1.0 - two_pi * R / (m + R));
  return b;
}

// Duration of the admissible two-phase strategy: a radial leg at full
// control, then a circular leg at radius rf following the current.
inline double feasible_transfer_time(const CartesianState& x0, const CartesianState& xf,
                                     double mu) {
  const PolarState q0 = to_polar(x0);
  const PolarState qf = to_polar(xf);
  const double t_radial = std::fabs(qf.r - q0.r);
  // while moving radially at unit speed the current turns the point by
  // int mu / r^2 dt = mu |1/rf - 1/r0|
  const double swept = mu * std::fabs(1.0 / qf.r - 1.0 / q0.r);
  const double theta_after = q0.theta + swept;
  const double rate = std::fabs(mu) / (qf.r * qf.r) + 1.0 / qf.r;
  double residual;
  if (mu > 0.0) {
    residual = wrap_angle(qf.theta - theta_after);
  } else if (mu < 0.0) {
    residual = wrap_angle(theta_after - qf.theta);
  } else {
    residual = std::fabs(angle_difference(qf.theta, theta_after));
  }
  if (residual > two_pi - 1e-14) residual = 0.0;
  return t_radial + residual / rate;
}

}  // namespace vortexnav
