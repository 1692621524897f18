#pragma once

// Predictor-corrector continuation of zero paths of F(y, lambda) = 0 with
// F : R^M x R -> R^M, and its use for splitting curves
//
//   F_split(t, alpha1, x, alpha2) = (x - exp(t, alpha1), x - exp(t, alpha2)),
//
// continued in lambda = alpha2.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "jacobi.hpp"
#include "model.hpp"

namespace vortexnav {

template <int M>
using PathVector = Eigen::Matrix<double, M + 1, 1>;  // (y, lambda)

template <int M>
struct MapEvaluation {
  Eigen::Matrix<double, M, 1> F;
  Eigen::Matrix<double, M, M + 1> J;  // [dF/dy | dF/dlambda]
};

enum class PathStop { LeftAnnulus, ParameterBound, StepFailure, StepLimit };

inline const char* to_string(PathStop s) {
  switch (s) {
    case PathStop::LeftAnnulus: return "left_annulus";
    case PathStop::ParameterBound: return "parameter_bound";
    case PathStop::StepFailure: return "step_failure";
    case PathStop::StepLimit: return "step_limit";
  }
  return "?";
}

template <int M>
struct PathSample {
  PathVector<M> u;
  PathVector<M> tangent;  // unit, oriented along the path
  double residual = 0.0;
};

template <int M>
struct ZeroPath {
  std::vector<PathSample<M>> samples;
  PathStop stop_reason = PathStop::StepFailure;

  double lambda(std::size_t i) const { return samples[i].u(M); }

  bool lambda_monotone() const {
    if (samples.size() < 2) return true;
    const double s = lambda(1) - lambda(0);
    for (std::size_t i = 1; i < samples.size(); ++i) {
      const double d = lambda(i) - lambda(i - 1);
      if (d == 0.0 || std::signbit(d) != std::signbit(s)) return false;
    }
    return true;
  }
};

struct ContinuationOptions {
  double h_init = 1e-2;
  double h_min = 1e-10;
  double h_max = 5e-2;
  double corrector_tol = 1e-10;
  int max_corrector_iterations = 12;
  double predictor_tol = 1e-5;   // Heun - Euler difference per step
  double min_tangent_cos = 0.97; // consecutive tangents must stay this aligned
  double lambda_min = -infinity;
  double lambda_max = infinity;
  std::size_t max_steps = 20000;
  int direction = 1;  // initial sign of dlambda
};

// Unit kernel vector of J. Uses the Davidenko direction (-J_y^{-1} J_lambda, 1)
// when J_y is well conditioned and the SVD null vector otherwise.
template <int M>
PathVector<M> path_tangent(const Eigen::Matrix<double, M, M + 1>& J) {
  const Eigen::Matrix<double, M, M> Jy = J.template leftCols<M>();
  const Eigen::Matrix<double, M, 1> Jl = J.col(M);
  Eigen::JacobiSVD<Eigen::Matrix<double, M, M>> svd_y(Jy);
  const auto sv = svd_y.singularValues();
  PathVector<M> tau;
  if (sv(M - 1) > 1e-9 * sv(0)) {
    tau.template head<M>() = -Jy.partialPivLu().solve(Jl);
    tau(M) = 1.0;
  } else {
    Eigen::JacobiSVD<Eigen::Matrix<double, M, M + 1>> svd(J, Eigen::ComputeFullV);
    tau = svd.matrixV().col(M);
  }
  return tau.normalized();
}

namespace detail {

template <int M, class Map>
std::optional<PathVector<M>> correct(Map& F, PathVector<M> u, const ContinuationOptions& opt,
                                     double* residual, std::optional<MapEvaluation<M>>* last) {
  double prev = infinity;
  for (int it = 0; it <= opt.max_corrector_iterations; ++it) {
    std::optional<MapEvaluation<M>> ev = F(u);
    if (!ev) return std::nullopt;
    const double res = ev->F.norm();
    if (!std::isfinite(res)) return std::nullopt;
    if (res <= opt.corrector_tol) {
      *residual = res;
      *last = ev;
      return u;
    }
    if (it > 2 && res > 0.5 * prev) return std::nullopt;
    prev = res;
    // Moore-Penrose step: du = J^T (J J^T)^{-1} F
    const Eigen::Matrix<double, M, M> JJt = ev->J * ev->J.transpose();
    const Eigen::Matrix<double, M, 1> w = JJt.ldlt().solve(ev->F);
    u -= ev->J.transpose() * w;
  }
  return std::nullopt;
}

}  // namespace detail

// Follows the zero path of F through (y0, lambda0). F(u) returns an
// optional MapEvaluation (empty where F is undefined). stop(u) may end the
// path at an accepted point, which is then kept as the last sample.
template <int M, class Map, class Stop>
ZeroPath<M> follow_path(Map&& F, const Eigen::Matrix<double, M, 1>& y0, double lambda0,
                        const ContinuationOptions& opt, Stop&& stop) {
  ZeroPath<M> path;
  PathVector<M> u;
  u.template head<M>() = y0;
  u(M) = lambda0;
  double res = 0.0;
  std::optional<MapEvaluation<M>> ev;
  {
    ContinuationOptions seed_opt = opt;
    seed_opt.max_corrector_iterations = std::max(opt.max_corrector_iterations, 20);
    auto corrected = detail::correct<M>(F, u, seed_opt, &res, &ev);
    if (!corrected) {
      path.stop_reason = PathStop::StepFailure;
      return path;
    }
    u = *corrected;
  }
  PathVector<M> tau = path_tangent<M>(ev->J);
  if ((tau(M) < 0.0) == (opt.direction > 0) && tau(M) != 0.0) tau = -tau;
  path.samples.push_back({u, tau, res});

  double h = opt.h_init;
  for (std::size_t step = 0;; ++step) {
    if (step >= opt.max_steps) {
      path.stop_reason = PathStop::StepLimit;
      return path;
    }
    bool accepted = false;
    PathVector<M> u_new, tau_new;
    double res_new = 0.0, err = 0.0;
    while (!accepted) {
      if (h < opt.h_min) {
        path.stop_reason = PathStop::StepFailure;
        return path;
      }
      // Euler predictor, Heun correction of the predictor
      const PathVector<M> u_e = u + h * tau;
      std::optional<MapEvaluation<M>> ev_e = F(u_e);
      if (!ev_e) {
        h *= 0.5;
        continue;
      }
      PathVector<M> tau_e = path_tangent<M>(ev_e->J);
      if (tau_e.dot(tau) < 0.0) tau_e = -tau_e;
      const PathVector<M> u_p = u + 0.5 * h * (tau + tau_e);
      err = (u_p - u_e).norm();
      if (err > opt.predictor_tol) {
        h *= std::max(0.2, 0.9 * std::sqrt(opt.predictor_tol / err));
        continue;
      }
      std::optional<MapEvaluation<M>> ev_c;
      auto corrected = detail::correct<M>(F, u_p, opt, &res_new, &ev_c);
      if (!corrected) {
        h *= 0.5;
        continue;
      }
      u_new = *corrected;
      tau_new = path_tangent<M>(ev_c->J);
      if (tau_new.dot(tau) < 0.0) tau_new = -tau_new;
      if (tau_new.dot(tau) < opt.min_tangent_cos || (u_new - u).norm() > 2.0 * h) {
        h *= 0.5;
        continue;
      }
      accepted = true;
    }
    const double lam = u_new(M);
    if (lam < opt.lambda_min || lam > opt.lambda_max) {
      path.stop_reason = PathStop::ParameterBound;
      return path;
    }
    u = u_new;
    tau = tau_new;
    path.samples.push_back({u, tau, res_new});
    if (auto s = stop(u)) {
      path.stop_reason = *s;
      return path;
    }
    const double grow = err > 0.0 ? 0.9 * std::sqrt(opt.predictor_tol / err) : 2.0;
    h = std::min(opt.h_max, h * std::clamp(grow, 0.5, 2.0));
  }
}

// ---------------------------------------------------------------------------
// Splitting curves

struct SplitPoint {
  double t = 0.0;
  double alpha1 = 0.0;
  CartesianState x;
  double alpha2 = 0.0;
};

struct SplitMapOptions {
  double r_inner = 0.005;
  double r_outer = 100.0;
};

// F_split and its Jacobian from the two Jacobi fields.
class SplitMap {
 public:
  explicit SplitMap(VortexProblem problem) : problem_(std::move(problem)) {}

  std::optional<MapEvaluation<4>> operator()(const PathVector<4>& u) const {
    const double t = u(0), a1 = u(1), a2 = u(4);
    if (!(t > 0.0) || !std::isfinite(t)) return std::nullopt;
    const JacobiTrajectory j1 = integrate_jacobi(problem_, a1, t, {}, false);
    if (j1.stop_reason != StopReason::ReachedTime) return std::nullopt;
    const JacobiTrajectory j2 = integrate_jacobi(problem_, a2, t, {}, false);
    if (j2.stop_reason != StopReason::ReachedTime) return std::nullopt;
    const double mu = problem_.mu();
    const CartesianState x1 = j1.back().z.position(), x2 = j2.back().z.position();
    const CartesianState v1 = cartesian_velocity(j1.back().z, mu);
    const CartesianState v2 = cartesian_velocity(j2.back().z, mu);
    const CartesianState d1 = cartesian_variation(j1.back().z, j1.back().dz);
    const CartesianState d2 = cartesian_variation(j2.back().z, j2.back().dz);
    MapEvaluation<4> ev;
    ev.F << u(2) - x1.x1, u(3) - x1.x2, u(2) - x2.x1, u(3) - x2.x2;
    ev.J.setZero();
    ev.J(0, 0) = -v1.x1;
    ev.J(1, 0) = -v1.x2;
    ev.J(0, 1) = -d1.x1;
    ev.J(1, 1) = -d1.x2;
    ev.J(0, 2) = 1.0;
    ev.J(1, 3) = 1.0;
    ev.J(2, 0) = -v2.x1;
    ev.J(3, 0) = -v2.x2;
    ev.J(2, 2) = 1.0;
    ev.J(3, 3) = 1.0;
    ev.J(2, 4) = -d2.x1;
    ev.J(3, 4) = -d2.x2;
    return ev;
  }

  const VortexProblem& problem() const { return problem_; }

 private:
  VortexProblem problem_;
};

inline PathVector<4> to_path_vector(const SplitPoint& p) {
  PathVector<4> u;
  u << p.t, p.alpha1, p.x.x1, p.x.x2, p.alpha2;
  return u;
}

inline SplitPoint to_split_point(const PathVector<4>& u) {
  return {u(0), u(1), {u(2), u(3)}, u(4)};
}

// Newton on (t, alpha1, x) with alpha2 held fixed.
inline std::optional<SplitPoint> correct_at_fixed_alpha2(const SplitMap& F, SplitPoint guess,
                                                         double tol = 1e-11, int max_it = 30) {
  PathVector<4> u = to_path_vector(guess);
  for (int it = 0; it < max_it; ++it) {
    const auto ev = F(u);
    if (!ev) return std::nullopt;
    if (ev->F.norm() <= tol) return to_split_point(u);
    const Eigen::Matrix<double, 4, 4> Jy = ev->J.leftCols<4>();
    const Eigen::Matrix<double, 4, 1> dy = Jy.fullPivLu().solve(ev->F);
    if (!dy.allFinite()) return std::nullopt;
    u.head<4>() -= dy;
  }
  const auto ev = F(u);
  if (ev && ev->F.norm() <= 10.0 * tol) return to_split_point(u);
  return std::nullopt;
}

// A continued splitting curve; the samples are ordered by increasing alpha2
// when alpha2 is monotone along the curve.
class SplittingCurve {
 public:
  SplittingCurve(VortexProblem problem, int label) : map_(std::move(problem)), label_(label) {}

  int label() const { return label_; }
  void set_label(int label) { label_ = label; }
  const ZeroPath<4>& path() const { return path_; }
  ZeroPath<4>& path() { return path_; }
  const SplitMap& map() const { return map_; }
  std::array<PathStop, 2> ends{PathStop::StepFailure, PathStop::StepFailure};

  std::size_t size() const { return path_.samples.size(); }
  SplitPoint point(std::size_t i) const { return to_split_point(path_.samples[i].u); }
  double t(std::size_t i) const { return path_.samples[i].u(0); }
  double alpha1(std::size_t i) const { return path_.samples[i].u(1); }
  double alpha2(std::size_t i) const { return path_.samples[i].u(4); }

  // Samples as (alpha2, t) pairs.
  std::vector<std::array<double, 2>> t_of_alpha2() const {
    std::vector<std::array<double, 2>> v;
    v.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) v.push_back({alpha2(i), t(i)});
    return v;
  }

  std::size_t argmin_t() const {
    std::size_t k = 0;
    for (std::size_t i = 1; i < size(); ++i)
      if (t(i) < t(k)) k = i;
    return k;
  }

  double sample_min_t() const { return t(argmin_t()); }

  // Hermite interpolation in chord length between samples i and i + 1.
  PathVector<4> interpolate(std::size_t i, double s) const {
    const auto& a = path_.samples[i];
    const auto& b = path_.samples[i + 1];
    const double L = (b.u - a.u).norm();
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * a.u + h10 * L * a.tangent + h01 * b.u + h11 * L * b.tangent;
  }

  // Zero of F_split at alpha2 = lambda between samples i and i + 1.
  std::optional<SplitPoint> point_at(std::size_t i, double lambda) const {
    double lo = 0.0, hi = 1.0;
    const double la = alpha2(i), lb = alpha2(i + 1);
    const bool inc = lb > la;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (lo + hi);
      const double lm = interpolate(i, mid)(4);
      if ((lm < lambda) == inc) lo = mid; else hi = mid;
    }
    SplitPoint guess = to_split_point(interpolate(i, 0.5 * (lo + hi)));
    guess.alpha2 = lambda;
    return correct_at_fixed_alpha2(map_, guess);
  }

  // dt/dalpha2 of the curve at a zero, from the kernel of the Jacobian.
  std::optional<double> slope_at(const SplitPoint& p) const {
    const auto ev = map_(to_path_vector(p));
    if (!ev) return std::nullopt;
    const PathVector<4> tau = path_tangent<4>(ev->J);
    if (tau(4) == 0.0) return std::nullopt;
    return tau(0) / tau(4);
  }

  // Minimum of t over the curve, refined between samples by bisection on
  // the sign of dt/dalpha2.
  std::optional<SplitPoint> refined_min() const {
    if (size() == 0) return std::nullopt;
    const std::size_t k = argmin_t();
    SplitPoint best = point(k);
    auto slope_sign = [this](std::size_t i) {
      const auto& s = path_.samples[i];
      return s.tangent(0) * s.tangent(4);
    };
    for (std::size_t i : {k == 0 ? k : k - 1, k}) {
      if (i + 1 >= size()) continue;
      const double sa = slope_sign(i), sb = slope_sign(i + 1);
      if (sa == 0.0 || sb == 0.0 || std::signbit(sa) == std::signbit(sb)) continue;
      double lo = alpha2(i), hi = alpha2(i + 1);
      std::optional<SplitPoint> at;
      for (int it = 0; it < 60 && std::fabs(hi - lo) > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        at = point_at(i, mid);
        if (!at) break;
        const auto sl = slope_at(*at);
        if (!sl) break;
        if (std::signbit(*sl) == std::signbit(sa)) lo = mid; else hi = mid;
      }
      if (at && at->t < best.t) best = *at;
    }
    return best;
  }

  double min_t() const {
    const auto p = refined_min();
    return p ? p->t : infinity;
  }

 private:
  SplitMap map_;
  int label_;
  ZeroPath<4> path_;
};

// The cut curve winds many times around the vortex before reaching the
// inner circle; the predictor tolerance is set for that regime.
inline ContinuationOptions splitting_continuation() {
  ContinuationOptions c;
  c.predictor_tol = 1e-4;
  c.h_max = 0.5;
  return c;
}

struct SplittingOptions {
  ContinuationOptions continuation = splitting_continuation();
  double r_inner = 0.005;
  double r_outer = 100.0;
  double t_max = infinity;
};

// Continues F_split from a seed in both directions of alpha2 until the
// spatial point leaves the annulus r_inner <= |x| <= r_outer.
inline SplittingCurve splitting_curve(const VortexProblem& problem, const SplitPoint& seed,
                                      int label = 1, const SplittingOptions& opt = {}) {
  if (std::fabs(angle_difference(seed.alpha1, seed.alpha2)) < 1e-9)
    throw InvalidArgument("splitting seed needs two distinct angles");
  // geodesics must be able to reach the outer circle without tripping r_max
  Tolerances tol = problem.tol();
  tol.r_max = std::max(tol.r_max, 2.0 * opt.r_outer);
  SplittingCurve curve(problem.with_tolerances(tol), label);
  const SplitMap& F = curve.map();
  auto stop = [&opt](const PathVector<4>& u) -> std::optional<PathStop> {
    const double r = std::hypot(u(2), u(3));
    if (r < opt.r_inner || r > opt.r_outer) return PathStop::LeftAnnulus;
    if (u(0) > opt.t_max) return PathStop::ParameterBound;
    return std::nullopt;
  };
  Eigen::Matrix<double, 4, 1> y0;
  y0 << seed.t, seed.alpha1, seed.x.x1, seed.x.x2;
  ContinuationOptions fwd = opt.continuation;
  fwd.direction = 1;
  ContinuationOptions bwd = opt.continuation;
  bwd.direction = -1;
  ZeroPath<4> up = follow_path<4>(F, y0, seed.alpha2, fwd, stop);
  ZeroPath<4> down = follow_path<4>(F, y0, seed.alpha2, bwd, stop);
  ZeroPath<4>& out = curve.path();
  for (auto it = down.samples.rbegin(); it != down.samples.rend(); ++it) {
    PathSample<4> s = *it;
    s.tangent = -s.tangent;
    out.samples.push_back(s);
  }
  for (std::size_t i = out.samples.empty() ? 0 : 1; i < up.samples.size(); ++i)
    out.samples.push_back(up.samples[i]);
  out.stop_reason = up.stop_reason;
  curve.ends = {down.stop_reason, up.stop_reason};
  if (out.samples.size() >= 2 && out.samples.front().u(4) > out.samples.back().u(4)) {
    std::reverse(out.samples.begin(), out.samples.end());
    for (auto& s : out.samples) s.tangent = -s.tangent;
    std::swap(curve.ends[0], curve.ends[1]);
  }
  return curve;
}

}  // namespace vortexnav
