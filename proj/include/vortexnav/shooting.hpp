#pragma once

// Indirect shooting: zeros of S(T, alpha) = exp_{x0}(T, p0(alpha)) - xf.
// The Jacobian of S has columns xdot(T) and the alpha-Jacobi field dx(T).

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "classify.hpp"
#include "jacobi.hpp"
#include "model.hpp"
#include "parallel.hpp"

namespace vortexnav {

struct ShootingProblem {
  VortexProblem problem;
  CartesianState xf;

  ShootingProblem(VortexProblem p, CartesianState target) : problem(std::move(p)), xf(target) {
    if (!(xf.norm() > 0.0)) throw InvalidArgument("target must differ from the origin");
  }
};

struct ShootingEvaluation {
  bool alive = false;  // the geodesic survives up to T
  CartesianState residual;
  CartesianState velocity;   // dS/dT
  CartesianState variation;  // dS/dalpha
  ExtremalState z;
};

inline ShootingEvaluation evaluate_shooting(const ShootingProblem& sp, double T, double alpha) {
  ShootingEvaluation ev;
  const VortexProblem& p = sp.problem;
  if (T == 0.0) {
    ev.alive = true;
    ev.z = initial_state(p, alpha);
    ev.residual = p.x0() - sp.xf;
    ev.velocity = cartesian_velocity(ev.z, p.mu());
    return ev;
  }
  const JacobiTrajectory jt = integrate_jacobi(p, alpha, T, {}, false);
  const JacobiSample& last = jt.back();
  ev.alive = jt.stop_reason == StopReason::ReachedTime;
  ev.z = last.z;
  ev.residual = last.z.position() - sp.xf;
  ev.velocity = cartesian_velocity(last.z, p.mu());
  ev.variation = cartesian_variation(last.z, last.dz);
  return ev;
}

enum class ShootStatus { Converged, NoConvergence, SingularJacobian, InvalidGuess };

inline const char* to_string(ShootStatus s) {
  switch (s) {
    case ShootStatus::Converged: return "converged";
    case ShootStatus::NoConvergence: return "no_convergence";
    case ShootStatus::SingularJacobian: return "singular_jacobian";
    case ShootStatus::InvalidGuess: return "invalid_guess";
  }
  return "?";
}

struct NewtonOptions {
  int max_iterations = 60;
  int max_halvings = 30;
  double accept_tol = 1e-10;  // residual needed to report convergence
  double singular_tol = 1e-13;
  double max_alpha_step = 0.5;    // radians per iteration
  double max_time_step = 0.5;     // relative to max(T, 1)
  double T_max = infinity;        // iterates beyond are rejected
  int stall_iterations = 20;      // give up if still far after this many
  double stall_residual = 1e-4;
};

struct BCExtremal {
  double T = 0.0;
  double alpha = 0.0;  // in [0, 2pi)
  double residual = 0.0;
  int iterations = 0;
  GeodesicClassification classification;
  CartesianState endpoint;
};

struct ShootOutcome {
  ShootStatus status = ShootStatus::NoConvergence;
  std::optional<BCExtremal> extremal;
  int iterations = 0;
  double residual = infinity;
  double T = 0.0;
  double alpha = 0.0;
};

// Re-integrates the geodesic of a BC-extremal.
inline Trajectory trajectory_of(const VortexProblem& problem, const BCExtremal& bc,
                                const FlowOptions& opt = {}) {
  return exponential(problem, bc.alpha, bc.T, opt);
}

// Damped Newton with backtracking on |S|.
inline ShootOutcome shoot(const ShootingProblem& sp, double T_guess, double alpha_guess,
                          const NewtonOptions& opt = {}) {
  ShootOutcome out;
  double T = T_guess, alpha = alpha_guess;
  if (!(T > 0.0)) {
    out.status = ShootStatus::InvalidGuess;
    return out;
  }
  const double target_tol = std::min(sp.problem.tol().newton_tol, opt.accept_tol);
  ShootingEvaluation ev = evaluate_shooting(sp, T, alpha);
  if (!ev.alive) {
    out.status = ShootStatus::InvalidGuess;
    return out;
  }
  double res = ev.residual.norm();
  int it = 0;
  bool singular = false;
  for (; it < opt.max_iterations && res > target_tol; ++it) {
    const CartesianState a = ev.velocity, b = ev.variation;
    const double det = a.x1 * b.x2 - a.x2 * b.x1;
    if (!(std::fabs(det) > opt.singular_tol * std::max(1e-300, a.norm() * b.norm()))) {
      singular = true;
      break;
    }
    double dT = -(b.x2 * ev.residual.x1 - b.x1 * ev.residual.x2) / det;
    double dA = -(-a.x2 * ev.residual.x1 + a.x1 * ev.residual.x2) / det;
    const double limit = std::max({1.0, std::fabs(dA) / opt.max_alpha_step,
                                   std::fabs(dT) / (opt.max_time_step * std::max(T, 1.0))});
    dT /= limit;
    dA /= limit;
    double lam = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, lam *= 0.5) {
      const double Tn = T + lam * dT;
      if (!(Tn > 0.0) || Tn > opt.T_max) continue;
      const double An = alpha + lam * dA;
      const ShootingEvaluation en = evaluate_shooting(sp, Tn, An);
      if (!en.alive) continue;
      const double rn = en.residual.norm();
      if (rn < res) {
        T = Tn;
        alpha = An;
        ev = en;
        res = rn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (it + 1 >= opt.stall_iterations && res > opt.stall_residual) {
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.residual = res;
  out.T = T;
  out.alpha = alpha;
  if (res <= opt.accept_tol) {
    out.status = ShootStatus::Converged;
    BCExtremal bc;
    bc.T = T;
    bc.alpha = wrap_angle(alpha);
    bc.residual = res;
    bc.iterations = it;
    bc.classification = classify(bc.alpha, sp.problem.r0(), sp.problem.mu());
    bc.endpoint = ev.z.position();
    out.extremal = bc;
  } else {
    out.status = singular ? ShootStatus::SingularJacobian : ShootStatus::NoConvergence;
  }
  return out;
}

struct SolveAllOptions {
  double horizon_factor = 1.05;  // times the feasible transfer time
  double time_step = 0.01;       // resolution of the seeding grid in t
  std::size_t max_seeds = 32;
  double dedup_tol = 1e-6;
  NewtonOptions newton;
};

// Multi-start: geodesics of a uniform alpha-grid are sampled on a time grid
// up to the horizon; discrete local minima of |x(t; alpha) - xf| seed Newton.
inline std::vector<BCExtremal> solve_all(const ShootingProblem& sp, std::size_t n_starts,
                                         const SolveAllOptions& opt = {}) {
  if (n_starts < 1) throw InvalidArgument("solve_all: n_starts must be positive");
  const VortexProblem& p = sp.problem;
  std::vector<BCExtremal> found;
  if (distance(p.x0(), sp.xf) <= 1e-14 * std::max(1.0, p.r0())) {
    BCExtremal bc;
    bc.classification = classify(0.0, p.r0(), p.mu());
    bc.endpoint = p.x0();
    found.push_back(bc);
    return found;
  }
  const double horizon = opt.horizon_factor * feasible_transfer_time(p.x0(), sp.xf, p.mu()) +
                         opt.time_step;
  const std::size_t m = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(horizon / opt.time_step)));
  std::vector<double> times(m);
  for (std::size_t j = 0; j < m; ++j) times[j] = horizon * static_cast<double>(j + 1) / static_cast<double>(m);
  const std::size_t n = n_starts;
  const std::vector<double> alphas = uniform_alpha_grid(n);
  std::vector<double> dist(n * m, infinity);
  parallel_for(n, [&](std::size_t i) {
    FlowOptions fo;
    fo.record_steps = false;
    fo.output_times = times;
    const Trajectory tr = exponential(p, alphas[i], horizon, fo);
    std::size_t j = 0;
    for (const auto& s : tr.samples) {
      while (j < m && times[j] < s.t) ++j;
      if (j < m && times[j] == s.t) dist[i * m + j] = distance(s.z.position(), sp.xf);
    }
  });
  struct Seed {
    double d, T, alpha;
  };
  std::vector<Seed> seeds;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = dist[i * m + j];
      if (!std::isfinite(d)) continue;
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1 && is_min; ++dj) {
          if (di == 0 && dj == 0) continue;
          const long jj = static_cast<long>(j) + dj;
          if (jj < 0 || jj >= static_cast<long>(m)) continue;
          const std::size_t ii = (i + (di < 0 ? n - 1 : static_cast<std::size_t>(di))) % n;
          if (n == 1 && di != 0) continue;
          const double dn = dist[ii * m + static_cast<std::size_t>(jj)];
          if (dn < d) is_min = false;
        }
      }
      if (is_min) seeds.push_back({d, times[j], alphas[i]});
    }
  }
  std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.d < b.d; });
  if (seeds.size() > opt.max_seeds) seeds.resize(opt.max_seeds);
  std::vector<std::optional<BCExtremal>> results(seeds.size());
  NewtonOptions newton = opt.newton;
  newton.T_max = std::min(newton.T_max, 2.0 * horizon);
  parallel_for(seeds.size(), [&](std::size_t k) {
    const ShootOutcome o = shoot(sp, seeds[k].T, seeds[k].alpha, newton);
    if (o.status == ShootStatus::Converged) results[k] = o.extremal;
  });
  for (const auto& r : results) {
    if (!r) continue;
    bool dup = false;
    for (const auto& f : found) {
      if (std::fabs(f.T - r->T) <= opt.dedup_tol &&
          std::fabs(angle_difference(f.alpha, r->alpha)) <= opt.dedup_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) found.push_back(*r);
  }
  std::sort(found.begin(), found.end(), [](const BCExtremal& a, const BCExtremal& b) {
    if (a.T != b.T) return a.T < b.T;
    return a.alpha < b.alpha;
  });
  return found;
}

}  // namespace vortexnav
