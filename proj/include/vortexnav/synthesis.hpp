#pragma once

// Optimal synthesis under weak drift at x0: wavefronts and their
// self-intersections, splitting curves seeded from them, the cut locus
// (lowest splitting curve), cut times, spheres and balls, and the value
// function.
//
// The cut locus is identified with the lowest splitting curve under the
// working assumption that the value function is continuous and that no
// conjugate points occur; every report carries that assumption.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "homotopy.hpp"
#include "jacobi.hpp"
#include "parallel.hpp"
#include "shooting.hpp"

namespace vortexnav {

inline constexpr const char* synthesis_assumption =
    "cut locus taken as the lowest splitting curve; assumes the value function is continuous "
    "and the conjugate locus is empty (supported numerically, not proved)";

struct WavefrontSample {
  double alpha = 0.0;
  CartesianState x;
  bool alive = true;
  StopReason stop_reason = StopReason::ReachedTime;
};

struct SelfIntersection {
  CartesianState point;
  double alpha1 = 0.0;  // alpha1 < alpha2, both in [0, 2pi)
  double alpha2 = 0.0;
  double t = 0.0;
  double residual = 0.0;
};

struct Wavefront {
  double t = 0.0;
  std::vector<WavefrontSample> samples;
  // Runs [first, last] of consecutive dead samples (indices wrap around).
  std::vector<std::array<std::size_t, 2>> gaps;
  std::vector<SelfIntersection> self_intersections;

  std::vector<CartesianState> points() const {
    std::vector<CartesianState> p;
    for (const auto& s : samples)
      if (s.alive) p.push_back(s.x);
    return p;
  }
};

struct WavefrontOptions {
  bool find_self_intersections = true;
  double polish_tol = 1e-11;
  double max_chord = 0.05;     // polyline refinement for the intersection sweep
  int max_refine_depth = 8;
};

namespace detail {

// Intersection parameters of segments [p, p2] and [q, q2].
inline std::optional<std::array<double, 2>> segment_intersection(const CartesianState& p,
                                                                 const CartesianState& p2,
                                                                 const CartesianState& q,
                                                                 const CartesianState& q2) {
  const CartesianState r = p2 - p, s = q2 - q;
  const double den = r.x1 * s.x2 - r.x2 * s.x1;
  if (den == 0.0) return std::nullopt;
  const CartesianState w = q - p;
  const double a = (w.x1 * s.x2 - w.x2 * s.x1) / den;
  const double b = (w.x1 * r.x2 - w.x2 * r.x1) / den;
  if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) return std::nullopt;
  return std::array<double, 2>{a, b};
}

}  // namespace detail

// Newton on (alpha1, alpha2) at fixed t for exp(t, alpha1) = exp(t, alpha2).
inline std::optional<SelfIntersection> polish_self_intersection(const VortexProblem& problem,
                                                                double t, double a1, double a2,
                                                                double tol = 1e-11) {
  for (int it = 0; it < 40; ++it) {
    const JacobiTrajectory j1 = integrate_jacobi(problem, a1, t, {}, false);
    const JacobiTrajectory j2 = integrate_jacobi(problem, a2, t, {}, false);
    if (j1.stop_reason != StopReason::ReachedTime || j2.stop_reason != StopReason::ReachedTime)
      return std::nullopt;
    const CartesianState x1 = j1.back().z.position(), x2 = j2.back().z.position();
    const CartesianState g = x1 - x2;
    if (g.norm() <= tol) {
      SelfIntersection si;
      si.point = (x1 + x2) * 0.5;
      si.alpha1 = wrap_angle(a1);
      si.alpha2 = wrap_angle(a2);
      if (si.alpha1 > si.alpha2) std::swap(si.alpha1, si.alpha2);
      si.t = t;
      si.residual = g.norm();
      if (std::fabs(angle_difference(si.alpha1, si.alpha2)) < 1e-8) return std::nullopt;
      return si;
    }
    const CartesianState d1 = cartesian_variation(j1.back().z, j1.back().dz);
    const CartesianState d2 = cartesian_variation(j2.back().z, j2.back().dz) * -1.0;
    const double det = d1.x1 * d2.x2 - d1.x2 * d2.x1;
    if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
    double da1 = -(d2.x2 * g.x1 - d2.x1 * g.x2) / det;
    double da2 = -(-d1.x2 * g.x1 + d1.x1 * g.x2) / det;
    const double scale = std::max({1.0, std::fabs(da1) / 0.05, std::fabs(da2) / 0.05});
    a1 += da1 / scale;
    a2 += da2 / scale;
  }
  return std::nullopt;
}

inline Wavefront wavefront(const VortexProblem& problem, double t, std::size_t n,
                           const WavefrontOptions& opt = {}) {
  if (!(t >= 0.0)) throw InvalidArgument("wavefront: t must be nonnegative");
  if (n < 8) throw InvalidArgument("wavefront: need at least 8 angles");
  Wavefront wf;
  wf.t = t;
  wf.samples.resize(n);
  const std::vector<double> alphas = uniform_alpha_grid(n);
  parallel_for(n, [&](std::size_t i) {
    WavefrontSample& s = wf.samples[i];
    s.alpha = alphas[i];
    if (t == 0.0) {
      s.x = problem.x0();
      return;
    }
    const FlowEndpoint e = exponential_endpoint(problem, alphas[i], t);
    s.x = e.z.position();
    s.stop_reason = e.stop_reason;
    s.alive = e.stop_reason == StopReason::ReachedTime;
  });
  // dead runs
  std::size_t first_alive = n;
  for (std::size_t i = 0; i < n; ++i)
    if (wf.samples[i].alive) {
      first_alive = i;
      break;
    }
  if (first_alive == n) {
    wf.gaps.push_back({0, n - 1});
    return wf;
  }
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t i = (first_alive + k) % n;
    if (!wf.samples[i].alive) {
      std::size_t j = i;
      while (!wf.samples[(j + 1) % n].alive) j = (j + 1) % n;
      wf.gaps.push_back({i, j});
      const std::size_t len = (j + n - i) % n + 1;
      k += len - 1;
    }
  }
  if (!opt.find_self_intersections || t == 0.0) return wf;

  // Polyline through the alive samples, one chain per alive run, extended
  // to the alive/dead boundary and refined where the chord is long compared
  // with the local radius (the front spirals near the vortex).
  struct Node {
    double alpha;
    CartesianState x;
    bool resolved = true;  // the segment ending here met the chord limit
  };
  const double dalpha = two_pi / static_cast<double>(n);
  auto alive_at = [&](double a) -> std::optional<CartesianState> {
    const FlowEndpoint e = exponential_endpoint(problem, a, t);
    if (e.stop_reason != StopReason::ReachedTime) return std::nullopt;
    return e.z.position();
  };
  auto boundary = [&](double a_alive, double a_dead) {
    for (int k = 0; k < 40; ++k) {
      const double mid = 0.5 * (a_alive + a_dead);
      if (alive_at(mid)) a_alive = mid; else a_dead = mid;
    }
    return Node{a_alive, *alive_at(a_alive), true};
  };
  auto refine = [&](const Node& a, const Node& b, std::vector<Node>& out) {
    struct Span {
      Node a, b;
      int depth;
    };
    std::vector<Span> stack{{a, b, 0}};
    while (!stack.empty()) {
      Span sp = stack.back();
      stack.pop_back();
      const double limit = std::min(opt.max_chord, 0.5 * std::min(sp.a.x.norm(), sp.b.x.norm()));
      const bool long_chord = distance(sp.a.x, sp.b.x) > limit;
      if (sp.depth < opt.max_refine_depth && long_chord) {
        const double am = 0.5 * (sp.a.alpha + sp.b.alpha);
        if (auto xm = alive_at(am)) {
          const Node m{am, *xm, true};
          stack.push_back({m, sp.b, sp.depth + 1});
          stack.push_back({sp.a, m, sp.depth + 1});
          continue;
        }
      }
      sp.b.resolved = !long_chord;
      out.push_back(sp.b);
    }
  };
  // unresolved segments (tight spirals around the vortex) are left out of the sweep
  // chains of alive samples as (first index, length), alpha unwrapped
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  if (wf.gaps.empty()) {
    runs.push_back({0, n + 1});  // closed: repeats sample 0 at alpha + 2pi
  } else {
    for (const auto& g : wf.gaps) {
      const std::size_t start = (g[1] + 1) % n;
      std::size_t len = 0;
      while (len < n && wf.samples[(start + len) % n].alive) ++len;
      if (len > 0) runs.push_back({start, len});
    }
  }
  std::vector<std::vector<Node>> chains(runs.size());
  parallel_for(runs.size(), [&](std::size_t c) {
    const auto [start, len] = runs[c];
    const bool closed = wf.gaps.empty();
    std::vector<Node> base;
    if (!closed) base.push_back(boundary(alphas[start], alphas[start] - dalpha));
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t i = (start + k) % n;
      base.push_back({alphas[start] + static_cast<double>(k) * dalpha, wf.samples[i].x, true});
    }
    if (!closed) {
      const double last = base.back().alpha;
      base.push_back(boundary(last, last + dalpha));
    }
    std::vector<Node>& out = chains[c];
    out.push_back(base.front());
    for (std::size_t k = 0; k + 1 < base.size(); ++k) refine(base[k], base[k + 1], out);
  });
  struct Segment {
    Node a, b;
    std::size_t chain, index;
  };
  std::vector<Segment> segs;
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (std::size_t k = 0; k + 1 < chains[c].size(); ++k)
      if (chains[c][k + 1].resolved) segs.push_back({chains[c][k], chains[c][k + 1], c, k});
  struct Candidate {
    double a1, a2;
  };
  std::vector<Candidate> cand;
  for (std::size_t u = 0; u < segs.size(); ++u) {
    const Segment& P = segs[u];
    const double pxmin = std::min(P.a.x.x1, P.b.x.x1), pxmax = std::max(P.a.x.x1, P.b.x.x1);
    const double pymin = std::min(P.a.x.x2, P.b.x.x2), pymax = std::max(P.a.x.x2, P.b.x.x2);
    for (std::size_t v = u + 1; v < segs.size(); ++v) {
      const Segment& Q = segs[v];
      if (Q.chain == P.chain && Q.index == P.index + 1) continue;
      if (wf.gaps.empty() && P.index == 0 && Q.index + 2 == chains[Q.chain].size()) continue;
      if (std::max(Q.a.x.x1, Q.b.x.x1) < pxmin || std::min(Q.a.x.x1, Q.b.x.x1) > pxmax ||
          std::max(Q.a.x.x2, Q.b.x.x2) < pymin || std::min(Q.a.x.x2, Q.b.x.x2) > pymax)
        continue;
      if (auto ab = detail::segment_intersection(P.a.x, P.b.x, Q.a.x, Q.b.x))
        cand.push_back({P.a.alpha + (*ab)[0] * (P.b.alpha - P.a.alpha),
                        Q.a.alpha + (*ab)[1] * (Q.b.alpha - Q.a.alpha)});
    }
  }
  std::vector<std::optional<SelfIntersection>> polished(cand.size());
  parallel_for(cand.size(), [&](std::size_t k) {
    polished[k] = polish_self_intersection(problem, t, cand[k].a1, cand[k].a2, opt.polish_tol);
  });
  for (const auto& si : polished) {
    if (!si) continue;
    bool dup = false;
    for (const auto& o : wf.self_intersections)
      if (std::fabs(angle_difference(o.alpha1, si->alpha1)) < 1e-7 &&
          std::fabs(angle_difference(o.alpha2, si->alpha2)) < 1e-7)
        dup = true;
    if (!dup) wf.self_intersections.push_back(*si);
  }
  std::sort(wf.self_intersections.begin(), wf.self_intersections.end(),
            [](const SelfIntersection& a, const SelfIntersection& b) {
              return a.alpha1 != b.alpha1 ? a.alpha1 < b.alpha1 : a.alpha2 < b.alpha2;
            });
  return wf;
}

// ---------------------------------------------------------------------------
// Cut locus

struct CutLocusOptions {
  double seed_time = 3.5;
  std::size_t n_angles = 1000;
  SplittingOptions splitting;
};

inline void require_weak_drift(const VortexProblem& problem) {
  if (problem.strength() != DriftStrength::Weak)
    throw PreconditionRefused(std::string("synthesis needs weak drift at x0 (|mu| < |x0|), got ") +
                              to_string(problem.strength()) +
                              " drift; exceptional geodesics may break the cut-locus construction");
}

// Every splitting curve seeded by a self-intersection of the wavefront at
// seed_time, labelled 1, 2, ... by increasing minimum time.
inline std::vector<SplittingCurve> splitting_curves(const VortexProblem& problem,
                                                    const CutLocusOptions& opt = {}) {
  const Wavefront wf = wavefront(problem, opt.seed_time, opt.n_angles);
  std::vector<std::optional<SplittingCurve>> curves(wf.self_intersections.size());
  parallel_for(curves.size(), [&](std::size_t k) {
    const SelfIntersection& si = wf.self_intersections[k];
    curves[k] = splitting_curve(problem, {si.t, si.alpha1, si.point, si.alpha2},
                                static_cast<int>(k + 1), opt.splitting);
  });
  std::vector<SplittingCurve> out;
  std::vector<double> mins;
  for (auto& c : curves) {
    if (!c || c->size() < 2) continue;
    // two seeds on one curve give the same minimum point
    const SplitPoint cm = c->point(c->argmin_t());
    bool dup = false;
    for (const auto& o : out) {
      const SplitPoint om = o.point(o.argmin_t());
      if (std::fabs(om.t - cm.t) < 1e-6 && distance(om.x, cm.x) < 1e-4) dup = true;
    }
    if (dup) continue;
    mins.push_back(c->min_t());
    out.push_back(std::move(*c));
  }
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mins[a] < mins[b]; });
  std::vector<SplittingCurve> sorted;
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted.push_back(std::move(out[order[k]]));
    sorted.back().set_label(static_cast<int>(k + 1));
  }
  return sorted;
}

inline SplittingCurve cut_locus(const VortexProblem& problem, const CutLocusOptions& opt = {}) {
  require_weak_drift(problem);
  std::vector<SplittingCurve> curves = splitting_curves(problem, opt);
  if (curves.empty()) throw NumericFailure("cut_locus: no splitting curve could be continued");
  return std::move(curves.front());
}

// t_cut as a function of the initial angle, from the two families of
// geodesics meeting on the cut curve.
class CutTimeMap {
 public:
  struct Branch {
    std::vector<double> alpha;  // strictly monotone, unwrapped
    std::vector<double> t;
  };

  CutTimeMap() = default;

  explicit CutTimeMap(const SplittingCurve& cut) {
    std::vector<double> a1, a2, t;
    for (std::size_t i = 0; i < cut.size(); ++i) {
      a1.push_back(cut.alpha1(i));
      a2.push_back(cut.alpha2(i));
      t.push_back(cut.t(i));
    }
    add_monotone_pieces(a1, t);
    add_monotone_pieces(a2, t);
  }

  const std::vector<Branch>& branches() const { return branches_; }

  // +infinity outside the coverage of the curve.
  double operator()(double alpha) const {
    double best = infinity;
    for (const Branch& b : branches_) {
      const bool inc = b.alpha.back() > b.alpha.front();
      const double lo = inc ? b.alpha.front() : b.alpha.back();
      const double hi = inc ? b.alpha.back() : b.alpha.front();
      double a = alpha;
      a += two_pi * std::floor((lo - a) / two_pi);
      if (a < lo) a += two_pi;
      if (a > hi) continue;
      std::size_t k = 0;
      while (k + 2 < b.alpha.size() && ((b.alpha[k + 1] < a) == inc) && b.alpha[k + 1] != a) ++k;
      const double w = (a - b.alpha[k]) / (b.alpha[k + 1] - b.alpha[k]);
      best = std::min(best, b.t[k] + w * (b.t[k + 1] - b.t[k]));
    }
    return best;
  }

 private:
  void add_monotone_pieces(const std::vector<double>& a, const std::vector<double>& t) {
    std::size_t start = 0;
    while (start + 1 < a.size()) {
      std::size_t end = start + 1;
      const bool inc = a[end] > a[start];
      while (end + 1 < a.size() && (a[end + 1] > a[end]) == inc && a[end + 1] != a[end]) ++end;
      Branch b;
      b.alpha.assign(a.begin() + start, a.begin() + end + 1);
      b.t.assign(t.begin() + start, t.begin() + end + 1);
      if (b.alpha.size() >= 2 && b.alpha.front() != b.alpha.back()) branches_.push_back(std::move(b));
      start = end;
    }
  }

  std::vector<Branch> branches_;
};

// ---------------------------------------------------------------------------
// Spheres and balls

enum class BallType { A, B, C, Unknown };

inline const char* to_string(BallType b) {
  switch (b) {
    case BallType::A: return "A";
    case BallType::B: return "B";
    case BallType::C: return "C";
    case BallType::Unknown: return "unknown";
  }
  return "?";
}

struct SphereArc {
  double alpha_begin = 0.0;  // unwrapped, alpha_end > alpha_begin
  double alpha_end = 0.0;
  std::vector<double> alpha;
  std::vector<CartesianState> points;
  bool closed = false;  // both ends meet at one splitting point
};

struct SphereSnapshot {
  double t = 0.0;
  BallType type = BallType::Unknown;
  std::vector<SphereArc> arcs;
  std::vector<CartesianState> singular_points;  // points of the cut curve at level t
  // removed alpha intervals, [begin, end] unwrapped
  std::vector<std::array<double, 2>> cut_intervals;
  std::vector<std::array<double, 2>> dead_intervals;
};

struct SphereOptions {
  std::size_t n_angles = 720;      // density of arc sampling over the full circle
  double r_dead = 0.005;           // geodesics inside this radius count as absorbed
  double type_tol = 1e-3;          // Unknown within this distance of t_inj or t_vor
  double close_tol = 1e-6;
  std::optional<double> t_inj;     // from the cut curve when not given
};

namespace detail {

// Time at which the geodesic of angle alpha first reaches r_dead, or
// +infinity if it does not before horizon.
inline double absorption_time(const VortexProblem& problem, double alpha, double horizon,
                              double r_dead) {
  Tolerances tol = problem.tol();
  tol.r_min = std::max(tol.r_min, r_dead);
  const VortexProblem p = problem.with_tolerances(tol);
  const FlowEndpoint e = exponential_endpoint(p, alpha, horizon);
  return e.stop_reason == StopReason::HitInnerRadius ? e.t : infinity;
}

struct Interval {
  double lo, hi;  // lo in [0, 2pi), hi > lo, hi - lo <= 2pi
};

// Union of intervals on the circle, returned with lo in [0, 2pi).
inline std::vector<Interval> circle_union(std::vector<Interval> v) {
  std::vector<Interval> flat;
  for (Interval iv : v) {
    const double len = iv.hi - iv.lo;
    if (len >= two_pi) return {{0.0, two_pi}};
    const double lo = wrap_angle(iv.lo);
    const double hi = lo + len;
    if (hi > two_pi) {
      flat.push_back({lo, two_pi});
      flat.push_back({0.0, hi - two_pi});
    } else {
      flat.push_back({lo, hi});
    }
  }
  std::sort(flat.begin(), flat.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& iv : flat) {
    if (!merged.empty() && iv.lo <= merged.back().hi)
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    else
      merged.push_back(iv);
  }
  // join across 0
  if (merged.size() >= 2 && merged.front().lo <= 0.0 && merged.back().hi >= two_pi) {
    merged.front().lo = merged.back().lo - two_pi;
    merged.pop_back();
    merged.front().lo += two_pi;
    merged.front().hi += two_pi;
    std::rotate(merged.begin(), merged.end() - 1, merged.end());
  }
  return merged;
}

}  // namespace detail

// Points of the cut curve at level t, refined on the curve.
inline std::vector<std::pair<std::size_t, SplitPoint>> cut_level_crossings(const SplittingCurve& cut,
                                                                           double level) {
  std::vector<std::pair<std::size_t, SplitPoint>> out;
  for (std::size_t i = 0; i + 1 < cut.size(); ++i) {
    const double fa = cut.t(i) - level, fb = cut.t(i + 1) - level;
    if (fa == 0.0) {
      out.push_back({i, cut.point(i)});
      continue;
    }
    if (std::signbit(fa) == std::signbit(fb) || fb == 0.0) continue;
    double la = cut.alpha2(i), lb = cut.alpha2(i + 1);
    double ga = fa, gb = fb;
    std::optional<SplitPoint> p;
    for (int it = 0; it < 80; ++it) {
      // regula falsi with bisection safeguard
      double lm = la - ga * (lb - la) / (gb - ga);
      if (!(std::min(la, lb) < lm && lm < std::max(la, lb)) || it % 3 == 2) lm = 0.5 * (la + lb);
      p = cut.point_at(i, lm);
      if (!p) break;
      const double gm = p->t - level;
      if (std::fabs(gm) < 1e-12 || std::fabs(lb - la) < 1e-14) break;
      if (std::signbit(gm) == std::signbit(ga)) {
        la = lm;
        ga = gm;
      } else {
        lb = lm;
        gb = gm;
      }
    }
    if (p) out.push_back({i, *p});
  }
  return out;
}

inline SphereSnapshot sphere_and_ball(const VortexProblem& problem, double t,
                                      const SplittingCurve& cut, const SphereOptions& opt = {}) {
  require_weak_drift(problem);
  SphereSnapshot snap;
  snap.t = t;
  const double t_inj = opt.t_inj ? *opt.t_inj : cut.min_t();
  const double t_vor = problem.r0();

  // alpha intervals cut before t, one pair per run of the curve below t
  std::vector<detail::Interval> removed;
  const auto crossings = cut_level_crossings(cut, t);
  {
    std::vector<SplitPoint> bounds;  // alternating run start / end
    const bool start_below = cut.size() > 0 && cut.t(0) < t;
    if (start_below) bounds.push_back(cut.point(0));
    for (const auto& c : crossings) {
      bounds.push_back(c.second);
      snap.singular_points.push_back(c.second.x);
    }
    if (bounds.size() % 2 == 1) bounds.push_back(cut.point(cut.size() - 1));
    for (std::size_t k = 0; k + 1 < bounds.size(); k += 2) {
      const SplitPoint& a = bounds[k];
      const SplitPoint& b = bounds[k + 1];
      for (auto [lo, hi] : {std::pair{a.alpha1, b.alpha1}, std::pair{a.alpha2, b.alpha2}}) {
        if (lo > hi) std::swap(lo, hi);
        removed.push_back({lo, hi});
        snap.cut_intervals.push_back({lo, hi});
      }
    }
  }

  // angles absorbed by the vortex before t
  const std::size_t n = std::max<std::size_t>(opt.n_angles, 64);
  const std::vector<double> grid = uniform_alpha_grid(n);
  std::vector<double> t_abs(n);
  parallel_for(n, [&](std::size_t i) {
    t_abs[i] = detail::absorption_time(problem, grid[i], t, opt.r_dead);
  });
  auto refine = [&](double a_in, double a_out) {
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (a_in + a_out);
      if (detail::absorption_time(problem, mid, t, opt.r_dead) < t) a_in = mid; else a_out = mid;
    }
    return 0.5 * (a_in + a_out);
  };
  {
    std::vector<detail::Interval> dead;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      const bool di = t_abs[i] < t, dj = t_abs[j] < t;
      if (!di && dj) {
        // run starts in (grid[i], grid[j])
        const double start = refine(grid[i] + two_pi / n, grid[i]);
        std::size_t k = j;
        std::size_t len = 0;
        while (t_abs[(k + 1) % n] < t && len < n) {
          k = (k + 1) % n;
          ++len;
        }
        const double end_grid = grid[k] + (k < j ? two_pi : 0.0);
        const double end = refine(end_grid, end_grid + two_pi / n);
        double s = start, e = end;
        if (e < s) e += two_pi;
        dead.push_back({s, e});
      }
    }
    bool all_dead = true;
    for (double v : t_abs) all_dead = all_dead && v < t;
    if (all_dead) dead.push_back({0.0, two_pi});
    for (const auto& d : dead) {
      removed.push_back(d);
      snap.dead_intervals.push_back({d.lo, d.hi});
    }
  }

  const std::vector<detail::Interval> merged = detail::circle_union(removed);
  // complement arcs
  std::vector<std::array<double, 2>> keep;
  if (merged.empty()) {
    keep.push_back({0.0, two_pi});
  } else if (!(merged.size() == 1 && merged[0].hi - merged[0].lo >= two_pi)) {
    for (std::size_t k = 0; k < merged.size(); ++k) {
      const double lo = merged[k].hi;
      double hi = k + 1 < merged.size() ? merged[k + 1].lo : merged[0].lo + two_pi;
      if (hi > lo) keep.push_back({lo, hi});
    }
  }
  for (const auto& arc : keep) {
    SphereArc sa;
    sa.alpha_begin = arc[0];
    sa.alpha_end = arc[1];
    const std::size_t m = std::max<std::size_t>(
        8, static_cast<std::size_t>(std::ceil(static_cast<double>(n) * (arc[1] - arc[0]) / two_pi)));
    sa.alpha.resize(m + 1);
    sa.points.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k)
      sa.alpha[k] = arc[0] + (arc[1] - arc[0]) * static_cast<double>(k) / static_cast<double>(m);
    std::vector<char> ok(m + 1, 1);
    parallel_for(m + 1, [&](std::size_t k) {
      const FlowEndpoint e = exponential_endpoint(problem, sa.alpha[k], t);
      sa.points[k] = e.z.position();
      ok[k] = e.stop_reason == StopReason::ReachedTime;
    });
    const bool full = merged.empty();
    sa.closed = full || (ok.front() && ok.back() &&
                         distance(sa.points.front(), sa.points.back()) <= opt.close_tol);
    snap.arcs.push_back(std::move(sa));
  }

  const bool no_dead = snap.dead_intervals.empty();
  std::size_t closed = 0;
  for (const auto& a : snap.arcs) closed += a.closed;
  if (std::fabs(t - t_inj) < opt.type_tol || std::fabs(t - t_vor) < opt.type_tol) {
    snap.type = BallType::Unknown;
  } else if (merged.empty()) {
    snap.type = BallType::A;
  } else if (no_dead && snap.arcs.size() == 2 && closed == 2) {
    snap.type = BallType::B;
  } else if (!no_dead && closed == 1) {
    snap.type = BallType::C;
  } else {
    snap.type = BallType::Unknown;
  }
  return snap;
}

// ---------------------------------------------------------------------------
// Value function

struct ValueResult {
  double V = 0.0;
  BCExtremal optimal;
  std::size_t candidates = 0;
};

struct ValueOptions {
  std::size_t n_starts = 64;
  SolveAllOptions solve;
  double cut_slack = 1e-9;
};

// Minimal transfer time to xf; candidates beyond their cut time are
// discarded when a cut map is given.
inline std::optional<ValueResult> value(const VortexProblem& problem, const CartesianState& xf,
                                        const CutTimeMap* cut = nullptr,
                                        const ValueOptions& opt = {}) {
  const ShootingProblem sp(problem, xf);
  const std::vector<BCExtremal> all = solve_all(sp, opt.n_starts, opt.solve);
  for (const BCExtremal& bc : all) {
    if (cut && bc.T > 0.0 && bc.T > (*cut)(bc.alpha) + opt.cut_slack) continue;
    return ValueResult{bc.T, bc, all.size()};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

struct SynthesisReport {
  double t_inj = 0.0;
  double t_vor = 0.0;
  std::optional<SplitPoint> injectivity_point;
  SplittingCurve cut_curve;
  CutTimeMap cut_time;
  std::vector<SphereSnapshot> snapshots;
  std::string assumption = synthesis_assumption;
};

// Report for an already computed cut curve.
inline SynthesisReport synthesis_report(const VortexProblem& problem, const SplittingCurve& cut,
                                        const std::vector<double>& times, SphereOptions sopt = {}) {
  require_weak_drift(problem);
  const auto pmin = cut.refined_min();
  SynthesisReport rep{pmin ? pmin->t : cut.sample_min_t(), problem.r0(), pmin, cut, CutTimeMap(cut), {}};
  sopt.t_inj = rep.t_inj;
  for (double t : times) rep.snapshots.push_back(sphere_and_ball(problem, t, rep.cut_curve, sopt));
  return rep;
}

inline SynthesisReport synthesize(const VortexProblem& problem, const std::vector<double>& times,
                                  const CutLocusOptions& copt = {}, SphereOptions sopt = {}) {
  require_weak_drift(problem);
  return synthesis_report(problem, cut_locus(problem, copt), times, sopt);
}

}  // namespace vortexnav
