// Acceptance suite: one PASS/FAIL line per criterion, followed by the
// measured quantities. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vortexnav/vortexnav.hpp"

using namespace vortexnav;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "  ok   " : "  FAIL ") + what);
  }
  void info(const std::string& what) { notes.push_back("  info " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(int id, const char* title, const Verdict& v) {
  std::printf("%s criterion %d: %s\n", v.pass ? "PASS" : "FAIL", id, title);
  for (const auto& n : v.notes) std::printf("%s\n", n.c_str());
  std::fflush(stdout);
  failures += !v.pass;
}

double value_of(const VortexProblem& p, const CartesianState& xf) {
  const auto all = solve_all(ShootingProblem(p, xf), 64);
  return all.empty() ? infinity : all.front().T;
}

// ---------------------------------------------------------------------------

void shooting_regression() {
  Verdict v;
  const auto t0 = Clock::now();
  struct Case {
    double mu;
    CartesianState xf;
    double T, tol;
  };
  const Case cases[] = {{4.0, {-2.0, 0.0}, 1.641, 0.005},
                        {4.0, {2.5, 0.0}, 2.821, 0.005},
                        {1.0, {-2.0, 0.0}, 2.826, 0.005},
                        {1.0, {2.5, 0.0}, 0.56, 0.01}};
  int k = 1;
  for (const Case& c : cases) {
    const double T = value_of(VortexProblem(c.mu, {2.0, 0.0}), c.xf);
    v.check(std::fabs(T - c.T) <= c.tol,
            fmt("example %d: T = %.6f, expected %.3f +- %.3f", k++, T, c.T, c.tol));
  }
  const double el = seconds_since(t0);
  v.check(el < 5.0, fmt("runtime %.2f s < 5 s", el));
  report(1, "shooting regression", v);
}

// Splitting curves for x0 = (3, 0), mu = 1.8, shared by criteria 2 and 8.
struct Synthesis {
  VortexProblem problem{1.8, {3.0, 0.0}};
  std::vector<SplittingCurve> curves;
  double seconds = 0.0;
};

void injectivity_radius(Synthesis& s) {
  Verdict v;
  const auto t0 = Clock::now();
  s.curves = splitting_curves(s.problem, CutLocusOptions{});
  s.seconds = seconds_since(t0);
  v.check(!s.curves.empty(), fmt("%zu splitting curves continued", s.curves.size()));
  if (!s.curves.empty()) {
    for (const auto& c : s.curves)
      v.info(fmt("Sigma%d: min t = %.6f, %zu samples, ends %s / %s", c.label(), c.min_t(), c.size(),
                 to_string(c.ends[0]), to_string(c.ends[1])));
    const double t_inj = s.curves.front().min_t();
    v.check(std::fabs(t_inj - 2.889) <= 0.01, fmt("t_inj = min t of Sigma1 = %.6f, expected 2.889 +- 0.01", t_inj));
  }
  v.check(s.seconds < 120.0, fmt("continuation runtime %.1f s < 120 s", s.seconds));

  // time to the vortex: no geodesic is faster than the radial plunge, whose
  // radial speed is exactly one
  Tolerances tol = s.problem.tol();
  tol.r_min = 1e-7;
  const VortexProblem p = s.problem.with_tolerances(tol);
  double t_hit = infinity;
  for (double a : uniform_alpha_grid(720)) {
    const FlowEndpoint e = exponential_endpoint(p, a, 4.0);
    if (e.stop_reason == StopReason::HitInnerRadius) t_hit = std::min(t_hit, e.t + tol.r_min);
  }
  v.check(std::fabs(t_hit - 3.0) <= 1e-6, fmt("t_vor from integration = %.9f, expected 3 +- 1e-6", t_hit));
  if (!s.curves.empty()) {
    const SynthesisReport rep = synthesis_report(s.problem, s.curves.front(), {});
    v.check(std::fabs(rep.t_vor - 3.0) <= 1e-6, fmt("reported t_vor = %.9f", rep.t_vor));
    v.check(rep.t_inj < rep.t_vor, fmt("reported t_inj = %.6f < t_vor", rep.t_inj));
  }
  report(2, "injectivity radius and time to the vortex", v);
}

void conjugate_locus() {
  Verdict v;
  const auto t0 = Clock::now();
  struct Instance {
    double mu, r0;
    const char* name;
  };
  for (const Instance& in : {Instance{2.0, 8.0 / 3.0, "weak"}, Instance{2.0, 1.0, "strong"}}) {
    const VortexProblem p(in.mu, {in.r0, 0.0});
    const ConjugateScan scan = conjugate_scan(p, 1000, 50.0);
    v.check(scan.conjugate_count() == 0,
            fmt("%s (mu=%g, r0=%g): %zu conjugate times over 1000 geodesics", in.name, in.mu, in.r0,
                scan.conjugate_count()));
    v.check(scan.failure_count() == 0, fmt("%s: %zu integration failures", in.name, scan.failure_count()));
    double worst_inf = 0.0, worst_vortex = 0.0;
    std::size_t n_inf = 0, n_vortex = 0;
    for (const auto& r : scan.results) {
      const Fate f = fate(r.alpha, in.r0, in.mu);
      if (f == Fate::ToInfinity) {
        ++n_inf;
        worst_inf = std::max(worst_inf, std::fabs(r.final_sigma - 1.0));
      } else if (f == Fate::ToVortex) {
        ++n_vortex;
        worst_vortex = std::max(worst_vortex, r.final_sigma);
      }
    }
    v.check(worst_inf <= 0.05, fmt("%s: escaping geodesics (%zu): max |sigma - 1| = %.4f <= 0.05", in.name, n_inf, worst_inf));
    v.check(worst_vortex < 1e-3, fmt("%s: vortex-bound geodesics (%zu): max sigma at stop radius = %.2e < 1e-3", in.name, n_vortex, worst_vortex));
    const CriticalAngles ca = critical_angles(in.r0, in.mu);
    for (double a : {ca.alpha1, ca.alpha2}) {
      if (fate(a, in.r0, in.mu) != Fate::Separatrix) continue;
      const ConjugateTestResult r = conjugate_test(p, a, 50.0);
      v.check(!r.first_conjugate_time && std::fabs(r.final_sigma - 0.5) <= 0.05,
              fmt("%s: separatrix alpha = %.6f: sigma = %.6f, expected 0.5 +- 0.05", in.name, wrap_angle(a), r.final_sigma));
    }
  }
  const double el = seconds_since(t0);
  v.check(el < 300.0, fmt("runtime %.1f s < 300 s", el));
  report(3, "conjugate locus is empty; sigma_min plateaus", v);
}

void conservation() {
  Verdict v;
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double dH = 0.0, dH_raw = 0.0, dP = 0.0, dL = 0.0, dL_raw = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double mu = (2.0 * U(rng) - 1.0) * 3.0;
    const double r0 = 0.5 + 4.5 * U(rng), th = two_pi * U(rng), a = two_pi * U(rng);
    const VortexProblem p(mu, {r0 * std::cos(th), r0 * std::sin(th)});
    const Trajectory tr = exponential(p, a, 20.0);
    const double H0 = initial_hamiltonian(a, r0, mu);
    const double pt0 = tr.samples.front().z.p_theta;
    for (const auto& s : tr.samples) {
      const double h = std::fabs(hamiltonian(s.z, mu) - H0);
      // the terms of H grow like 1 / r^2 near the vortex
      const double scale = std::fabs(mu * s.z.p_theta) / (s.z.r * s.z.r) + s.z.costate_norm();
      dH = std::max(dH, h / scale);
      dH_raw = std::max(dH_raw, h / std::max(1.0, std::fabs(H0)));
      dP = std::max(dP, std::fabs(s.z.p_theta - pt0));
      const double l = std::fabs(s.z.p_r * s.z.p_r - phi(s.z.r, pt0, r0, mu));
      dL = std::max(dL, l / std::max(1.0, phi_scale(s.z.r, pt0, r0, mu)));
      dL_raw = std::max(dL_raw, l);
    }
  }
  v.check(dH <= 1e-9, fmt("relative H drift %.2e <= 1e-9 (relative to |mu p_theta| / r^2 + |p|)", dH));
  v.info(fmt("H drift relative to max(1, |H0|): %.2e (largest only at r < 0.1)", dH_raw));
  v.check(dP == 0.0, fmt("p_theta drift %.2e", dP));
  v.check(dL <= 1e-8, fmt("|p_r^2 - phi(r)| %.2e <= 1e-8 (relative to the size of the terms of phi)", dL));
  v.info(fmt("|p_r^2 - phi(r)| absolute: %.2e", dL_raw));
  report(4, "conservation along 200 random geodesics", v);
}

void classification_oracle() {
  Verdict v;
  const auto t0 = Clock::now();
  for (double mu : {2.0, -2.0}) {
    for (double r0 : {5.0, 8.0 / 3.0, 2.0, 1.0, 0.5}) {
      const VortexProblem p(mu, {r0, 0.0});
      std::size_t checked = 0, agree = 0, boundary = 0;
      for (double a : uniform_alpha_grid(500)) {
        const GeodesicClassification c = classify(a, r0, mu);
        if (c.near_boundary) {
          ++boundary;
          continue;
        }
        const FlowEndpoint e = exponential_endpoint(p, a, 2000.0);
        const bool ok =
            (c.fate == Fate::ToVortex && e.stop_reason == StopReason::HitInnerRadius) ||
            (c.fate == Fate::ToInfinity && e.stop_reason == StopReason::HitOuterRadius) ||
            ((c.fate == Fate::Separatrix || c.fate == Fate::ReebCircle) && e.stop_reason == StopReason::ReachedTime);
        ++checked;
        agree += ok;
      }
      v.check(agree == checked, fmt("mu=%+g r0=%.4g (%s): %zu/%zu agree, %zu on the boundary", mu, r0,
                                    to_string(p.strength()), agree, checked, boundary));
    }
  }
  v.info(fmt("runtime %.2f s", seconds_since(t0)));
  report(5, "classification agrees with integration", v);
}

void closed_forms() {
  Verdict v;
  // exceptional geodesics, over the whole domain of the closed form
  double err_ab = 0.0;
  for (double mu : {2.0, -2.0}) {
    for (double r0 : {0.5, 1.0, 1.9}) {
      const VortexProblem p(mu, {r0, 0.0});
      const AbnormalAngles ab = abnormal_angles(r0, mu);
      for (int k = 0; k < ab.count; ++k) {
        const double a = ab.alpha[k];
        const AbnormalDomain dom = abnormal_time_domain(r0, a);
        const Trajectory tr = exponential(p, a, std::min(dom.t_hi, 200.0));
        for (const auto& s : tr.samples)
          if (dom.contains(s.t)) err_ab = std::max(err_ab, std::fabs(s.z.r - abnormal_radius(s.t, r0, a)));
      }
    }
  }
  v.check(err_ab <= 1e-7, fmt("exceptional radius: max error %.2e <= 1e-7", err_ab));

  // separatrix: the reduced system integrated over the whole domain, in
  // u = 2|mu| - r with a relative tolerance so that u keeps its digits as
  // the geodesic approaches the limit circle (theta is carried with an
  // offset to stay away from zero)
  double err_t = 0.0, err_th = 0.0, err_F = 0.0;
  std::size_t observed = 0, incomplete = 0;
  ode::Settings st;
  st.atol = 1e-30;
  const double th_off = 100.0;
  for (double mu : {2.0, -2.0}) {
    const double m2 = 2.0 * std::fabs(mu);
    for (double r0 : {0.05, 0.5, 1.0, 8.0 / 3.0, 3.5}) {
      auto f = [mu, m2](double, const ode::Vec<2>& y, ode::Vec<2>& dy) {
        const SeparatrixRate s = separatrix_rhs(m2 - y[0], mu);
        dy = {-s.r_dot, s.theta_dot};
      };
      const double F0 = reeb_F(r0, 0.0, mu);
      const auto sol = ode::integrate<2>(f, 0.0, {m2 - r0, th_off}, 60.0, st, {}, ode::NoEvent{},
                                         [&](double t, const ode::Vec<2>& y) {
                                           if (t == 0.0) return;
                                           ++observed;
                                           const double r = m2 - y[0], th = y[1] - th_off;
                                           err_t = std::max(err_t, std::fabs(separatrix_radius(t, r0, mu) - r));
                                           err_th = std::max(err_th, std::fabs(separatrix_theta(r, r0, mu) - th));
                                           err_F = std::max(err_F, std::fabs(reeb_F(r, th, mu) / F0 - 1.0));
                                         });
      incomplete += sol.status != ode::Status::Completed;
    }
  }
  v.check(incomplete == 0 && observed > 100,
          fmt("reduced separatrix flow: 10 integrations to t = 60, %zu incomplete, %zu samples", incomplete, observed));
  v.check(err_t <= 1e-7, fmt("separatrix r(t), reduced flow to t = 60: max error %.2e <= 1e-7", err_t));
  v.check(err_th <= 1e-7, fmt("separatrix theta(r), reduced flow: max error %.2e <= 1e-7", err_th));
  v.check(err_F <= 1e-6, fmt("F along reduced separatrices: max relative change %.2e <= 1e-6", err_F));

  // separatrix: the full extremal flow from the critical direction, on
  // r <= 0.95 * 2|mu| (the limit circle is unstable in the full phase space)
  double full_r = 0.0, full_th = 0.0, full_F = 0.0;
  for (double mu : {2.0, -2.0}) {
    const double rmax = 0.95 * 2.0 * std::fabs(mu);
    for (double r0 : {0.5, 1.0, 8.0 / 3.0, 3.5}) {
      const VortexProblem p(mu, {r0, 0.0});
      const CriticalAngles ca = critical_angles(r0, mu);
      for (double a : {ca.alpha1, ca.alpha2}) {
        if (fate(a, r0, mu) != Fate::Separatrix) continue;
        const Trajectory tr = exponential(p, a, 60.0);
        const double F0 = reeb_F(r0, 0.0, mu);
        for (const auto& s : tr.samples) {
          if (s.t == 0.0) continue;
          const double rc = separatrix_radius(s.t, r0, mu);
          if (rc > rmax || s.z.r > rmax) break;
          full_r = std::max(full_r, std::fabs(s.z.r - rc));
          full_th = std::max(full_th, std::fabs(s.z.theta - separatrix_theta(s.z.r, r0, mu)));
          full_F = std::max(full_F, std::fabs(reeb_F(s.z.r, s.z.theta, mu) / F0 - 1.0));
        }
      }
    }
  }
  v.check(full_r <= 1e-7, fmt("separatrix r(t), full flow on r <= 0.95*2|mu|: max error %.2e <= 1e-7", full_r));
  v.check(full_th <= 1e-7, fmt("separatrix theta(r), full flow: max error %.2e <= 1e-7", full_th));
  v.check(full_F <= 1e-6, fmt("F along full-flow separatrices: max relative change %.2e <= 1e-6", full_F));
  report(6, "closed forms match integration", v);
}

void symmetries() {
  Verdict v;
  // rotation
  {
    const VortexProblem p(4.0, {2.0, 0.0});
    const CartesianState xf{-2.0, 0.0};
    const double T0 = value_of(p, xf);
    double worst = 0.0;
    for (double d : {0.3, 1.0, 2.5, -1.7, 4.0}) {
      const double T = value_of(p.with_x0(rotate(p.x0(), d)), rotate(xf, d));
      worst = std::max(worst, std::fabs(T - T0));
    }
    v.check(worst <= 1e-9, fmt("rotation: max |T(R x0, R xf) - T| = %.2e <= 1e-9", worst));
  }
  // scaling: V(lambda x0, lambda xf, lambda mu) = lambda V(x0, xf, mu)
  {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    int missing = 0;
    for (int k = 0; k < 50; ++k) {
      const double mu = (2.0 * U(rng) - 1.0) * 2.0;
      const double r0 = 1.0 + 3.0 * U(rng), rf = 1.0 + 3.0 * U(rng);
      const double t0 = two_pi * U(rng), tf = two_pi * U(rng);
      const double lam = 0.5 + 2.5 * U(rng);
      const CartesianState x0{r0 * std::cos(t0), r0 * std::sin(t0)}, xf{rf * std::cos(tf), rf * std::sin(tf)};
      const double V = value_of(VortexProblem(mu, x0), xf);
      const double Vl = value_of(VortexProblem(lam * mu, x0 * lam), xf * lam);
      if (!std::isfinite(V) || !std::isfinite(Vl)) {
        ++missing;
        continue;
      }
      worst = std::max(worst, std::fabs(Vl - lam * V) / (lam * V));
    }
    v.check(missing == 0 && worst <= 1e-8,
            fmt("scaling on 50 random instances: max relative error %.2e <= 1e-8, %d unsolved", worst, missing));
  }
  // reflection across the x-axis maps geodesics of (mu, alpha) to those of
  // (-mu, -alpha)
  {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const double mu = (2.0 * U(rng) - 1.0) * 3.0;
      const double r0 = 0.5 + 4.5 * U(rng), th = two_pi * U(rng), a = two_pi * U(rng);
      const CartesianState x0{r0 * std::cos(th), r0 * std::sin(th)};
      FlowOptions opt;
      opt.record_steps = false;
      for (int j = 1; j <= 20; ++j) opt.output_times.push_back(0.25 * j);
      const Trajectory g = exponential(VortexProblem(mu, x0), a, 5.0, opt);
      const Trajectory h = exponential(VortexProblem(-mu, {x0.x1, -x0.x2}), -a, 5.0, opt);
      const std::size_t n = std::min(g.samples.size(), h.samples.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (g.samples[i].t != h.samples[i].t) break;
        const CartesianState p = g.samples[i].z.position(), q = h.samples[i].z.position();
        worst = std::max(worst, std::hypot(p.x1 - q.x1, p.x2 + q.x2));
      }
    }
    v.check(worst <= 1e-8, fmt("reflection of 50 random geodesics: max deviation %.2e <= 1e-8", worst));
  }
  report(7, "symmetries", v);
}

void ball_milestones(const Synthesis& s) {
  Verdict v;
  if (s.curves.empty()) {
    v.check(false, "no cut curve available");
    report(8, "ball topology milestones", v);
    return;
  }
  const SplittingCurve& cut = s.curves.front();
  SphereOptions opt;
  opt.t_inj = cut.min_t();
  auto type_at = [&](double t) { return sphere_and_ball(s.problem, t, cut, opt).type; };
  const BallType a = type_at(2.88), b = type_at(2.90);
  v.check(a == BallType::A && b == BallType::B,
          fmt("A -> B between 2.88 and 2.90: type(2.88) = %s, type(2.90) = %s", to_string(a), to_string(b)));
  const BallType c = type_at(2.98), d = type_at(3.02);
  v.check(c == BallType::B && d == BallType::C,
          fmt("B -> C at 3.00 +- 0.02: type(2.98) = %s, type(3.02) = %s", to_string(c), to_string(d)));

  // the singular point of the sphere at t = 3.5: an optimal self-intersection
  // of the wavefront, found without continuation
  const double t = 3.5;
  const Wavefront wf = wavefront(s.problem, t, 1000);
  const CutTimeMap cut_time(cut);
  const auto crossings = cut_level_crossings(cut, t);
  std::size_t optimal = 0;
  double worst = infinity;
  for (const auto& si : wf.self_intersections) {
    const auto val = value(s.problem, si.point, nullptr);
    if (!val || std::fabs(val->V - t) > 1e-6) continue;
    ++optimal;
    double dmin = infinity;
    for (const auto& [i, p] : crossings) dmin = std::min(dmin, distance(p.x, si.point));
    v.info(fmt("optimal self-intersection (%.6f, %.6f), V = %.9f, distance to Sigma1 %.2e", si.point.x1,
               si.point.x2, val->V, dmin));
    worst = std::isfinite(worst) ? std::max(worst, dmin) : dmin;
  }
  v.check(optimal >= 1 && worst <= 1e-4,
          fmt("%zu singular point(s) at t = 3.5, max distance to Sigma1 %.2e <= 1e-4", optimal, worst));
  report(8, "ball topology milestones", v);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  shooting_regression();
  Synthesis syn;
  injectivity_radius(syn);
  conjugate_locus();
  conservation();
  classification_oracle();
  closed_forms();
  symmetries();
  ball_milestones(syn);
  std::printf("%d of 8 criteria failed, %.1f s\n", failures, seconds_since(t0));
  return failures;
}
