// vortexnav: command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure,
// 4 precondition refused. Errors are reported as JSON on stdout.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vortexnav/vortexnav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vortexnav;

namespace {

enum Exit { Ok = 0, Config = 2, Numeric = 3, Refused = 4 };

struct Common {
  std::string problem_file;
  double mu = 0.0;
  std::vector<double> x0;
  std::string out = ".";
  bool svg = false;
  bool has_mu = false;
};

VortexProblem load_problem(const Common& c) {
  if (!c.problem_file.empty()) {
    VortexProblem p = io::read_problem(c.problem_file);
    if (c.has_mu) p = p.with_mu(c.mu);
    if (c.x0.size() == 2) p = p.with_x0({c.x0[0], c.x0[1]});
    return p;
  }
  if (!c.has_mu || c.x0.size() != 2) throw io::ConfigError("give --problem or both --mu and --x0");
  try {
    return VortexProblem(c.mu, {c.x0[0], c.x0[1]});
  } catch (const InvalidArgument& e) {
    throw io::ConfigError(e.what());
  }
}

std::string out_path(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  return (fs::path(c.out) / name).string();
}

json point(const CartesianState& x) { return {x.x1, x.x2}; }

json classification_json(const GeodesicClassification& g) {
  json j = {{"alpha", g.alpha},
            {"fate", to_string(g.fate)},
            {"type", to_string(g.gtype)},
            {"radial_profile", to_string(g.monotonicity)},
            {"near_boundary", g.near_boundary}};
  const DiscriminantData& d = g.discriminant;
  json dj = {{"a", d.a}, {"b", d.b}, {"c", d.c}, {"delta", d.delta}, {"p_theta_star", d.p_theta_star},
             {"has_roots", d.has_roots}};
  if (d.has_roots) {
    dj["x_minus"] = d.x_minus;
    dj["x_plus"] = d.x_plus;
    dj["r1"] = std::isfinite(d.r1) ? json(d.r1) : json("inf");
    dj["r2"] = std::isfinite(d.r2) ? json(d.r2) : json("inf");
  }
  j["discriminant"] = dj;
  return j;
}

io::CsvTable trajectory_table(const Trajectory& tr) {
  io::CsvTable t({"t", "r", "theta", "p_r", "p_theta", "x1", "x2", "H"});
  for (const auto& s : tr.samples) {
    const CartesianState x = s.z.position();
    t.add({s.t, s.z.r, s.z.theta, s.z.p_r, s.z.p_theta, x.x1, x.x2, hamiltonian(s.z, tr.mu)});
  }
  return t;
}

std::vector<io::Polyline> trajectory_lines(const Trajectory& tr, const std::string& color) {
  io::Polyline l;
  l.style.color = color;
  for (const auto& s : tr.samples) l.points.push_back(s.z.position());
  return {l};
}

void maybe_svg(const Common& c, const std::string& name, const std::vector<io::Polyline>& lines,
               io::PlotSpec spec) {
  if (!c.svg) return;
  io::write_text(out_path(c, name), io::render_svg(lines, spec));
}

io::PlotSpec base_spec(const VortexProblem& p, const std::string& title) {
  io::PlotSpec s;
  s.title = title;
  s.x0 = p.x0();
  return s;
}

// --- geodesic ---------------------------------------------------------------

struct GeodesicArgs {
  double alpha = 0.0;
  double t = 1.0;
  bool reeb = false;
};

json run_geodesic(const Common& c, const GeodesicArgs& a) {
  const VortexProblem p = load_problem(c);
  const Trajectory tr = exponential(p, a.alpha, a.t);
  io::write_csv(out_path(c, "geodesic.csv"), trajectory_table(tr));
  io::PlotSpec spec = base_spec(p, "geodesic alpha=" + io::format_number(a.alpha));
  if (a.reeb && p.mu() != 0.0) spec.reeb_radius = 2.0 * std::fabs(p.mu());
  maybe_svg(c, "geodesic.svg", trajectory_lines(tr, "#1f4e9c"), spec);
  return {{"command", "geodesic"},
          {"problem", io::problem_json(p)},
          {"alpha", a.alpha},
          {"stop_reason", to_string(tr.stop_reason)},
          {"final_time", tr.final_time()},
          {"endpoint", point(tr.endpoint())},
          {"hamiltonian", initial_hamiltonian(a.alpha, p.r0(), p.mu())},
          {"classification", classification_json(classify(a.alpha, p.r0(), p.mu()))},
          {"csv", "geodesic.csv"}};
}

// --- classify ---------------------------------------------------------------

struct ClassifyArgs {
  std::optional<double> alpha;
  std::size_t n = 360;
};

json run_classify(const Common& c, const ClassifyArgs& a) {
  const VortexProblem p = load_problem(c);
  const double r0 = p.r0(), mu = p.mu();
  json j = {{"command", "classify"}, {"problem", io::problem_json(p)}, {"drift", to_string(p.strength())}};
  const AbnormalAngles ab = abnormal_angles(r0, mu);
  j["abnormal_angles"] = json::array();
  for (int k = 0; k < ab.count; ++k) j["abnormal_angles"].push_back(ab.alpha[static_cast<std::size_t>(k)]);
  if (mu != 0.0) {
    const CriticalAngles ca = critical_angles(r0, mu);
    j["critical_angles"] = {ca.alpha1, ca.alpha2};
    j["p_theta_star"] = critical_momentum(r0, mu);
    for (double x : {ca.alpha1, ca.alpha2}) {
      const Fate f = fate(wrap_angle(x), r0, mu);
      if (f == Fate::Separatrix) j["separatrix_angle"] = wrap_angle(x);
      if (f == Fate::ReebCircle) j["reeb_circle_angle"] = wrap_angle(x);
    }
  }
  if (a.alpha) {
    j["classification"] = classification_json(classify(*a.alpha, r0, mu));
    return j;
  }
  io::CsvTable t({"alpha", "fate", "type", "radial_profile", "near_boundary", "r1", "r2"});
  std::size_t counts[4] = {0, 0, 0, 0};
  for (double alpha : uniform_alpha_grid(a.n)) {
    const GeodesicClassification g = classify(alpha, r0, mu);
    ++counts[static_cast<int>(g.fate)];
    t.add({alpha, static_cast<double>(g.fate), static_cast<double>(g.gtype),
           static_cast<double>(g.monotonicity), g.near_boundary ? 1.0 : 0.0, g.discriminant.r1,
           g.discriminant.r2});
  }
  io::write_csv(out_path(c, "classify.csv"), t);
  j["n"] = a.n;
  j["fate_counts"] = {{to_string(Fate::ToVortex), counts[0]},
                      {to_string(Fate::ToInfinity), counts[1]},
                      {to_string(Fate::Separatrix), counts[2]},
                      {to_string(Fate::ReebCircle), counts[3]}};
  j["csv"] = "classify.csv";
  return j;
}

// --- shoot ------------------------------------------------------------------

struct ShootArgs {
  std::vector<double> xf;
  std::optional<double> T;
  std::optional<double> alpha;
  std::size_t n = 64;
};

json extremal_json(const BCExtremal& bc) {
  return {{"T", bc.T},
          {"alpha", bc.alpha},
          {"residual", bc.residual},
          {"iterations", bc.iterations},
          {"fate", to_string(bc.classification.fate)},
          {"type", to_string(bc.classification.gtype)}};
}

json run_shoot(const Common& c, const ShootArgs& a) {
  const VortexProblem p = load_problem(c);
  if (a.xf.size() != 2) throw io::ConfigError("--xf needs two coordinates");
  std::optional<ShootingProblem> sp;
  try {
    sp.emplace(p, CartesianState{a.xf[0], a.xf[1]});
  } catch (const InvalidArgument& e) {
    throw io::ConfigError(e.what());
  }
  json j = {{"command", "shoot"}, {"problem", io::problem_json(p)}, {"xf", a.xf}};
  std::optional<BCExtremal> best;
  if (a.T || a.alpha) {
    if (!a.T || !a.alpha) throw io::ConfigError("--T and --alpha must be given together");
    const ShootOutcome o = shoot(*sp, *a.T, *a.alpha);
    j["status"] = to_string(o.status);
    j["iterations"] = o.iterations;
    j["residual"] = o.residual;
    if (!o.extremal) throw NumericFailure(std::string("shooting: ") + to_string(o.status));
    best = o.extremal;
  } else {
    const std::vector<BCExtremal> all = solve_all(*sp, a.n);
    if (all.empty()) throw NumericFailure("shooting: no BC-extremal found");
    j["candidates"] = json::array();
    for (const auto& bc : all) j["candidates"].push_back(extremal_json(bc));
    best = all.front();
  }
  j["T"] = best->T;
  j["alpha"] = best->alpha;
  j["optimal"] = extremal_json(*best);
  j["feasible_time"] = feasible_transfer_time(p.x0(), sp->xf, p.mu());
  const Trajectory tr = trajectory_of(p, *best);
  io::write_csv(out_path(c, "shoot.csv"), trajectory_table(tr));
  j["csv"] = "shoot.csv";
  io::PlotSpec spec = base_spec(p, "T=" + io::format_number(best->T));
  io::Polyline target{{sp->xf}, {"#c03030", 1.0, "", true}};
  auto lines = trajectory_lines(tr, "#1f4e9c");
  lines.push_back(target);
  maybe_svg(c, "shoot.svg", lines, spec);
  return j;
}

// --- conjugate-scan -----------------------------------------------------------

struct ConjugateArgs {
  std::size_t n = 1000;
  double t_max = 50.0;
  std::size_t samples = 501;
};

json run_conjugate(const Common& c, const ConjugateArgs& a) {
  const VortexProblem p = load_problem(c);
  ConjugateOptions opt;
  opt.n_samples = a.samples;
  const ConjugateScan scan = conjugate_scan(p, a.n, a.t_max, opt);
  io::CsvTable t({"alpha", "fate", "stop_reason", "t_stop", "final_radius", "final_sigma",
                  "first_conjugate_time", "failed"});
  json times = json::array();
  for (const auto& r : scan.results) {
    const Fate f = fate(r.alpha, p.r0(), p.mu());
    const double tc = r.first_conjugate_time ? *r.first_conjugate_time : std::nan("");
    if (r.first_conjugate_time) times.push_back({{"alpha", r.alpha}, {"t", tc}});
    t.add({r.alpha, static_cast<double>(f), static_cast<double>(r.stop_reason), r.t_stop,
           r.final_radius, r.final_sigma, tc, r.failed ? 1.0 : 0.0});
  }
  io::write_csv(out_path(c, "conjugate_scan.csv"), t);
  if (c.svg) {
    std::vector<io::Polyline> lines;
    for (std::size_t i = 0; i < scan.results.size(); i += std::max<std::size_t>(1, a.n / 50)) {
      const auto& r = scan.results[i];
      io::Polyline l;
      l.style.width = 0.8;
      for (std::size_t k = 0; k < r.t.size(); ++k) l.points.push_back({r.t[k], r.sigma_min[k]});
      lines.push_back(l);
    }
    io::PlotSpec spec;
    spec.title = "sigma_min(t)";
    spec.vortex_marker = false;
    spec.viewport = io::Viewport{0.0, a.t_max, -0.05, 1.1};
    spec.height = 320;
    maybe_svg(c, "conjugate_scan.svg", lines, spec);
  }
  return {{"command", "conjugate-scan"},
          {"problem", io::problem_json(p)},
          {"n", a.n},
          {"t_max", a.t_max},
          {"conjugate_count", scan.conjugate_count()},
          {"failure_count", scan.failure_count()},
          {"conjugate_times", times},
          {"csv", "conjugate_scan.csv"}};
}

// --- wavefront ------------------------------------------------------------------

struct WavefrontArgs {
  double t = 1.0;
  std::size_t n = 1000;
};

io::CsvTable wavefront_table(const Wavefront& wf) {
  io::CsvTable t({"alpha", "x1", "x2", "alive"});
  for (const auto& s : wf.samples)
    t.add({s.alpha, s.alive ? s.x.x1 : std::nan(""), s.alive ? s.x.x2 : std::nan(""), s.alive ? 1.0 : 0.0});
  return t;
}

json run_wavefront(const Common& c, const WavefrontArgs& a) {
  const VortexProblem p = load_problem(c);
  const Wavefront wf = wavefront(p, a.t, a.n);
  io::write_csv(out_path(c, "wavefront.csv"), wavefront_table(wf));
  io::CsvTable si({"x1", "x2", "alpha1", "alpha2", "residual"});
  json sj = json::array();
  for (const auto& s : wf.self_intersections) {
    si.add({s.point.x1, s.point.x2, s.alpha1, s.alpha2, s.residual});
    sj.push_back({{"point", point(s.point)}, {"alpha1", s.alpha1}, {"alpha2", s.alpha2}});
  }
  io::write_csv(out_path(c, "self_intersections.csv"), si);
  json gaps = json::array();
  for (const auto& g : wf.gaps) gaps.push_back({g[0], g[1]});
  if (c.svg) {
    io::Polyline l;
    for (const auto& s : wf.samples) l.points.push_back(s.alive ? s.x : CartesianState{std::nan(""), 0.0});
    if (!wf.samples.empty() && wf.gaps.empty()) l.points.push_back(wf.samples.front().x);
    io::Polyline m{{}, {"#c03030", 1.0, "", true}};
    for (const auto& s : wf.self_intersections) m.points.push_back(s.point);
    std::vector<io::Polyline> lines{l};
    for (const auto& q : m.points) lines.push_back({{q}, m.style});
    maybe_svg(c, "wavefront.svg", lines, base_spec(p, "wavefront t=" + io::format_number(a.t)));
  }
  return {{"command", "wavefront"},
          {"problem", io::problem_json(p)},
          {"t", a.t},
          {"n", a.n},
          {"alive", std::count_if(wf.samples.begin(), wf.samples.end(), [](const auto& s) { return s.alive; })},
          {"gaps", gaps},
          {"self_intersections", sj},
          {"csv", "wavefront.csv"}};
}

// --- splitting ---------------------------------------------------------------

struct SplittingArgs {
  double seed_time = 3.5;
  std::size_t n = 1000;
};

io::CsvTable curve_table(const SplittingCurve& cv) {
  io::CsvTable t({"lambda", "t", "alpha1", "x1", "x2"});
  for (std::size_t i = 0; i < cv.size(); ++i) {
    const SplitPoint q = cv.point(i);
    t.add({q.alpha2, q.t, q.alpha1, q.x.x1, q.x.x2});
  }
  return t;
}

json curve_json(const SplittingCurve& cv, const std::string& file) {
  return {{"label", cv.label()},
          {"min_t", cv.min_t()},
          {"lambda_range", {cv.alpha2(0), cv.alpha2(cv.size() - 1)}},
          {"stop_reason", {to_string(cv.ends[0]), to_string(cv.ends[1])}},
          {"samples", cv.size()},
          {"csv", file}};
}

const char* palette(std::size_t k) {
  static const char* colors[] = {"#1f4e9c", "#c03030", "#2a8a3a", "#8a5a00", "#7030a0"};
  return colors[k % 5];
}

json run_splitting(const Common& c, const SplittingArgs& a) {
  const VortexProblem p = load_problem(c);
  CutLocusOptions opt;
  opt.seed_time = a.seed_time;
  opt.n_angles = a.n;
  const std::vector<SplittingCurve> curves = splitting_curves(p, opt);
  json list = json::array();
  std::vector<io::Polyline> lines, tview;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const std::string file = "splitting_" + std::to_string(curves[k].label()) + ".csv";
    io::write_csv(out_path(c, file), curve_table(curves[k]));
    list.push_back(curve_json(curves[k], file));
    io::Polyline l{{}, {palette(k), 1.2, "", false}}, v{{}, {palette(k), 1.2, "", false}};
    for (std::size_t i = 0; i < curves[k].size(); ++i) {
      l.points.push_back(curves[k].point(i).x);
      v.points.push_back({curves[k].alpha2(i), curves[k].t(i)});
    }
    lines.push_back(l);
    tview.push_back(v);
  }
  if (c.svg) {
    io::PlotSpec spec = base_spec(p, "splitting curves");
    spec.viewport = io::Viewport{-3.0, 4.0, -3.5, 3.5};
    maybe_svg(c, "splitting.svg", lines, spec);
    io::PlotSpec tv;
    tv.title = "t(alpha2)";
    tv.vortex_marker = false;
    tv.viewport = io::Viewport{3.1, 5.3, 2.8, 4.0};
    maybe_svg(c, "splitting_t.svg", tview, tv);
  }
  return {{"command", "splitting"}, {"problem", io::problem_json(p)}, {"seed_time", a.seed_time},
          {"curves", list}};
}

// --- synthesis ---------------------------------------------------------------

struct SynthesisArgs {
  std::vector<double> times{1.5, 2.9, 3.5};
  double seed_time = 3.5;
  std::size_t n = 1000;
  std::size_t sphere_n = 720;
};

json run_synthesis(const Common& c, const SynthesisArgs& a) {
  const VortexProblem p = load_problem(c);
  require_weak_drift(p);
  CutLocusOptions copt;
  copt.seed_time = a.seed_time;
  copt.n_angles = a.n;
  SphereOptions sopt;
  sopt.n_angles = a.sphere_n;
  const SynthesisReport rep = synthesize(p, a.times, copt, sopt);
  io::write_csv(out_path(c, "cut.csv"), curve_table(rep.cut_curve));
  json balls = json::array();
  std::vector<io::Polyline> lines;
  {
    io::Polyline cut{{}, {"#c03030", 1.5, "", false}};
    for (std::size_t i = 0; i < rep.cut_curve.size(); ++i) cut.points.push_back(rep.cut_curve.point(i).x);
    lines.push_back(cut);
  }
  for (std::size_t k = 0; k < rep.snapshots.size(); ++k) {
    const SphereSnapshot& s = rep.snapshots[k];
    const std::string file = "sphere_" + std::to_string(k) + ".csv";
    io::CsvTable t({"arc", "alpha", "x1", "x2"});
    for (std::size_t i = 0; i < s.arcs.size(); ++i) {
      io::Polyline l{{}, {palette(k), 1.0, "", false}};
      for (std::size_t q = 0; q < s.arcs[i].points.size(); ++q) {
        t.add({static_cast<double>(i), s.arcs[i].alpha[q], s.arcs[i].points[q].x1, s.arcs[i].points[q].x2});
        l.points.push_back(s.arcs[i].points[q]);
      }
      lines.push_back(l);
    }
    io::write_csv(out_path(c, file), t);
    json sing = json::array();
    for (const auto& q : s.singular_points) sing.push_back(point(q));
    balls.push_back({{"t", s.t}, {"type", to_string(s.type)}, {"arcs", s.arcs.size()},
                     {"singular_points", sing}, {"csv", file}});
  }
  io::PlotSpec spec = base_spec(p, "spheres and cut locus");
  spec.viewport = io::Viewport{-3.5, 6.0, -4.75, 4.75};
  maybe_svg(c, "synthesis.svg", lines, spec);
  json j = {{"command", "synthesis"},
            {"problem", io::problem_json(p)},
            {"t_inj", rep.t_inj},
            {"t_vor", rep.t_vor},
            {"ball_type", balls},
            {"cut_curve_file", "cut.csv"},
            {"cut_curve", curve_json(rep.cut_curve, "cut.csv")},
            {"assumption", rep.assumption}};
  if (rep.injectivity_point)
    j["injectivity_point"] = {{"x", point(rep.injectivity_point->x)},
                              {"alpha1", rep.injectivity_point->alpha1},
                              {"alpha2", rep.injectivity_point->alpha2}};
  io::write_json(out_path(c, "synthesis.json"), j);
  return j;
}

// --- reeb ----------------------------------------------------------------------

struct ReebArgs {
  std::size_t levels = 12;
  std::size_t n = 400;
};

// Profile of f on (0, 2|mu|) and the separating geodesics of the punctured
// disk, drawn from the closed form through the circle r = 2|mu| / sqrt(3).
json run_reeb(const Common& c, const ReebArgs& a) {
  if (!c.has_mu || c.mu == 0.0) throw io::ConfigError("reeb needs a nonzero --mu");
  if (a.levels == 0 || a.n < 2) throw io::ConfigError("reeb needs --levels >= 1 and --n >= 2");
  const double mu = c.mu, m2 = 2.0 * std::fabs(mu), rs = m2 / std::sqrt(3.0);
  io::CsvTable prof({"r", "f", "minus_log_f"});
  io::Polyline pl{{}, {"#1f4e9c", 1.2, "", false}};
  for (std::size_t i = 1; i < a.n; ++i) {
    const double r = m2 * static_cast<double>(i) / static_cast<double>(a.n);
    const double f = reeb_f(r, mu);
    prof.add({r, f, -std::log(f)});
    pl.points.push_back({r, -std::log(f)});
  }
  io::write_csv(out_path(c, "reeb_profile.csv"), prof);

  // radii spaced geometrically towards both ends of the disk
  std::vector<double> radii;
  for (std::size_t i = 0; i <= a.n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(a.n);
    radii.push_back(0.5 * m2 * (1.0 - std::cos(pi * s)));
  }
  io::CsvTable sep({"curve", "r", "theta", "x1", "x2"});
  std::vector<io::Polyline> lines;
  for (std::size_t k = 0; k < a.levels; ++k) {
    const double th0 = two_pi * static_cast<double>(k) / static_cast<double>(a.levels);
    io::Polyline l{{}, {palette(k), 1.0, "", false}};
    for (double r : radii) {
      if (!(r > 0.02 * m2 && r < m2 * (1.0 - 1e-6))) continue;
      const double th = th0 + separatrix_theta(r, rs, mu);
      const CartesianState x{r * std::cos(th), r * std::sin(th)};
      sep.add({static_cast<double>(k), r, th, x.x1, x.x2});
      l.points.push_back(x);
    }
    lines.push_back(l);
  }
  io::write_csv(out_path(c, "separatrices.csv"), sep);
  if (c.svg) {
    io::PlotSpec spec;
    spec.title = "separating geodesics";
    spec.reeb_radius = m2;
    spec.circles = {rs};
    spec.viewport = io::Viewport{-1.1 * m2, 1.1 * m2, -1.1 * m2, 1.1 * m2};
    maybe_svg(c, "separatrices.svg", lines, spec);
    io::PlotSpec ps;
    ps.title = "-ln f(r)";
    ps.vortex_marker = false;
    ps.height = 400;
    maybe_svg(c, "reeb_profile.svg", {pl}, ps);
  }
  return {{"command", "reeb"},
          {"mu", mu},
          {"reeb_radius", m2},
          {"turning_radius", rs},
          {"levels", a.levels},
          {"csv", {"reeb_profile.csv", "separatrices.csv"}}};
}

int fail(Exit code, const std::string& kind, const std::string& message) {
  std::cout << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump(2) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-optimal navigation around a point vortex"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--problem,-p", common.problem_file, "Problem JSON {mu, x0, tolerances}");
    sub->add_option_function<double>("--mu", [&common](double v) { common.mu = v; common.has_mu = true; },
                                     "Vortex circulation (overrides the problem file)");
    sub->add_option("--x0", common.x0, "Initial point x1 x2 (overrides the problem file)")->expected(2);
    sub->add_option("--out,-o", common.out, "Output directory")->capture_default_str();
    sub->add_flag("--svg", common.svg, "Also write SVG plots");
  };

  GeodesicArgs ga;
  auto* geo = app.add_subcommand("geodesic", "Integrate the geodesic of one initial angle");
  add_common(geo);
  geo->add_option("--alpha", ga.alpha, "Initial angle of p0")->required();
  geo->add_option("--t", ga.t, "Duration")->capture_default_str();
  geo->add_flag("--reeb", ga.reeb, "Overlay the circle of radius 2|mu|");

  ClassifyArgs ca;
  auto* cls = app.add_subcommand("classify", "Fate and type of geodesics from the initial angle");
  add_common(cls);
  cls->add_option_function<double>("--alpha", [&ca](double v) { ca.alpha = v; }, "Single angle");
  cls->add_option("--n", ca.n, "Uniform angle grid size when --alpha is absent")->capture_default_str();

  ShootArgs sa;
  auto* sho = app.add_subcommand("shoot", "Solve the shooting equation towards xf");
  add_common(sho);
  sho->add_option("--xf", sa.xf, "Target point x1 x2")->expected(2)->required();
  sho->add_option_function<double>("--T", [&sa](double v) { sa.T = v; }, "Initial guess for T");
  sho->add_option_function<double>("--alpha", [&sa](double v) { sa.alpha = v; }, "Initial guess for alpha");
  sho->add_option("--n", sa.n, "Multi-start angle count")->capture_default_str();

  ConjugateArgs cja;
  auto* con = app.add_subcommand("conjugate-scan", "Conjugate-point test over a uniform angle grid");
  add_common(con);
  con->add_option("--n", cja.n, "Number of angles")->capture_default_str();
  con->add_option("--tmax", cja.t_max, "Integration horizon")->capture_default_str();
  con->add_option("--samples", cja.samples, "sigma_min samples per geodesic")->capture_default_str();

  WavefrontArgs wa;
  auto* wav = app.add_subcommand("wavefront", "Wavefront at time t and its self-intersections");
  add_common(wav);
  wav->add_option("--t", wa.t, "Time")->required();
  wav->add_option("--n", wa.n, "Number of angles")->capture_default_str();

  SplittingArgs spa;
  auto* spl = app.add_subcommand("splitting", "Continue the splitting curves seeded by a wavefront");
  add_common(spl);
  spl->add_option("--seed-time", spa.seed_time, "Wavefront time of the seeds")->capture_default_str();
  spl->add_option("--n", spa.n, "Wavefront angles")->capture_default_str();

  SynthesisArgs sya;
  auto* syn = app.add_subcommand("synthesis", "Cut locus, injectivity radius, spheres and balls");
  add_common(syn);
  syn->add_option("--times", sya.times, "Sphere times")->capture_default_str();
  syn->add_option("--seed-time", sya.seed_time, "Wavefront time of the seeds")->capture_default_str();
  syn->add_option("--n", sya.n, "Wavefront angles")->capture_default_str();
  syn->add_option("--sphere-n", sya.sphere_n, "Sphere angles")->capture_default_str();

  ReebArgs ra;
  auto* reb = app.add_subcommand("reeb", "Reeb profile and separating geodesics of the disk r < 2|mu|");
  add_common(reb);
  reb->add_option("--levels", ra.levels, "Number of separating geodesics")->capture_default_str();
  reb->add_option("--n", ra.n, "Radial samples")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(Config, "config", e.what());
  }

  try {
    json result;
    if (*geo) result = run_geodesic(common, ga);
    else if (*cls) result = run_classify(common, ca);
    else if (*sho) result = run_shoot(common, sa);
    else if (*con) result = run_conjugate(common, cja);
    else if (*wav) result = run_wavefront(common, wa);
    else if (*spl) result = run_splitting(common, spa);
    else if (*syn) result = run_synthesis(common, sya);
    else if (*reb) result = run_reeb(common, ra);
    std::cout << result.dump(2) << '\n';
    return Ok;
  } catch (const io::ConfigError& e) {
    return fail(Config, "config", e.what());
  } catch (const InvalidArgument& e) {
    return fail(Config, "config", e.what());
  } catch (const DomainError& e) {
    return fail(Config, "config", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(Config, "config", e.what());
  } catch (const PreconditionRefused& e) {
    return fail(Refused, "precondition_refused", e.what());
  } catch (const std::exception& e) {
    return fail(Numeric, "numeric_failure", e.what());
  }
}
