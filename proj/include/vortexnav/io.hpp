#pragma once

// CSV tables, problem files and SVG rendering of polylines.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "model.hpp"

namespace vortexnav::io {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest representation that reads back to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> h) : header(std::move(h)) {}

  void add(std::vector<double> row) {
    if (row.size() != header.size()) throw InvalidArgument("csv row has the wrong number of fields");
    rows.push_back(std::move(row));
  }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }

  std::size_t index(const std::string& name, const std::string& source = "table") const {
    if (auto i = find(name)) return *i;
    throw InvalidArgument("missing column '" + name + "' in " + source);
  }

  std::vector<double> column(const std::string& name) const {
    const std::size_t k = index(name);
    std::vector<double> c;
    c.reserve(rows.size());
    for (const auto& r : rows) c.push_back(r[k]);
    return c;
  }
};

inline void write_csv(std::ostream& os, const CsvTable& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << '\n';
  }
}

inline void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  write_csv(f, t);
}

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) return t;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != t.header.size()) throw ConfigError("malformed csv line: " + line);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  return read_csv(f);
}

// Problem files:
//   {"mu": 1.8, "x0": [3, 0], "tolerances": {"rtol": 1e-12, ...}}
inline VortexProblem parse_problem(const nlohmann::json& j) {
  try {
    if (!j.contains("mu")) throw ConfigError("problem: missing 'mu'");
    if (!j.contains("x0")) throw ConfigError("problem: missing 'x0'");
    const auto& x0 = j.at("x0");
    if (!x0.is_array() || x0.size() != 2) throw ConfigError("problem: 'x0' must be [x1, x2]");
    Tolerances tol;
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      tol.rtol = t.value("rtol", tol.rtol);
      tol.atol = t.value("atol", tol.atol);
      tol.newton_tol = t.value("newton_tol", tol.newton_tol);
      tol.r_min = t.value("r_min", tol.r_min);
      tol.r_max = t.value("r_max", tol.r_max);
    }
    return VortexProblem(j.at("mu").get<double>(), {x0[0].get<double>(), x0[1].get<double>()}, tol);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

inline VortexProblem read_problem(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read problem file " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("problem file " + path + ": " + e.what());
  }
  return parse_problem(j);
}

inline nlohmann::json problem_json(const VortexProblem& p) {
  const Tolerances& t = p.tol();
  return {{"mu", p.mu()},
          {"x0", {p.x0().x1, p.x0().x2}},
          {"tolerances",
           {{"rtol", t.rtol}, {"atol", t.atol}, {"newton_tol", t.newton_tol}, {"r_min", t.r_min},
            {"r_max", t.r_max}}}};
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// SVG

struct Viewport {
  double x_min = -1.0, x_max = 1.0, y_min = -1.0, y_max = 1.0;
};

struct PolylineStyle {
  std::string color = "#1f4e9c";
  double width = 1.2;
  std::string dash;  // stroke-dasharray, empty for solid
  bool markers = false;
};

struct Polyline {
  std::vector<CartesianState> points;
  PolylineStyle style;
};

struct PlotSpec {
  std::string title;
  int width = 640, height = 640;
  std::optional<Viewport> viewport;  // fitted to the data when empty
  bool vortex_marker = true;
  std::optional<CartesianState> x0;
  std::optional<double> reeb_radius;  // dashed circle centred on the vortex
  std::vector<double> circles;        // extra reference circles
};

// A layer read from CSV: rows become points of (x, y); a change in the
// group column starts a new polyline.
struct CsvLayer {
  std::string path;
  std::string x = "x1";
  std::string y = "x2";
  std::string group;
  PolylineStyle style;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

inline Viewport fit_viewport(const std::vector<Polyline>& lines, const PlotSpec& spec) {
  double x0 = infinity, x1 = -infinity, y0 = infinity, y1 = -infinity;
  auto take = [&](const CartesianState& p) {
    if (!std::isfinite(p.x1) || !std::isfinite(p.x2)) return;
    x0 = std::min(x0, p.x1);
    x1 = std::max(x1, p.x1);
    y0 = std::min(y0, p.x2);
    y1 = std::max(y1, p.x2);
  };
  for (const auto& l : lines)
    for (const auto& p : l.points) take(p);
  if (spec.x0) take(*spec.x0);
  if (spec.vortex_marker) take({0.0, 0.0});
  if (spec.reeb_radius) {
    take({-*spec.reeb_radius, -*spec.reeb_radius});
    take({*spec.reeb_radius, *spec.reeb_radius});
  }
  if (!(x0 <= x1)) return {};
  // square, with a margin
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  const double half = 0.55 * std::max({x1 - x0, y1 - y0, 1e-9});
  return {cx - half, cx + half, cy - half, cy + half};
}

inline std::string render_svg(const std::vector<Polyline>& lines, const PlotSpec& spec) {
  const Viewport vp = spec.viewport ? *spec.viewport : fit_viewport(lines, spec);
  const double w = spec.width, h = spec.height;
  const double sx = w / (vp.x_max - vp.x_min), sy = h / (vp.y_max - vp.y_min);
  auto X = [&](double x) { return detail::fixed((x - vp.x_min) * sx); };
  auto Y = [&](double y) { return detail::fixed((vp.y_max - y) * sy); };
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
     << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
  os << "<!-- viewport x [" << io::format_number(vp.x_min) << ", " << io::format_number(vp.x_max)
     << "] y [" << io::format_number(vp.y_min) << ", " << io::format_number(vp.y_max) << "] -->\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height
     << "\" fill=\"white\" stroke=\"#888\"/>\n";
  if (!spec.title.empty())
    os << "<text x=\"8\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">"
       << detail::xml_escape(spec.title) << "</text>\n";
  auto circle = [&](double r, const std::string& style) {
    os << "<ellipse cx=\"" << X(0.0) << "\" cy=\"" << Y(0.0) << "\" rx=\"" << detail::fixed(r * sx)
       << "\" ry=\"" << detail::fixed(r * sy) << "\" fill=\"none\" " << style << "/>\n";
  };
  if (spec.reeb_radius) circle(*spec.reeb_radius, "stroke=\"#c03030\" stroke-dasharray=\"6 4\"");
  for (double r : spec.circles) circle(r, "stroke=\"#aaa\" stroke-dasharray=\"2 3\"");
  for (const auto& l : lines) {
    // split at non-finite points
    std::vector<std::vector<const CartesianState*>> runs(1);
    for (const auto& p : l.points) {
      if (std::isfinite(p.x1) && std::isfinite(p.x2)) runs.back().push_back(&p);
      else if (!runs.back().empty()) runs.emplace_back();
    }
    for (const auto& run : runs) {
      if (run.empty()) continue;
      os << "<polyline fill=\"none\" stroke=\"" << l.style.color << "\" stroke-width=\""
         << io::format_number(l.style.width) << "\"";
      if (!l.style.dash.empty()) os << " stroke-dasharray=\"" << l.style.dash << "\"";
      os << " points=\"";
      for (std::size_t i = 0; i < run.size(); ++i)
        os << (i ? " " : "") << X(run[i]->x1) << ',' << Y(run[i]->x2);
      os << "\"/>\n";
      if (l.style.markers)
        for (const auto* p : run)
          os << "<circle cx=\"" << X(p->x1) << "\" cy=\"" << Y(p->x2) << "\" r=\"1.5\" fill=\""
             << l.style.color << "\"/>\n";
    }
  }
  if (spec.vortex_marker)
    os << "<circle cx=\"" << X(0.0) << "\" cy=\"" << Y(0.0) << "\" r=\"4\" fill=\"black\"/>\n";
  if (spec.x0)
    os << "<circle cx=\"" << X(spec.x0->x1) << "\" cy=\"" << Y(spec.x0->x2)
       << "\" r=\"4\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  os << "</svg>\n";
  return os.str();
}

inline std::vector<Polyline> load_layers(const std::vector<CsvLayer>& layers) {
  std::vector<Polyline> out;
  for (const auto& layer : layers) {
    const CsvTable t = read_csv(layer.path);
    if (t.header.empty()) continue;
    const std::size_t ix = t.index(layer.x, layer.path);
    const std::size_t iy = t.index(layer.y, layer.path);
    std::optional<std::size_t> ig;
    if (!layer.group.empty()) ig = t.index(layer.group, layer.path);
    Polyline cur{{}, layer.style};
    double group = std::nan("");
    for (const auto& r : t.rows) {
      if (ig && r[*ig] != group) {
        if (!cur.points.empty()) out.push_back(cur);
        cur.points.clear();
        group = r[*ig];
      }
      cur.points.push_back({r[ix], r[iy]});
    }
    if (!cur.points.empty()) out.push_back(cur);
  }
  return out;
}

inline std::string render_svg(const std::vector<CsvLayer>& layers, const PlotSpec& spec) {
  return render_svg(load_layers(layers), spec);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

}  // namespace vortexnav::io
