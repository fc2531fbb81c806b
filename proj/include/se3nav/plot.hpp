#pragma once

// Static SVG figures from an episode CSV.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "se3nav/episode_io.hpp"
#include "se3nav/errors.hpp"
#include "se3nav/lie.hpp"

namespace se3nav::plot {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Series {
  std::string label;
  std::vector<Point> points;
  std::string color = "#1f77b4";
  bool dashed = false;
  double width = 1.2;
};

/// Shaded region between two curves sharing x.
struct Band {
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
  std::string color = "#bbbbbb";
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<Band> bands;
  bool equal_aspect = false;
};

inline const std::array<const char*, 12>& palette() {
  static const std::array<const char*, 12> p = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
      "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};
  return p;
}

namespace detail {

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out.push_back(c);
  }
  return out;
}

inline double nice_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

inline void render_panel(std::ostream& os, const Panel& p, double ox, double oy,
                         double w, double h) {
  const double ml = 64, mr = 16, mt = 26, mb = 40;
  Range xr, yr;
  for (const auto& s : p.series) {
    for (const auto& pt : s.points) {
      xr.add(pt.x);
      yr.add(pt.y);
    }
  }
  for (const auto& b : p.bands) {
    for (std::size_t k = 0; k < b.x.size(); ++k) {
      xr.add(b.x[k]);
      yr.add(b.lo[k]);
      yr.add(b.hi[k]);
    }
  }
  xr.finish();
  yr.finish();
  const double pw = w - ml - mr;
  const double ph = h - mt - mb;
  if (p.equal_aspect) {
    const double sx = (xr.hi - xr.lo) / pw;
    const double sy = (yr.hi - yr.lo) / ph;
    const double s = std::max(sx, sy);
    const double cx = 0.5 * (xr.lo + xr.hi), cy = 0.5 * (yr.lo + yr.hi);
    xr.lo = cx - 0.5 * s * pw;
    xr.hi = cx + 0.5 * s * pw;
    yr.lo = cy - 0.5 * s * ph;
    yr.hi = cy + 0.5 * s * ph;
  }
  const auto X = [&](double x) { return ox + ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto Y = [&](double y) { return oy + mt + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  os << "<g>\n";
  os << "<text x=\"" << fmt(ox + ml + pw / 2) << "\" y=\"" << fmt(oy + 17)
     << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(p.title) << "</text>\n";
  os << "<rect x=\"" << fmt(ox + ml) << "\" y=\"" << fmt(oy + mt) << "\" width=\""
     << fmt(pw) << "\" height=\"" << fmt(ph)
     << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"0.8\"/>\n";
  for (double tx = std::ceil(xr.lo / nice_step(xr.hi - xr.lo)) * nice_step(xr.hi - xr.lo);
       tx <= xr.hi + 1e-12; tx += nice_step(xr.hi - xr.lo)) {
    os << "<line x1=\"" << fmt(X(tx)) << "\" y1=\"" << fmt(oy + mt + ph) << "\" x2=\""
       << fmt(X(tx)) << "\" y2=\"" << fmt(oy + mt + ph + 4)
       << "\" stroke=\"#444\"/><text x=\"" << fmt(X(tx)) << "\" y=\""
       << fmt(oy + mt + ph + 16) << "\" text-anchor=\"middle\" font-size=\"10\">"
       << tick_label(std::abs(tx) < 1e-12 ? 0.0 : tx) << "</text>\n";
  }
  for (double ty = std::ceil(yr.lo / nice_step(yr.hi - yr.lo)) * nice_step(yr.hi - yr.lo);
       ty <= yr.hi + 1e-12; ty += nice_step(yr.hi - yr.lo)) {
    os << "<line x1=\"" << fmt(ox + ml - 4) << "\" y1=\"" << fmt(Y(ty)) << "\" x2=\""
       << fmt(ox + ml) << "\" y2=\"" << fmt(Y(ty))
       << "\" stroke=\"#444\"/><text x=\"" << fmt(ox + ml - 6) << "\" y=\""
       << fmt(Y(ty) + 3) << "\" text-anchor=\"end\" font-size=\"10\">"
       << tick_label(std::abs(ty) < 1e-12 ? 0.0 : ty) << "</text>\n";
  }
  os << "<text x=\"" << fmt(ox + ml + pw / 2) << "\" y=\"" << fmt(oy + h - 6)
     << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(p.x_label) << "</text>\n";
  os << "<text transform=\"translate(" << fmt(ox + 14) << "," << fmt(oy + mt + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">" << escape(p.y_label)
     << "</text>\n";

  for (const auto& b : p.bands) {
    if (b.x.empty()) continue;
    os << "<polygon class=\"band\" fill=\"" << b.color
       << "\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (std::size_t k = 0; k < b.x.size(); ++k) {
      os << fmt(X(b.x[k])) << ',' << fmt(Y(b.hi[k])) << ' ';
    }
    for (std::size_t k = b.x.size(); k-- > 0;) {
      os << fmt(X(b.x[k])) << ',' << fmt(Y(b.lo[k])) << ' ';
    }
    os << "\"/>\n";
  }
  for (const auto& s : p.series) {
    if (s.points.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
       << fmt(s.width) << "\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "")
       << " points=\"";
    for (const auto& pt : s.points) {
      if (std::isfinite(pt.y)) os << fmt(X(pt.x)) << ',' << fmt(Y(pt.y)) << ' ';
    }
    os << "\"/>\n";
  }
  double ly = oy + mt + 12;
  for (const auto& s : p.series) {
    if (s.label.empty()) continue;
    os << "<line x1=\"" << fmt(ox + ml + pw - 90) << "\" y1=\"" << fmt(ly - 4)
       << "\" x2=\"" << fmt(ox + ml + pw - 74) << "\" y2=\"" << fmt(ly - 4)
       << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
       << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/><text x=\""
       << fmt(ox + ml + pw - 70) << "\" y=\"" << fmt(ly) << "\" font-size=\"10\">"
       << escape(s.label) << "</text>\n";
    ly += 13;
  }
  os << "</g>\n";
}

}  // namespace detail

/// Stacks panels vertically into one SVG document.
inline void write_svg(std::ostream& os, const std::vector<Panel>& panels,
                      double width = 760, double panel_height = 260) {
  const double h = panel_height * static_cast<double>(panels.size());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << h << "\" viewBox=\"0 0 " << width << ' ' << h
     << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < panels.size(); ++k) {
    detail::render_panel(os, panels[k], 0.0, panel_height * static_cast<double>(k), width,
                         panel_height);
  }
  os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Episode figures
// ---------------------------------------------------------------------------

/// Row indices of each agent, in file order.
inline std::map<int, std::vector<std::size_t>> rows_by_agent(const CsvTable& t) {
  std::map<int, std::vector<std::size_t>> out;
  const int c = t.column("agent");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out[static_cast<int>(t.rows[r][static_cast<std::size_t>(c)])].push_back(r);
  }
  return out;
}

struct BandSample {
  double t = 0.0;
  double truth = 0.0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

inline const std::array<const char*, 6>& wrench_suffixes() {
  static const std::array<const char*, 6> s = {"tx", "ty", "tz", "fx", "fy", "fz"};
  return s;
}

/// Disturbance channel, GP estimate and the mean +- error-bound band.
inline std::vector<BandSample> band_series(const CsvTable& t, int agent, int component) {
  std::vector<BandSample> out;
  const std::string s = wrench_suffixes()[static_cast<std::size_t>(component)];
  const auto rows = rows_by_agent(t);
  auto it = rows.find(agent);
  if (it == rows.end()) return out;
  for (std::size_t r : it->second) {
    BandSample b;
    b.t = t.at(r, "t");
    b.truth = t.at(r, "d_" + s);
    b.mean = t.at(r, "gp_" + s);
    const double e = t.at(r, "error_bound");
    b.lo = b.mean - e;
    b.hi = b.mean + e;
    out.push_back(b);
  }
  return out;
}

/// Agent with the largest peak disturbance magnitude.
inline int most_disturbed_agent(const CsvTable& t) {
  int best = 0;
  double peak = -1.0;
  for (const auto& [agent, rows] : rows_by_agent(t)) {
    for (std::size_t r : rows) {
      double n = 0.0;
      for (const char* s : wrench_suffixes()) n += std::pow(t.at(r, std::string("d_") + s), 2);
      if (n > peak) {
        peak = n;
        best = agent;
      }
    }
  }
  return best;
}

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> n = {"trajectories.svg", "attitude.svg",
                                             "position.svg",     "disturbance.svg",
                                             "lyapunov.svg",     "min_distance.svg"};
  return n;
}

/// Writes the six figures into out_dir. Throws InvalidArgument on an empty
/// table or a missing column.
inline std::vector<std::filesystem::path> plot_episode(const CsvTable& t,
                                                       const std::filesystem::path& out_dir) {
  const std::string missing = missing_episode_column(t);
  if (!missing.empty()) throw InvalidArgument("missing column '" + missing + "'");
  if (t.rows.empty()) throw InvalidArgument("episode has no rows");
  std::filesystem::create_directories(out_dir);
  const auto groups = rows_by_agent(t);
  const auto color = [](int a) { return palette()[static_cast<std::size_t>(a) % 12]; };
  const auto label = [](int a) { return "agent " + std::to_string(a); };

  std::vector<std::pair<std::string, std::vector<Panel>>> figs;

  {
    // Oblique projection of the 3-D paths onto the page.
    Panel p{"Trajectories (oblique projection)", "x - 0.5 y [m]", "z + 0.35 y [m]", {}, {}, true};
    for (const auto& [a, rows] : groups) {
      Series s{label(a), {}, color(a)};
      for (std::size_t r : rows) {
        const double x = t.at(r, "q_x"), y = t.at(r, "q_y"), z = t.at(r, "q_z");
        s.points.push_back({x - 0.5 * y, z + 0.35 * y});
      }
      p.series.push_back(std::move(s));
    }
    figs.push_back({"trajectories.svg", {p}});
  }
  {
    std::vector<Panel> panels;
    const std::array<std::string, 3> names = {"roll", "pitch", "yaw"};
    for (int c = 0; c < 3; ++c) {
      Panel p{"Attitude: " + names[c], "t [s]", "deg", {}, {}};
      for (const auto& [a, rows] : groups) {
        Series s{label(a), {}, color(a)};
        for (std::size_t r : rows) {
          Mat3 R;
          for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
              R(i, j) = t.at(r, "R" + std::to_string(i) + std::to_string(j));
            }
          }
          const double ang[3] = {std::atan2(R(2, 1), R(2, 2)),
                                 std::asin(std::clamp(-R(2, 0), -1.0, 1.0)),
                                 std::atan2(R(1, 0), R(0, 0))};
          s.points.push_back({t.at(r, "t"), ang[c] * 180.0 / M_PI});
        }
        p.series.push_back(std::move(s));
      }
      panels.push_back(std::move(p));
    }
    figs.push_back({"attitude.svg", panels});
  }
  {
    std::vector<Panel> panels;
    for (const char* axis : {"x", "y", "z"}) {
      Panel p{std::string("Position: ") + axis, "t [s]", "m", {}, {}};
      for (const auto& [a, rows] : groups) {
        Series s{label(a), {}, color(a)};
        for (std::size_t r : rows) {
          s.points.push_back({t.at(r, "t"), t.at(r, std::string("q_") + axis)});
        }
        p.series.push_back(std::move(s));
      }
      panels.push_back(std::move(p));
    }
    figs.push_back({"position.svg", panels});
  }
  {
    const int a = most_disturbed_agent(t);
    std::vector<Panel> panels;
    for (int c = 0; c < 6; ++c) {
      const auto data = band_series(t, a, c);
      Panel p{"Agent " + std::to_string(a) + " disturbance " + wrench_suffixes()[c],
              "t [s]", c < 3 ? "N m" : "N", {}, {}};
      Band b;
      Series truth{"disturbance", {}, "#d62728"};
      Series est{"GP estimate", {}, "#1f4fd6", true};
      for (const auto& s : data) {
        b.x.push_back(s.t);
        b.lo.push_back(s.lo);
        b.hi.push_back(s.hi);
        truth.points.push_back({s.t, s.truth});
        est.points.push_back({s.t, s.mean});
      }
      p.bands.push_back(std::move(b));
      p.series.push_back(std::move(truth));
      p.series.push_back(std::move(est));
      panels.push_back(std::move(p));
    }
    figs.push_back({"disturbance.svg", panels});
  }
  {
    Panel p{"Lyapunov function", "t [s]", "V", {}, {}};
    Series s{"", {}, "#333333"};
    const auto& rows0 = groups.begin()->second;
    for (std::size_t r : rows0) s.points.push_back({t.at(r, "t"), t.at(r, "V")});
    p.series.push_back(std::move(s));
    figs.push_back({"lyapunov.svg", {p}});
  }
  {
    Panel p{"Minimum pairwise distance", "t [s]", "m", {}, {}};
    std::map<long, Point> per_tick;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const long k = static_cast<long>(t.at(r, "tick"));
      const double d = t.at(r, "min_dist");
      auto it = per_tick.find(k);
      if (it == per_tick.end()) {
        per_tick[k] = {t.at(r, "t"), d};
      } else {
        it->second.y = std::min(it->second.y, d);
      }
    }
    Series s{"", {}, "#333333"};
    for (const auto& [k, pt] : per_tick) s.points.push_back(pt);
    p.series.push_back(std::move(s));
    figs.push_back({"min_distance.svg", {p}});
  }

  std::vector<std::filesystem::path> written;
  for (const auto& [name, panels] : figs) {
    const auto path = out_dir / name;
    std::ofstream f(path);
    write_svg(f, panels);
    if (!f) throw InvalidArgument("cannot write " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace se3nav::plot
