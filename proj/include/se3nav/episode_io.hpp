#pragma once

// Episode CSV export and import.

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "se3nav/errors.hpp"
#include "se3nav/gp.hpp"
#include "se3nav/sim.hpp"

namespace se3nav {

/// Fixed column order of episode.csv.
inline const std::vector<std::string>& episode_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"tick", "t", "agent"};
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) c.push_back("R" + std::to_string(r) + std::to_string(k));
    }
    for (const char* s : {"q_x", "q_y", "q_z", "omega_x", "omega_y", "omega_z", "v_x",
                          "v_y", "v_z", "u_tx", "u_ty", "u_tz", "u_fx", "u_fy", "u_fz",
                          "d_tx", "d_ty", "d_tz", "d_fx", "d_fy", "d_fz", "gp_tx",
                          "gp_ty", "gp_tz", "gp_fx", "gp_fy", "gp_fz", "error_bound",
                          "psi", "V", "min_dist"}) {
      c.push_back(s);
    }
    return c;
  }();
  return cols;
}

inline void write_episode_csv(std::ostream& os, const EpisodeLog& log) {
  const auto& cols = episode_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  const auto num = [&](double x) { os << ',' << gp::format_double(x); };
  for (const LogRow& r : log.rows) {
    os << r.tick;
    num(r.t);
    os << ',' << r.agent;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) num(r.pose.R(a, b));
    }
    for (int a = 0; a < 3; ++a) num(r.pose.q(a));
    for (int a = 0; a < 3; ++a) num(r.xi.omega(a));
    for (int a = 0; a < 3; ++a) num(r.xi.v(a));
    for (const Wrench* w : {&r.u, &r.disturbance, &r.gp_mean}) {
      const Vec6 x = w->vector();
      for (int a = 0; a < 6; ++a) num(x(a));
    }
    num(r.error_bound);
    num(r.psi);
    num(r.V);
    num(r.min_dist);
    os << '\n';
  }
}

/// Numeric CSV with a header row, addressed by column name.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return static_cast<int>(c);
    }
    return -1;
  }
  double at(std::size_t row, const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw InvalidArgument("missing column '" + name + "'");
    return rows[row][static_cast<std::size_t>(c)];
  }
};

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("csv: missing header", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) t.header.push_back(name);
  }
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      double x = 0.0;
      const auto r = std::from_chars(p, end, x);
      if (r.ec != std::errc()) {
        throw ParseError("csv: malformed number", lineno, static_cast<int>(row.size() + 1));
      }
      row.push_back(x);
      p = r.ptr;
      if (p == end) break;
      if (*p != ',') {
        throw ParseError("csv: expected ','", lineno, static_cast<int>(row.size()));
      }
      ++p;
    }
    if (row.size() != t.header.size()) {
      throw ParseError("csv: expected " + std::to_string(t.header.size()) + " columns",
                       lineno, static_cast<int>(row.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// First episode column absent from the table, or empty if all are present.
inline std::string missing_episode_column(const CsvTable& t) {
  for (const auto& c : episode_columns()) {
    if (t.column(c) < 0) return c;
  }
  return {};
}

}  // namespace se3nav
