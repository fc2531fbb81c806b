#pragma once

// Scenario text format.
//
//   file    := { line }
//   line    := blank | comment | section | entry
//   comment := '#' text
//   section := '[' name ']'            name: [A-Za-z0-9_.]+
//   entry   := key '=' value [comment] key:  [A-Za-z0-9_.]+
//   value   := number | bool | string | word | array
//   array   := '[' [ number { ',' number } ] ']'
//   string  := '"' chars '"'           with \" and \\ escapes
//
// Sections: scenario, nav, gains, sim, noise, gp, agent.0 .. agent.N-1.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "se3nav/errors.hpp"
#include "se3nav/presets.hpp"
#include "se3nav/scenario_config.hpp"

namespace se3nav::config {

enum class ValueKind { kScalar, kString, kArray };

struct Value {
  ValueKind kind = ValueKind::kScalar;
  std::string text;              ///< scalar token or decoded string
  std::vector<std::string> items;  ///< array element tokens
  int line = 0;
  int column = 0;
};

struct Entry {
  std::string key;
  Value value;
  int column = 0;  ///< column of the key
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;

  Entry* find(const std::string& key) {
    for (auto& e : entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }
};

struct Document {
  std::vector<Section> sections;

  Section* find(const std::string& name) {
    for (auto& s : sections) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }
  Section& get_or_add(const std::string& name) {
    if (auto* s = find(name)) return *s;
    sections.push_back({name, 0, {}});
    return sections.back();
  }
};

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// Shortest text that reads back to the same double.
inline std::string format_number(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

// ---------------------------------------------------------------------------
// Lexing
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '-' || c == '+';
}

class LineLexer {
 public:
  LineLexer(std::string_view s, int line) : s_(s), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) {
      ++pos_;
    }
  }
  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  int column() const { return static_cast<int>(pos_) + 1; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, line_, column());
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string name() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && is_name_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string quoted() {
    expect('"');
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        const char e = s_[pos_++];
        if (e != '"' && e != '\\') fail("unknown escape sequence");
        out.push_back(e);
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  Value value() {
    Value v;
    v.line = line_;
    skip_ws();
    v.column = column();
    const char c = peek();
    if (c == '"') {
      v.kind = ValueKind::kString;
      v.text = quoted();
    } else if (c == '[') {
      v.kind = ValueKind::kArray;
      ++pos_;
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.push_back(name());
        const char d = peek();
        if (d == ',') {
          ++pos_;
          continue;
        }
        if (d == ']') {
          ++pos_;
          break;
        }
        fail("expected ',' or ']' in array");
      }
    } else {
      v.kind = ValueKind::kScalar;
      v.text = name();
    }
    return v;
  }

 private:
  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Document parse_document(std::istream& is) {
  Document doc;
  std::string line;
  int lineno = 0;
  Section* current = nullptr;
  while (std::getline(is, line)) {
    ++lineno;
    detail::LineLexer lx(line, lineno);
    if (lx.at_end_or_comment()) continue;
    if (lx.peek() == '[') {
      lx.expect('[');
      const std::string name = lx.name();
      lx.expect(']');
      if (!lx.at_end_or_comment()) lx.fail("unexpected text after section header");
      if (doc.find(name)) lx.fail("duplicate section [" + name + "]");
      doc.sections.push_back({name, lineno, {}});
      current = &doc.sections.back();
      continue;
    }
    const int key_col = lx.column();
    const std::string key = lx.name();
    if (!current) throw ParseError("entry outside of any section", lineno, key_col);
    lx.expect('=');
    Value v = lx.value();
    if (!lx.at_end_or_comment()) lx.fail("unexpected text after value");
    if (current->find(key)) throw ParseError("duplicate key '" + key + "'", lineno, key_col);
    v.line = lineno;
    current->entries.push_back({key, std::move(v), key_col});
    current->entries.back().value.column = std::max(current->entries.back().value.column, 1);
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Typed access
// ---------------------------------------------------------------------------

namespace detail {

[[noreturn]] inline void type_error(const Value& v, const std::string& key,
                                    const std::string& what) {
  throw ParseError("'" + key + "': " + what, v.line, v.column);
}

inline double to_double(const std::string& tok, const Value& v, const std::string& key) {
  double x = 0.0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  if (!tok.empty() && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e) type_error(v, key, "expected a number, got '" + tok + "'");
  return x;
}

inline double as_double(const Value& v, const std::string& key) {
  if (v.kind != ValueKind::kScalar) type_error(v, key, "expected a number");
  return to_double(v.text, v, key);
}

inline std::uint64_t as_uint(const Value& v, const std::string& key) {
  if (v.kind != ValueKind::kScalar) type_error(v, key, "expected an integer");
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
  if (ec != std::errc() || p != v.text.data() + v.text.size()) {
    type_error(v, key, "expected a non-negative integer, got '" + v.text + "'");
  }
  return x;
}

inline int as_int(const Value& v, const std::string& key) {
  if (v.kind != ValueKind::kScalar) type_error(v, key, "expected an integer");
  int x = 0;
  auto [p, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
  if (ec != std::errc() || p != v.text.data() + v.text.size()) {
    type_error(v, key, "expected an integer, got '" + v.text + "'");
  }
  return x;
}

inline bool as_bool(const Value& v, const std::string& key) {
  if (v.kind == ValueKind::kScalar && v.text == "true") return true;
  if (v.kind == ValueKind::kScalar && v.text == "false") return false;
  type_error(v, key, "expected true or false");
}

inline std::string as_string(const Value& v, const std::string& key) {
  if (v.kind == ValueKind::kArray) type_error(v, key, "expected a string");
  return v.text;
}

inline std::vector<double> as_array(const Value& v, const std::string& key,
                                    std::size_t n) {
  if (v.kind != ValueKind::kArray) type_error(v, key, "expected an array");
  if (n != 0 && v.items.size() != n) {
    type_error(v, key, "expected " + std::to_string(n) + " elements, got " +
                           std::to_string(v.items.size()));
  }
  std::vector<double> out;
  for (const auto& t : v.items) out.push_back(to_double(t, v, key));
  return out;
}

inline Vec3 as_vec3(const Value& v, const std::string& key) {
  const auto a = as_array(v, key, 3);
  return Vec3(a[0], a[1], a[2]);
}

inline Mat3 as_mat3(const Value& v, const std::string& key) {
  const auto a = as_array(v, key, 9);
  Mat3 R;
  R << a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8];
  return R;
}

inline DisturbanceKind as_disturbance(const Value& v, const std::string& key) {
  const std::string s = as_string(v, key);
  if (s == "none") return DisturbanceKind::kNone;
  if (s == "step") return DisturbanceKind::kStep;
  if (s == "gust") return DisturbanceKind::kGust;
  if (s == "step_gust") return DisturbanceKind::kStepGust;
  type_error(v, key, "expected none, step, gust or step_gust");
}

inline Integrator as_integrator(const Value& v, const std::string& key) {
  const std::string s = as_string(v, key);
  if (s == "rkmk4") return Integrator::kRkmk4;
  if (s == "lie-euler") return Integrator::kLieEuler;
  type_error(v, key, "expected rkmk4 or lie-euler");
}

/// Applies every entry of a section through a key -> setter table; unknown
/// keys are parse errors at the key's position.
template <class Table>
void apply_section(const Section& s, const Table& table,
                   const std::function<bool(const Entry&)>& fallback = {}) {
  for (const auto& e : s.entries) {
    auto it = table.find(e.key);
    if (it != table.end()) {
      it->second(e.value, s.name + "." + e.key);
    } else if (!(fallback && fallback(e))) {
      throw ParseError("unknown key '" + e.key + "' in [" + s.name + "]",
                       e.value.line, e.column);
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Document -> ScenarioConfig
// ---------------------------------------------------------------------------

using Setter = std::function<void(const Value&, const std::string&)>;
using SetterTable = std::map<std::string, Setter>;

inline ScenarioConfig build_config(const Document& doc) {
  using namespace detail;
  ScenarioConfig c;

  int agents = 0;
  for (const auto& s : doc.sections) {
    if (s.name.rfind("agent.", 0) == 0) ++agents;
  }
  c.agents.resize(static_cast<std::size_t>(agents));
  for (auto& a : c.agents) a.goals.clear();

  for (const auto& s : doc.sections) {
    if (s.name == "scenario") {
      apply_section(s, SetterTable{
          {"name", [&](const Value& v, const std::string& k) { c.name = as_string(v, k); }},
      });
    } else if (s.name == "nav") {
      auto& n = c.nav;
      apply_section(s, SetterTable{
          {"k", [&](const Value& v, const std::string& k) { n.k = as_double(v, k); }},
          {"lambda", [&](const Value& v, const std::string& k) { n.lambda = as_double(v, k); }},
          {"sigma", [&](const Value& v, const std::string& k) { n.sigma = as_double(v, k); }},
          {"X", [&](const Value& v, const std::string& k) { n.X = as_double(v, k); }},
          {"a0", [&](const Value& v, const std::string& k) { n.a0 = as_double(v, k); }},
          {"fov_avoidance", [&](const Value& v, const std::string& k) { n.fov_avoidance = as_bool(v, k); }},
          {"sensing_radius", [&](const Value& v, const std::string& k) { n.sensing_radius = as_double(v, k); }},
          {"fov_range", [&](const Value& v, const std::string& k) { n.fov_range = as_double(v, k); }},
          {"obstacle_scale", [&](const Value& v, const std::string& k) { n.obstacle_scale = as_double(v, k); }},
      });
    } else if (s.name == "gains") {
      apply_section(s, SetterTable{
          {"c", [&](const Value& v, const std::string& k) { c.c = as_double(v, k); }},
          {"dissipation", [&](const Value& v, const std::string& k) { c.dissipation = as_double(v, k); }},
          {"theta_epsilon", [&](const Value& v, const std::string& k) { c.theta_epsilon = as_double(v, k); }},
          {"fd_step", [&](const Value& v, const std::string& k) { c.fd_step = as_double(v, k); }},
      });
    } else if (s.name == "sim") {
      auto& m = c.sim;
      apply_section(s, SetterTable{
          {"dt", [&](const Value& v, const std::string& k) { m.dt = as_double(v, k); }},
          {"t_end", [&](const Value& v, const std::string& k) { m.t_end = as_double(v, k); }},
          {"integrator", [&](const Value& v, const std::string& k) { m.integrator = as_integrator(v, k); }},
          {"seed", [&](const Value& v, const std::string& k) { m.seed = as_uint(v, k); }},
          {"gp_freeze_time", [&](const Value& v, const std::string& k) { m.gp_freeze_time = as_double(v, k); }},
          {"gp_engage_time", [&](const Value& v, const std::string& k) { m.gp_engage_time = as_double(v, k); }},
          {"log_period", [&](const Value& v, const std::string& k) { m.log_period = as_int(v, k); }},
      });
    } else if (s.name == "noise") {
      apply_section(s, SetterTable{
          {"attitude_std_deg", [&](const Value& v, const std::string& k) { c.noise.attitude_std_deg = as_double(v, k); }},
          {"position_std", [&](const Value& v, const std::string& k) { c.noise.position_std = as_double(v, k); }},
      });
    } else if (s.name == "gp") {
      auto& g = c.gp;
      apply_section(s, SetterTable{
          {"enabled", [&](const Value& v, const std::string& k) { g.enabled = as_bool(v, k); }},
          {"capacity", [&](const Value& v, const std::string& k) { g.capacity = as_uint(v, k); }},
          {"signal_variance", [&](const Value& v, const std::string& k) { g.kernel.signal_variance = as_double(v, k); }},
          {"lengthscale", [&](const Value& v, const std::string& k) { g.kernel.lengthscale = as_double(v, k); }},
          {"noise_variance", [&](const Value& v, const std::string& k) { g.kernel.noise_variance = as_double(v, k); }},
          {"delta", [&](const Value& v, const std::string& k) { g.delta = as_double(v, k); }},
          {"rkhs_bound", [&](const Value& v, const std::string& k) { g.rkhs_bound = as_double(v, k); }},
          {"sample_period", [&](const Value& v, const std::string& k) { g.sample_period = as_int(v, k); }},
          {"pool_size", [&](const Value& v, const std::string& k) { g.pool_size = as_uint(v, k); }},
          {"fit_hyperparameters", [&](const Value& v, const std::string& k) { g.fit_hyperparameters = as_bool(v, k); }},
          {"fit_budget", [&](const Value& v, const std::string& k) { g.fit_budget = as_int(v, k); }},
      });
    } else if (s.name.rfind("agent.", 0) == 0) {
      int idx = -1;
      const std::string num = s.name.substr(6);
      auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), idx);
      if (ec != std::errc() || p != num.data() + num.size() || idx < 0 || idx >= agents) {
        throw ParseError("agent sections must be numbered 0.." +
                             std::to_string(agents - 1) + ", got [" + s.name + "]",
                         s.line, 1);
      }
      AgentConfig& a = c.agents[static_cast<std::size_t>(idx)];
      std::map<int, GoalEntry> goals;
      apply_section(
          s,
          SetterTable{
              {"mass", [&](const Value& v, const std::string& k) { a.mass = as_double(v, k); }},
              {"inertia", [&](const Value& v, const std::string& k) { a.inertia = as_vec3(v, k); }},
              {"radius", [&](const Value& v, const std::string& k) { a.geometry.radius = as_double(v, k); }},
              {"camera_axis", [&](const Value& v, const std::string& k) { a.geometry.camera_axis = as_vec3(v, k); }},
              {"fov_half_angle", [&](const Value& v, const std::string& k) { a.geometry.fov_half_angle = as_double(v, k); }},
              {"K", [&](const Value& v, const std::string& k) { a.K = as_double(v, k); }},
              {"position", [&](const Value& v, const std::string& k) { a.initial.q = as_vec3(v, k); }},
              {"rotation", [&](const Value& v, const std::string& k) { a.initial.R = as_mat3(v, k); }},
              {"disturbance", [&](const Value& v, const std::string& k) { a.disturbance.kind = as_disturbance(v, k); }},
              {"disturbance_torque", [&](const Value& v, const std::string& k) { a.disturbance.wrench.torque = as_vec3(v, k); }},
              {"disturbance_force", [&](const Value& v, const std::string& k) { a.disturbance.wrench.force = as_vec3(v, k); }},
              {"disturbance_start", [&](const Value& v, const std::string& k) { a.disturbance.start = as_double(v, k); }},
              {"gust_speed", [&](const Value& v, const std::string& k) { a.disturbance.gust_speed = as_double(v, k); }},
              {"gust_bandwidth", [&](const Value& v, const std::string& k) { a.disturbance.gust_bandwidth = as_double(v, k); }},
              {"drag_coefficient", [&](const Value& v, const std::string& k) { a.disturbance.drag_coefficient = as_double(v, k); }},
          },
          [&](const Entry& e) {
            // goal.<n> = [time, qx, qy, qz, R00 .. R22]
            if (e.key.rfind("goal.", 0) != 0) return false;
            int gi = -1;
            const std::string gnum = e.key.substr(5);
            auto [gp, gec] = std::from_chars(gnum.data(), gnum.data() + gnum.size(), gi);
            if (gec != std::errc() || gp != gnum.data() + gnum.size() || gi < 0) return false;
            const auto arr = as_array(e.value, s.name + "." + e.key, 13);
            GoalEntry g;
            g.time = arr[0];
            g.pose.q = Vec3(arr[1], arr[2], arr[3]);
            g.pose.R << arr[4], arr[5], arr[6], arr[7], arr[8], arr[9], arr[10], arr[11], arr[12];
            goals[gi] = g;
            return true;
          });
      int expect = 0;
      for (const auto& [gi, g] : goals) {
        if (gi != expect++) {
          throw ParseError("goal entries of [" + s.name + "] must be numbered 0..n-1",
                           s.line, 1);
        }
        a.goals.push_back(g);
      }
    } else {
      throw ParseError("unknown section [" + s.name + "]", s.line, 1);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Overrides
// ---------------------------------------------------------------------------

/// Applies "section.key=value". The section is the shortest dotted prefix
/// naming an existing section (so agent.2.goal.0 targets [agent.2]); the
/// wildcard agent.*.key applies to every agent.
inline void apply_override(Document& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ParseError("override must have the form section.key=value: " + assignment, 0, 0);
  }
  std::string path = assignment.substr(0, eq);
  while (!path.empty() && path.back() == ' ') path.pop_back();
  const std::string rhs = assignment.substr(eq + 1);
  detail::LineLexer lx(rhs, 0);
  Value v = lx.value();
  if (!lx.at_end_or_comment()) throw ParseError("trailing text in override: " + assignment, 0, 0);

  const auto set = [&](Section& s, const std::string& key) {
    if (Entry* e = s.find(key)) {
      e->value = v;
    } else {
      s.entries.push_back({key, v});
    }
  };
  if (path.rfind("agent.*.", 0) == 0) {
    const std::string key = path.substr(8);
    for (auto& s : doc.sections) {
      if (s.name.rfind("agent.", 0) == 0) set(s, key);
    }
    return;
  }
  for (std::size_t dot = path.find('.'); dot != std::string::npos;
       dot = path.find('.', dot + 1)) {
    const std::string name = path.substr(0, dot);
    if (Section* s = doc.find(name)) {
      set(*s, path.substr(dot + 1));
      return;
    }
  }
  const auto dot = path.find('.');
  static const std::vector<std::string> known = {"scenario", "nav", "gains",
                                                 "sim", "noise", "gp"};
  if (dot != std::string::npos &&
      std::find(known.begin(), known.end(), path.substr(0, dot)) != known.end()) {
    set(doc.get_or_add(path.substr(0, dot)), path.substr(dot + 1));
    return;
  }
  throw ParseError("override names no existing section: " + path, 0, 0);
}

// ---------------------------------------------------------------------------
// Canonical writer
// ---------------------------------------------------------------------------

namespace detail {

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  return out + "\"";
}

inline std::string array(std::initializer_list<double> xs) {
  std::string out = "[";
  bool first = true;
  for (double x : xs) {
    if (!first) out += ", ";
    out += format_number(x);
    first = false;
  }
  return out + "]";
}

inline std::string vec3(const Vec3& v) { return array({v.x(), v.y(), v.z()}); }

inline std::string mat3(const Mat3& R) {
  return array({R(0, 0), R(0, 1), R(0, 2), R(1, 0), R(1, 1), R(1, 2), R(2, 0),
                R(2, 1), R(2, 2)});
}

inline std::string boolean(bool b) { return b ? "true" : "false"; }

inline std::string disturbance_name(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::kNone: return "none";
    case DisturbanceKind::kStep: return "step";
    case DisturbanceKind::kGust: return "gust";
    case DisturbanceKind::kStepGust: return "step_gust";
  }
  return "none";
}

}  // namespace detail

/// Comments keyed by "section.key", emitted on the line above that key.
using Annotations = std::map<std::string, std::string>;

inline void write_config(std::ostream& os, const ScenarioConfig& c,
                         const Annotations& notes = {}) {
  using namespace detail;
  std::string section;
  const auto begin = [&](const std::string& name) {
    if (!section.empty()) os << '\n';
    section = name;
    os << '[' << name << "]\n";
  };
  const auto kv = [&](const std::string& key, const std::string& value) {
    auto it = notes.find(section + "." + key);
    if (it != notes.end()) os << "# " << it->second << '\n';
    os << key << " = " << value << '\n';
  };
  const auto num = [](double x) { return format_number(x); };

  begin("scenario");
  kv("name", quote(c.name));

  begin("nav");
  kv("k", num(c.nav.k));
  kv("lambda", num(c.nav.lambda));
  kv("sigma", num(c.nav.sigma));
  kv("X", num(c.nav.X));
  kv("a0", num(c.nav.a0));
  kv("fov_avoidance", boolean(c.nav.fov_avoidance));
  kv("sensing_radius", num(c.nav.sensing_radius));
  kv("fov_range", num(c.nav.fov_range));
  kv("obstacle_scale", num(c.nav.obstacle_scale));

  begin("gains");
  kv("c", num(c.c));
  kv("dissipation", num(c.dissipation));
  kv("theta_epsilon", num(c.theta_epsilon));
  kv("fd_step", num(c.fd_step));

  begin("sim");
  kv("dt", num(c.sim.dt));
  kv("t_end", num(c.sim.t_end));
  kv("integrator", quote(c.sim.integrator == Integrator::kRkmk4 ? "rkmk4" : "lie-euler"));
  kv("seed", std::to_string(c.sim.seed));
  kv("gp_freeze_time", num(c.sim.gp_freeze_time));
  kv("gp_engage_time", num(c.sim.gp_engage_time));
  kv("log_period", std::to_string(c.sim.log_period));

  begin("noise");
  kv("attitude_std_deg", num(c.noise.attitude_std_deg));
  kv("position_std", num(c.noise.position_std));

  begin("gp");
  kv("enabled", boolean(c.gp.enabled));
  kv("capacity", std::to_string(c.gp.capacity));
  kv("signal_variance", num(c.gp.kernel.signal_variance));
  kv("lengthscale", num(c.gp.kernel.lengthscale));
  kv("noise_variance", num(c.gp.kernel.noise_variance));
  kv("delta", num(c.gp.delta));
  kv("rkhs_bound", num(c.gp.rkhs_bound));
  kv("sample_period", std::to_string(c.gp.sample_period));
  kv("pool_size", std::to_string(c.gp.pool_size));
  kv("fit_hyperparameters", boolean(c.gp.fit_hyperparameters));
  kv("fit_budget", std::to_string(c.gp.fit_budget));

  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    const AgentConfig& a = c.agents[i];
    begin("agent." + std::to_string(i));
    kv("mass", num(a.mass));
    kv("inertia", vec3(a.inertia));
    kv("radius", num(a.geometry.radius));
    kv("camera_axis", vec3(a.geometry.camera_axis));
    kv("fov_half_angle", num(a.geometry.fov_half_angle));
    kv("K", num(a.K));
    kv("position", vec3(a.initial.q));
    kv("rotation", mat3(a.initial.R));
    for (std::size_t g = 0; g < a.goals.size(); ++g) {
      const auto& e = a.goals[g];
      const Mat3& R = e.pose.R;
      kv("goal." + std::to_string(g),
         array({e.time, e.pose.q.x(), e.pose.q.y(), e.pose.q.z(), R(0, 0), R(0, 1),
                R(0, 2), R(1, 0), R(1, 1), R(1, 2), R(2, 0), R(2, 1), R(2, 2)}));
    }
    kv("disturbance", quote(disturbance_name(a.disturbance.kind)));
    kv("disturbance_torque", vec3(a.disturbance.wrench.torque));
    kv("disturbance_force", vec3(a.disturbance.wrench.force));
    kv("disturbance_start", num(a.disturbance.start));
    kv("gust_speed", num(a.disturbance.gust_speed));
    kv("gust_bandwidth", num(a.disturbance.gust_bandwidth));
    kv("drag_coefficient", num(a.disturbance.drag_coefficient));
  }
}

inline std::string to_string(const ScenarioConfig& c, const Annotations& notes = {}) {
  std::ostringstream os;
  write_config(os, c, notes);
  return os.str();
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Parses, applies overrides, builds and validates. Parse problems raise
/// ParseError; constraint violations raise ValidationError listing all of
/// them.
inline ScenarioConfig load_config(std::istream& is,
                                  const std::vector<std::string>& overrides = {}) {
  Document doc = parse_document(is);
  for (const auto& o : overrides) apply_override(doc, o);
  ScenarioConfig c = build_config(doc);
  c.validate();
  return c;
}

inline ScenarioConfig load_config_string(const std::string& text,
                                         const std::vector<std::string>& overrides = {}) {
  std::istringstream is(text);
  return load_config(is, overrides);
}

/// A path to a config file, or the name of a bundled preset (optionally
/// with a .cfg suffix) when no such file exists.
inline ScenarioConfig load_config(const std::string& path,
                                  const std::vector<std::string>& overrides = {}) {
  std::ifstream f(path);
  if (f) return load_config(f, overrides);
  std::string name = path;
  const auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  if (name.size() > 4 && name.substr(name.size() - 4) == ".cfg") {
    name = name.substr(0, name.size() - 4);
  }
  if (auto preset = presets::by_name(name)) {
    return load_config_string(to_string(*preset), overrides);
  }
  throw InvalidArgument("cannot open config '" + path + "'");
}

}  // namespace se3nav::config
