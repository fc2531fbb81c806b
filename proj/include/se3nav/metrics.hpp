#pragma once

// Episode summary statistics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "se3nav/scenario_config.hpp"
#include "se3nav/sim.hpp"

namespace se3nav {

struct IntervalReach {
  double start = 0.0;
  double end = 0.0;
  double min_gamma = 0.0;
  double last_gamma = 0.0;
  bool reached = false;
};

struct AgentMetrics {
  double final_gamma = 0.0;
  std::optional<double> max_gamma_after_settle;
  std::optional<double> settle_time;  ///< T_eps, seconds
  std::optional<double> attitude_error_before;  ///< mean radians
  std::optional<double> attitude_error_after;
  std::vector<IntervalReach> intervals;
};

struct LyapunovSummary {
  double initial = 0.0;
  double final = 0.0;
  double max = 0.0;
  double max_increase = 0.0;
  long increases = 0;  ///< steps with V rising by more than the tolerance
};

struct MetricsReport {
  std::vector<AgentMetrics> agents;
  double min_distance = std::numeric_limits<double>::infinity();
  long min_distance_tick = 0;
  std::optional<double> coverage;
  LyapunovSummary lyapunov;
  int waypoints_missed = 0;
  std::vector<std::string> warnings;
};

struct MetricsOptions {
  double reach_threshold = 0.5;
  double attitude_window = 10.0;
  double descent_tolerance = 1e-6;
};

inline MetricsReport compute_metrics(const EpisodeLog& log, const ScenarioConfig& cfg,
                                     const MetricsOptions& opt = {}) {
  MetricsReport r;
  const int n = log.agent_count;
  const long last = log.ticks;
  r.warnings = log.warnings;
  r.agents.resize(static_cast<std::size_t>(n));
  if (log.samples.empty()) return r;

  const auto time_of = [&](long k) { return static_cast<double>(k) * log.dt; };
  const bool engaged_run = cfg.gp.enabled && cfg.sim.gp_engage_time <= cfg.sim.t_end;
  const double engage = cfg.sim.gp_engage_time;

  long covered = 0;
  long covered_total = 0;
  for (long k = 0; k <= last; ++k) {
    for (int i = 0; i < n; ++i) {
      const TickSample& s = log.sample(k, i);
      if (s.min_dist < r.min_distance) {
        r.min_distance = s.min_dist;
        r.min_distance_tick = k;
      }
      if (!std::isnan(s.error_bound) && !std::isnan(s.residual_error)) {
        ++covered_total;
        if (s.residual_error <= s.error_bound) ++covered;
      }
    }
  }
  if (covered_total > 0) {
    r.coverage = static_cast<double>(covered) / static_cast<double>(covered_total);
  }

  auto& L = r.lyapunov;
  L.initial = log.V.front();
  L.final = log.V.back();
  L.max = *std::max_element(log.V.begin(), log.V.end());
  L.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < log.V.size(); ++k) {
    const double d = log.V[k] - log.V[k - 1];
    L.max_increase = std::max(L.max_increase, d);
    if (d > opt.descent_tolerance) ++L.increases;
  }
  if (log.V.size() < 2) L.max_increase = 0.0;

  const std::vector<double> switches = cfg.schedule_times();
  for (int i = 0; i < n; ++i) {
    AgentMetrics& a = r.agents[i];
    a.final_gamma = log.sample(last, i).gamma_d;

    // T_eps: earliest tick from which the dataset no longer changes and
    // gamma stays below the largest post-engage error bound.
    double max_bound = -1.0;
    for (long k = 0; k <= last; ++k) {
      const double b = log.sample(k, i).error_bound;
      if (!std::isnan(b)) max_bound = std::max(max_bound, b);
    }
    if (max_bound >= 0.0) {
      const std::uint64_t final_gen = log.sample(last, i).generation;
      long start = -1;
      for (long k = last; k >= 0; --k) {
        const TickSample& s = log.sample(k, i);
        if (s.generation != final_gen || !(s.gamma_d < max_bound)) break;
        start = k;
      }
      if (start >= 0) {
        a.settle_time = time_of(start);
        double m = 0.0;
        for (long k = start; k <= last; ++k) m = std::max(m, log.sample(k, i).gamma_d);
        a.max_gamma_after_settle = m;
      }
    }

    if (engaged_run) {
      const auto mean_att = [&](double t0, double t1) -> std::optional<double> {
        double sum = 0.0;
        long cnt = 0;
        for (long k = 0; k <= last; ++k) {
          const double t = time_of(k);
          if (t >= t0 && t < t1) {
            sum += log.sample(k, i).attitude_error;
            ++cnt;
          }
        }
        if (cnt == 0) return std::nullopt;
        return sum / static_cast<double>(cnt);
      };
      a.attitude_error_before = mean_att(engage - opt.attitude_window, engage);
      a.attitude_error_after =
          mean_att(time_of(last) - opt.attitude_window, time_of(last) + log.dt);
    }

    for (std::size_t w = 0; w < switches.size(); ++w) {
      IntervalReach iv;
      iv.start = switches[w];
      iv.end = w + 1 < switches.size() ? switches[w + 1] : time_of(last) + log.dt;
      iv.min_gamma = std::numeric_limits<double>::infinity();
      bool any = false;
      for (long k = 0; k <= last; ++k) {
        const double t = time_of(k);
        if (t < iv.start || t >= iv.end) continue;
        const double g = log.sample(k, i).gamma_d;
        iv.min_gamma = std::min(iv.min_gamma, g);
        iv.last_gamma = g;
        any = true;
      }
      if (!any) continue;
      iv.reached = iv.min_gamma < opt.reach_threshold;
      if (!iv.reached) ++r.waypoints_missed;
      a.intervals.push_back(iv);
    }
  }
  return r;
}

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

}  // namespace detail

inline nlohmann::json to_json(const MetricsReport& r, double dt) {
  using nlohmann::json;
  json agents = json::array();
  for (std::size_t i = 0; i < r.agents.size(); ++i) {
    const auto& a = r.agents[i];
    json iv = json::array();
    for (const auto& w : a.intervals) {
      iv.push_back({{"start", w.start},
                    {"end", w.end},
                    {"min_gamma_d", w.min_gamma},
                    {"last_gamma_d", w.last_gamma},
                    {"reached", w.reached}});
    }
    agents.push_back({{"agent", i},
                      {"final_gamma_d", a.final_gamma},
                      {"max_gamma_d_after_t_eps", detail::opt_json(a.max_gamma_after_settle)},
                      {"t_eps", detail::opt_json(a.settle_time)},
                      {"attitude_error_pre_engage", detail::opt_json(a.attitude_error_before)},
                      {"attitude_error_post_engage", detail::opt_json(a.attitude_error_after)},
                      {"waypoint_intervals", iv}});
  }
  return {{"agents", agents},
          {"min_pairwise_distance", r.min_distance},
          {"min_pairwise_distance_tick", r.min_distance_tick},
          {"min_pairwise_distance_time", static_cast<double>(r.min_distance_tick) * dt},
          {"gp_coverage", detail::opt_json(r.coverage)},
          {"lyapunov",
           {{"initial", r.lyapunov.initial},
            {"final", r.lyapunov.final},
            {"max", r.lyapunov.max},
            {"max_step_increase", r.lyapunov.max_increase},
            {"steps_increasing", r.lyapunov.increases}}},
          {"waypoints_missed", r.waypoints_missed},
          {"warnings", r.warnings}};
}

}  // namespace se3nav
