#pragma once

// Declarative description of one episode.

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "se3nav/errors.hpp"
#include "se3nav/gp.hpp"
#include "se3nav/lie.hpp"
#include "se3nav/navigation.hpp"

namespace se3nav {

enum class Integrator { kLieEuler, kRkmk4 };

struct SimConfig {
  double dt = 1e-3;
  double t_end = 10.0;
  Integrator integrator = Integrator::kRkmk4;
  std::uint64_t seed = 1;
  double gp_freeze_time = 1e300;  ///< no dataset mutation at or after this time
  double gp_engage_time = 1e300;  ///< learning compensation on from here
  int log_period = 1;             ///< ticks between logged rows

  long tick_count() const { return std::lround(t_end / dt); }
  bool operator==(const SimConfig&) const = default;
};

enum class DisturbanceKind { kNone, kStep, kGust, kStepGust };

struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::kNone;
  Wrench wrench;               ///< step magnitude
  double start = 0.0;          ///< step onset, seconds
  double gust_speed = 0.0;     ///< wind speed clamp, m/s
  double gust_bandwidth = 0.2; ///< OU corner frequency, Hz
  double drag_coefficient = 0.3;  ///< N per (m/s)

  bool has_step() const {
    return kind == DisturbanceKind::kStep || kind == DisturbanceKind::kStepGust;
  }
  bool has_gust() const {
    return kind == DisturbanceKind::kGust || kind == DisturbanceKind::kStepGust;
  }
  bool operator==(const DisturbanceSpec&) const = default;
};

struct NoiseSpec {
  double attitude_std_deg = 0.0;
  double position_std = 0.0;
  bool operator==(const NoiseSpec&) const = default;
};

struct GoalEntry {
  double time = 0.0;
  Pose pose;
  bool operator==(const GoalEntry& o) const {
    return time == o.time && pose.R == o.pose.R && pose.q == o.pose.q;
  }
};

struct AgentConfig {
  double mass = 1.3;
  Vec3 inertia = Vec3(0.02, 0.02, 0.04);  ///< principal moments, kg m^2
  AgentGeometry geometry;
  double K = 1.0;
  Pose initial;
  std::vector<GoalEntry> goals;
  DisturbanceSpec disturbance;

  Inertia inertia_operator() const { return Inertia::rigid_body(inertia, mass); }

  bool operator==(const AgentConfig& o) const {
    return mass == o.mass && inertia == o.inertia &&
           geometry.radius == o.geometry.radius &&
           geometry.camera_axis == o.geometry.camera_axis &&
           geometry.fov_half_angle == o.geometry.fov_half_angle && K == o.K &&
           initial.R == o.initial.R && initial.q == o.initial.q &&
           goals == o.goals && disturbance == o.disturbance;
  }
};

struct GpSettings {
  bool enabled = false;
  std::size_t capacity = 250;
  gp::KernelParams kernel;
  double delta = 0.9;
  double rkhs_bound = 1.0;
  int sample_period = 10;       ///< ticks between training samples
  std::size_t pool_size = 300;  ///< candidate states for the info-gain estimate
  bool fit_hyperparameters = false;
  int fit_budget = 200;

  bool operator==(const GpSettings& o) const {
    return enabled == o.enabled && capacity == o.capacity &&
           kernel.signal_variance == o.kernel.signal_variance &&
           kernel.lengthscale == o.kernel.lengthscale &&
           kernel.noise_variance == o.kernel.noise_variance &&
           delta == o.delta && rkhs_bound == o.rkhs_bound &&
           sample_period == o.sample_period && pool_size == o.pool_size &&
           fit_hyperparameters == o.fit_hyperparameters &&
           fit_budget == o.fit_budget;
  }
};

struct ScenarioConfig {
  std::string name = "scenario";
  NavParams nav;
  double c = 2.0;
  double dissipation = 0.5;
  double theta_epsilon = 1e-6;
  double fd_step = 1e-5;
  SimConfig sim;
  NoiseSpec noise;
  GpSettings gp;
  std::vector<AgentConfig> agents;

  int agent_count() const { return static_cast<int>(agents.size()); }

  /// Goal of agent i at time t: last schedule entry with time <= t (the
  /// first entry before it starts).
  const Pose& goal_at(int i, double t) const {
    const auto& g = agents[i].goals;
    std::size_t k = 0;
    while (k + 1 < g.size() && g[k + 1].time <= t) ++k;
    return g[k].pose;
  }

  /// All distinct goal-switch times across agents.
  std::vector<double> schedule_times() const {
    std::set<double> ts;
    for (const auto& a : agents) {
      for (const auto& e : a.goals) ts.insert(e.time);
    }
    return {ts.begin(), ts.end()};
  }

  std::vector<std::string> violations() const;
  void validate() const {
    auto v = violations();
    if (!v.empty()) throw ValidationError(std::move(v));
  }

  bool operator==(const ScenarioConfig& o) const {
    return name == o.name && nav.k == o.nav.k && nav.lambda == o.nav.lambda &&
           nav.sigma == o.nav.sigma && nav.X == o.nav.X && nav.a0 == o.nav.a0 &&
           nav.fov_avoidance == o.nav.fov_avoidance &&
           nav.sensing_radius == o.nav.sensing_radius &&
           nav.fov_range == o.nav.fov_range &&
           nav.obstacle_scale == o.nav.obstacle_scale && c == o.c &&
           dissipation == o.dissipation && theta_epsilon == o.theta_epsilon &&
           fd_step == o.fd_step && sim == o.sim && noise == o.noise &&
           gp == o.gp && agents == o.agents;
  }
};

namespace detail {

inline std::string agent_label(int i) { return "agent." + std::to_string(i); }

}  // namespace detail

inline std::vector<std::string> ScenarioConfig::violations() const {
  std::vector<std::string> v;
  const int s = agent_count();
  if (s < 1) v.push_back("at least one agent is required");
  if (s > kMaxAgents) v.push_back("at most 12 agents are supported");
  nav.collect_violations(v);

  double maxK = 0.0;
  for (int i = 0; i < s; ++i) {
    const auto& a = agents[i];
    const std::string who = detail::agent_label(i);
    if (!(a.mass > 0.0)) v.push_back(who + ".mass must be > 0");
    if (!(a.inertia.minCoeff() > 0.0)) v.push_back(who + ".inertia entries must be > 0");
    if (!(a.geometry.radius > 0.0)) v.push_back(who + ".radius must be > 0");
    if (!(a.geometry.fov_half_angle > 0.0 && a.geometry.fov_half_angle < M_PI / 2)) {
      v.push_back(who + ".fov_half_angle must be in (0, pi/2)");
    }
    if (std::abs(a.geometry.camera_axis.norm() - 1.0) > 1e-12) {
      v.push_back(who + ".camera_axis must be a unit vector");
    }
    if (!(a.K > 0.0)) v.push_back(who + ".K must be > 0");
    maxK = std::max(maxK, a.K);
    if (!lie::is_rotation(a.initial.R)) v.push_back(who + " initial rotation invalid");
    if (a.goals.empty()) v.push_back(who + " needs at least one goal");
    for (std::size_t k = 1; k < a.goals.size(); ++k) {
      if (!(a.goals[k].time > a.goals[k - 1].time)) {
        v.push_back(who + " goal schedule must be strictly time-sorted");
        break;
      }
    }
    const auto& d = a.disturbance;
    if (!(d.gust_speed >= 0.0)) v.push_back(who + ".disturbance.gust_speed must be >= 0");
    if (d.has_gust() && !(d.gust_bandwidth > 0.0)) {
      v.push_back(who + ".disturbance.gust_bandwidth must be > 0");
    }
    if (d.has_gust() && !(d.drag_coefficient >= 0.0)) {
      v.push_back(who + ".disturbance.drag must be >= 0");
    }
    if (!d.wrench.vector().allFinite()) {
      v.push_back(who + ".disturbance wrench must be finite");
    }
  }
  if (!(c > maxK)) v.push_back("gains.c must exceed max_i K_i");
  if (!(dissipation >= 0.0)) v.push_back("gains.dissipation must be >= 0");
  if (!(theta_epsilon > 0.0)) v.push_back("gains.theta_epsilon must be > 0");
  if (!(fd_step >= 1e-7 && fd_step <= 1e-3)) v.push_back("gains.fd_step must be in [1e-7, 1e-3]");

  if (!(sim.dt > 0.0)) v.push_back("sim.dt must be > 0");
  if (!(sim.t_end > 0.0)) v.push_back("sim.t_end must be > 0");
  if (sim.dt > sim.t_end) v.push_back("sim.dt must not exceed sim.t_end");
  if (sim.log_period < 1) v.push_back("sim.log_period must be >= 1");
  if (gp.enabled && sim.gp_engage_time > sim.t_end) {
    v.push_back("sim.gp_engage_time must not exceed sim.t_end");
  }
  if (!(noise.attitude_std_deg >= 0.0)) v.push_back("noise.attitude_std_deg must be >= 0");
  if (!(noise.position_std >= 0.0)) v.push_back("noise.position_std must be >= 0");

  if (gp.enabled) {
    if (gp.capacity == 0) v.push_back("gp.capacity must be > 0");
    if (!(gp.kernel.signal_variance > 0.0 && gp.kernel.lengthscale > 0.0 &&
          gp.kernel.noise_variance > 0.0)) {
      v.push_back("gp kernel parameters must be > 0");
    }
    if (!(gp.delta > 0.0 && gp.delta < 1.0)) v.push_back("gp.delta must lie in (0, 1)");
    if (!(gp.rkhs_bound >= 0.0)) v.push_back("gp.rkhs_bound must be >= 0");
    if (gp.sample_period < 1) v.push_back("gp.sample_period must be >= 1");
    if (gp.pool_size < 1) v.push_back("gp.pool_size must be >= 1");
  }

  if (!v.empty()) return v;

  // G_i > X on the initial configuration and on every scheduled goal set.
  std::vector<AgentGeometry> geo;
  for (const auto& a : agents) geo.push_back(a.geometry);
  std::vector<NavigationField> fields;
  for (int i = 0; i < s; ++i) fields.emplace_back(i, geo, nav);
  const auto check_set = [&](const std::vector<Pose>& poses, const std::string& what) {
    std::string offenders;
    for (int i = 0; i < s; ++i) {
      double G = 0.0;
      try {
        G = fields[i].obstacle(poses).G;
      } catch (const InvalidArgument&) {
        G = 0.0;
      }
      if (!(G > nav.X)) {
        offenders += (offenders.empty() ? "" : ", ") + detail::agent_label(i);
      }
    }
    if (!offenders.empty()) {
      v.push_back(what + ": obstacle function G <= X for " + offenders);
    }
  };
  std::vector<Pose> initial;
  for (const auto& a : agents) initial.push_back(a.initial);
  check_set(initial, "initial configuration");
  for (double t : schedule_times()) {
    std::vector<Pose> goals;
    for (int i = 0; i < s; ++i) goals.push_back(goal_at(i, t));
    char buf[64];
    std::snprintf(buf, sizeof buf, "goal set at t=%g", t);
    check_set(goals, buf);
  }
  return v;
}

}  // namespace se3nav
