#pragma once

// Bundled scenarios.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "se3nav/scenario_config.hpp"

namespace se3nav::presets {

/// Waypoints of the seven-vehicle filming mission, metres.
inline const std::array<Vec3, 7>& uav_waypoints() {
  static const std::array<Vec3, 7> q = {
      Vec3(130, -40, 10), Vec3(140, -40, 10), Vec3(140, -50, 10), Vec3(140, -60, 10),
      Vec3(130, -60, 15), Vec3(130, -50, 15), Vec3(130, -20, 0)};
  return q;
}

/// Seven quadrotor-sized rigid bodies cycling through the waypoints every
/// 8 s, with attitude and position noise, gusts on every vehicle, a step
/// wrench on vehicle 2 from t = 50 s and GP compensation from t = 80 s.
/// Gains, radii and disturbance magnitudes are calibration constants.
inline ScenarioConfig paper_7uav() {
  ScenarioConfig c;
  c.name = "paper_7uav";
  c.nav.k = 1.0;
  c.nav.lambda = 1.0;
  c.nav.sigma = 1.0;
  c.nav.X = 0.1;
  c.nav.a0 = 0.05;
  c.nav.sensing_radius = 2.5;
  c.nav.obstacle_scale = 1000.0;
  c.nav.fov_avoidance = false;
  c.nav.fov_range = 12.0;
  c.c = 4725.0;
  c.dissipation = 2.0;
  c.theta_epsilon = 1e-6;
  c.fd_step = 1e-5;

  c.sim.dt = 1e-3;
  c.sim.t_end = 144.0;
  c.sim.integrator = Integrator::kRkmk4;
  c.sim.seed = 1;
  c.sim.gp_freeze_time = 80.0;
  c.sim.gp_engage_time = 80.0;
  c.sim.log_period = 20;

  c.noise.attitude_std_deg = 0.5;
  c.noise.position_std = 1.0;

  c.gp.enabled = true;
  c.gp.capacity = 250;
  c.gp.kernel = gp::KernelParams{4.0, 30.0, 0.25};
  c.gp.delta = 0.9;
  c.gp.rkhs_bound = 1.0;
  c.gp.sample_period = 100;
  c.gp.pool_size = 300;

  const auto& q = uav_waypoints();
  const int rotations = 17;
  for (int i = 0; i < 7; ++i) {
    AgentConfig a;
    a.mass = 1.3;
    a.inertia = Vec3(0.02, 0.02, 0.04);
    a.geometry.radius = 0.75;
    a.geometry.camera_axis = Vec3::UnitX();
    a.geometry.fov_half_angle = M_PI / 6.0;
    a.K = 4500.0;
    a.initial = Pose{Mat3::Identity(), q[i]};
    for (int r = 0; r <= rotations; ++r) {
      a.goals.push_back({8.0 * r, Pose{Mat3::Identity(), q[(i + r) % 7]}});
    }
    a.disturbance.kind = DisturbanceKind::kGust;
    a.disturbance.gust_speed = 5.0;
    a.disturbance.gust_bandwidth = 0.2;
    a.disturbance.drag_coefficient = 0.3;
    if (i == 1) {
      a.disturbance.kind = DisturbanceKind::kStepGust;
      a.disturbance.wrench = Wrench{Vec3(0.3, 0, 0), Vec3(2.0, 0, 0)};
      a.disturbance.start = 50.0;
    }
    c.agents.push_back(a);
  }
  return c;
}

/// Comments for the bundled config file, keyed by "section.key".
inline std::map<std::string, std::string> paper_7uav_notes() {
  std::map<std::string, std::string> n = {
      {"nav.sensing_radius", "calibration constant: neighbor sensing radius, m"},
      {"nav.obstacle_scale", "calibration constant: G with no neighbor sensed"},
      {"gains.c", "calibration constant: must exceed every K"},
      {"gains.dissipation", "calibration constant"},
      {"sim.t_end", "18 goal intervals of 8 s"},
      {"gp.signal_variance", "calibration constant: kernel prior"},
      {"gp.lengthscale", "calibration constant: kernel prior"},
      {"gp.noise_variance", "calibration constant: kernel prior"},
      {"gp.rkhs_bound", "calibration constant: RKHS norm bound per output"},
  };
  for (int i = 0; i < 7; ++i) {
    const std::string a = "agent." + std::to_string(i) + ".";
    n[a + "radius"] = "derived: r_i + r_j equals the 1.5 m activation distance";
    n[a + "fov_half_angle"] = "calibration constant: camera half-angle, rad";
    n[a + "K"] = "calibration constant";
    n[a + "gust_bandwidth"] = "calibration constant: OU corner frequency, Hz";
    n[a + "drag_coefficient"] = "calibration constant: N per m/s";
  }
  n["agent.1.disturbance_torque"] = "calibration constant: step torque, N m";
  n["agent.1.disturbance_force"] = "calibration constant: step force, N";
  return n;
}

namespace detail {

inline ScenarioConfig small_scenario(const std::string& name, double t_end) {
  ScenarioConfig c;
  c.name = name;
  c.nav.sensing_radius = 4.0;
  c.nav.obstacle_scale = 10.0;
  c.c = 105.0;
  c.dissipation = 2.0;
  c.sim.t_end = t_end;
  c.sim.log_period = 10;
  return c;
}

inline AgentConfig simple_agent(const Vec3& start, const Vec3& goal) {
  AgentConfig a;
  a.K = 100.0;
  a.initial = Pose{Mat3::Identity(), start};
  a.goals.push_back({0.0, Pose{Mat3::Identity(), goal}});
  return a;
}

}  // namespace detail

/// One agent displaced 2 m from its goal; no noise or disturbance.
inline ScenarioConfig single_agent() {
  ScenarioConfig c = detail::small_scenario("single_agent", 30.0);
  c.agents.push_back(detail::simple_agent(Vec3(2, 0, 0), Vec3::Zero()));
  return c;
}

/// Two agents exchanging sides along x. The goals are antipodal; the starts
/// are offset by 1 m in y so the exchange is not exactly collinear.
inline ScenarioConfig two_agent_swap() {
  ScenarioConfig c = detail::small_scenario("two_agent_swap", 30.0);
  c.agents.push_back(detail::simple_agent(Vec3(-3, -1, 0), Vec3(3, 0, 0)));
  c.agents.push_back(detail::simple_agent(Vec3(3, 1, 0), Vec3(-3, 0, 0)));
  return c;
}

/// Three agents on a 3 m circle, each moving to the next agent's start.
inline ScenarioConfig three_agent_rotation() {
  ScenarioConfig c = detail::small_scenario("three_agent_rotation", 30.0);
  std::array<Vec3, 3> p;
  for (int i = 0; i < 3; ++i) {
    const double a = 2.0 * M_PI * i / 3.0;
    p[i] = Vec3(3.0 * std::cos(a), 3.0 * std::sin(a), 0.0);
  }
  for (int i = 0; i < 3; ++i) c.agents.push_back(detail::simple_agent(p[i], p[(i + 1) % 3]));
  return c;
}

inline std::vector<std::string> names() {
  return {"paper_7uav", "single_agent", "two_agent_swap", "three_agent_rotation"};
}

inline std::optional<ScenarioConfig> by_name(const std::string& name) {
  if (name == "paper_7uav") return paper_7uav();
  if (name == "single_agent") return single_agent();
  if (name == "two_agent_swap") return two_agent_swap();
  if (name == "three_agent_rotation") return three_agent_rotation();
  return std::nullopt;
}

}  // namespace se3nav::presets
