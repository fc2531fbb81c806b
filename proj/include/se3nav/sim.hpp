#pragma once

// Closed-loop multi-agent simulation on SE(3).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "se3nav/control.hpp"
#include "se3nav/errors.hpp"
#include "se3nav/gp.hpp"
#include "se3nav/lie.hpp"
#include "se3nav/navigation.hpp"
#include "se3nav/rng.hpp"
#include "se3nav/scenario_config.hpp"

namespace se3nav {

struct AgentState {
  Pose g;
  Twist xi;
};

inline constexpr double kDivergenceTwist = 1e8;
inline constexpr double kRecommendedMaxDt = 0.01;

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

/// xi_dot = I^-1 (ad*_xi(I xi) + w) for a wrench w held over the step.
inline Twist twist_rate(const Twist& xi, const Wrench& w, const Inertia& M) {
  return M.solve(lie::ad_star(xi, M.apply(xi)) + w);
}

inline AgentState integrate(const AgentState& s, const Wrench& w,
                            const Inertia& M, double dt, Integrator scheme) {
  AgentState out;
  if (scheme == Integrator::kLieEuler) {
    out.g = lie::compose(s.g, lie::exp(s.xi, dt));
    out.xi = s.xi + dt * twist_rate(s.xi, w, M);
  } else {
    const double h = dt;
    const Twist& x1 = s.xi;
    const Twist F1 = twist_rate(x1, w, M);
    const Twist A1 = x1;
    const Twist x2 = x1 + 0.5 * h * F1;
    const Twist F2 = twist_rate(x2, w, M);
    const Twist A2 = lie::dexp_inv(0.5 * h * A1, x2);
    const Twist x3 = x1 + 0.5 * h * F2;
    const Twist F3 = twist_rate(x3, w, M);
    const Twist A3 = lie::dexp_inv(0.5 * h * A2, x3);
    const Twist x4 = x1 + h * F3;
    const Twist F4 = twist_rate(x4, w, M);
    const Twist A4 = lie::dexp_inv(h * A3, x4);
    const Twist theta = (h / 6.0) * (A1 + 2.0 * A2 + 2.0 * A3 + A4);
    out.g = lie::compose(s.g, lie::exp(theta));
    out.xi = x1 + (h / 6.0) * (F1 + 2.0 * F2 + 2.0 * F3 + F4);
  }
  if (lie::rotation_drift(out.g.R) > lie::kOrthoDrift) {
    out.g.R = lie::orthonormalize(out.g.R);
  }
  return out;
}

inline bool diverged(const AgentState& s) {
  return !s.g.R.allFinite() || !s.g.q.allFinite() ||
         !s.xi.vector().allFinite() || s.xi.vector().norm() > kDivergenceTwist;
}

/// One synchronous step of every agent. Controls and disturbances are held
/// constant over the step.
inline std::vector<AgentState> step(std::span<const AgentState> states,
                                    std::span<const Wrench> controls,
                                    std::span<const Wrench> disturbances,
                                    std::span<const Inertia> M,
                                    const SimConfig& config, long tick = 0) {
  if (controls.size() != states.size() || disturbances.size() != states.size() ||
      M.size() != states.size()) {
    throw InvalidArgument("step: per-agent inputs must have equal length");
  }
  std::vector<AgentState> next(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    next[i] = integrate(states[i], controls[i] + disturbances[i], M[i],
                        config.dt, config.integrator);
    if (diverged(next[i])) {
      throw IntegrationDiverged("integration diverged at agent " +
                                    std::to_string(i),
                                tick);
    }
  }
  return next;
}

// ---------------------------------------------------------------------------
// Disturbances and sensing
// ---------------------------------------------------------------------------

/// Ornstein-Uhlenbeck wind velocity (world frame), exact discretization.
/// The emitted wind is the state clamped to the gust speed.
class GustProcess {
 public:
  GustProcess() = default;
  GustProcess(const DisturbanceSpec& spec, std::mt19937_64 rng)
      : spec_(spec), rng_(std::move(rng)) {
    if (spec_.has_gust()) {
      state_ = stationary_std() * draw();
    }
  }

  void advance(double dt) {
    if (!spec_.has_gust()) return;
    const double rate = 2.0 * M_PI * spec_.gust_bandwidth;
    const double decay = std::exp(-rate * dt);
    state_ = decay * state_ +
             stationary_std() * std::sqrt(1.0 - decay * decay) * draw();
  }

  Vec3 wind() const {
    const double n = state_.norm();
    if (n > spec_.gust_speed && n > 0.0) return state_ * (spec_.gust_speed / n);
    return state_;
  }

 private:
  double stationary_std() const { return 0.5 * spec_.gust_speed; }
  Vec3 draw() {
    return Vec3(normal_(rng_), normal_(rng_), normal_(rng_));
  }

  DisturbanceSpec spec_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  Vec3 state_ = Vec3::Zero();
};

/// f_uk at time t: step wrench once t >= start, plus body-frame drag from
/// the relative wind for gust kinds.
inline Wrench eval_disturbance(const DisturbanceSpec& spec, double t,
                               const AgentState& state, const GustProcess& gust) {
  Wrench w;
  if (spec.has_step() && t >= spec.start) w = spec.wrench;
  if (spec.has_gust()) {
    const Vec3 rel = state.g.R.transpose() * gust.wind() - state.xi.v;
    w.force += spec.drag_coefficient * rel;
  }
  return w;
}

inline Pose apply_sensor_noise(const Pose& g, const NoiseSpec& spec,
                               std::mt19937_64& rng) {
  if (spec.attitude_std_deg == 0.0 && spec.position_std == 0.0) return g;
  std::normal_distribution<double> n01;
  const double sr = spec.attitude_std_deg * M_PI / 180.0;
  Vec3 er(n01(rng), n01(rng), n01(rng));
  Vec3 eq(n01(rng), n01(rng), n01(rng));
  Pose m;
  m.R = g.R * lie::so3_exp(sr * er);
  m.q = g.q + spec.position_std * eq;
  return m;
}

// ---------------------------------------------------------------------------
// Episode log
// ---------------------------------------------------------------------------

struct LogRow {
  long tick = 0;
  double t = 0.0;
  int agent = 0;
  Pose pose;
  Pose measured;
  Twist xi;
  Wrench u;
  Wrench disturbance;
  Wrench gp_mean;
  double error_bound = 0.0;
  double psi = 0.0;
  double V = 0.0;
  double min_dist = 0.0;
};

/// Full-cadence per-agent diagnostics used by the metrics.
struct TickSample {
  double gamma_d = 0.0;
  double attitude_error = 0.0;  ///< rotation angle to the goal, radians
  double min_dist = 0.0;
  double residual_error = std::numeric_limits<double>::quiet_NaN();
  double error_bound = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t generation = 0;
};

struct EpisodeLog {
  int agent_count = 0;
  double dt = 0.0;
  long ticks = 0;  ///< number of integrated steps; ticks 0..ticks are logged
  int log_period = 1;
  std::vector<LogRow> rows;
  std::vector<double> V;               ///< per tick
  std::vector<TickSample> samples;     ///< tick-major, agent-minor
  std::vector<std::string> warnings;
  std::vector<gp::Dataset> datasets;   ///< final per-agent datasets

  const TickSample& sample(long tick, int agent) const {
    return samples[static_cast<std::size_t>(tick) * agent_count + agent];
  }
};

// ---------------------------------------------------------------------------
// Episode runner
// ---------------------------------------------------------------------------

struct RunOptions {
  int threads = 1;
  double diagnostics_refresh = 1.0;  ///< seconds between pre-engage GP refits
};

namespace detail {

inline double rotation_angle(const Mat3& R, const Mat3& Rd) {
  const double c = std::clamp(0.5 * ((Rd.transpose() * R).trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

/// Per-agent learning state: rolling window for the filtered derivative,
/// dataset, candidate pool, and cached posterior.
struct Learner {
  struct Entry {
    Pose measured;
    Twist xi;
    Wrench u;
  };
  explicit Learner(std::size_t capacity) : data(capacity) {}

  gp::Dataset data;
  std::vector<Entry> window;  ///< last 5 ticks
  std::vector<gp::State> pool;
  std::size_t pool_head = 0;
  std::unique_ptr<gp::Posterior> posterior;
  Vec6 beta = Vec6::Zero();
  double refreshed_at = -1e300;
  gp::KernelParams kernel;
  bool fitted = false;
};

}  // namespace detail

class EpisodeRunner {
 public:
  EpisodeRunner(const ScenarioConfig& config, RunOptions options = {})
      : cfg_(config), opt_(options) {
    cfg_.validate();
    n_ = cfg_.agent_count();
    std::vector<AgentGeometry> geo;
    for (const auto& a : cfg_.agents) geo.push_back(a.geometry);
    for (int i = 0; i < n_; ++i) {
      fields_.emplace_back(i, geo, cfg_.nav);
      M_.push_back(cfg_.agents[i].inertia_operator());
      gains_.emplace_back(cfg_.agents[i].K, cfg_.c, cfg_.dissipation,
                          cfg_.theta_epsilon);
      gains_.back().hold_time = cfg_.sim.dt;
      K_.push_back(cfg_.agents[i].K);
      noise_rng_.push_back(substream(cfg_.sim.seed, "noise", i));
      gust_.emplace_back(cfg_.agents[i].disturbance,
                         substream(cfg_.sim.seed, "gust", i));
      learners_.emplace_back(cfg_.gp.capacity);
      learners_.back().kernel = cfg_.gp.kernel;
    }
  }

  EpisodeLog run() {
    const double dt = cfg_.sim.dt;
    const long n_ticks = cfg_.sim.tick_count();
    EpisodeLog log;
    log.agent_count = n_;
    log.dt = dt;
    log.ticks = n_ticks;
    log.log_period = cfg_.sim.log_period;
    if (dt > kRecommendedMaxDt) {
      log.warnings.push_back("sim.dt exceeds the recommended maximum of 0.01 s");
    }
    log.V.reserve(static_cast<std::size_t>(n_ticks + 1));
    log.samples.reserve(static_cast<std::size_t>(n_ticks + 1) * n_);

    std::vector<AgentState> state(n_);
    for (int i = 0; i < n_; ++i) state[i].g = cfg_.agents[i].initial;

    std::vector<Pose> true_poses(n_), measured(n_), goals(n_);
    std::vector<Twist> twists(n_);
    std::vector<ControlOutput> ctrl(n_);
    std::vector<Wrench> u(n_), dist(n_);
    std::vector<std::exception_ptr> errors(n_);

    for (long k = 0; k <= n_ticks; ++k) {
      const double t = static_cast<double>(k) * dt;
      const bool log_row = k % cfg_.sim.log_period == 0 || k == n_ticks;
      const bool engaged = cfg_.gp.enabled && t >= cfg_.sim.gp_engage_time;

      // (1) snapshot, (2) sensing
      for (int i = 0; i < n_; ++i) {
        true_poses[i] = state[i].g;
        twists[i] = state[i].xi;
        goals[i] = cfg_.goal_at(i, t);
        measured[i] = apply_sensor_noise(state[i].g, cfg_.noise, noise_rng_[i]);
      }

      // refresh models outside the parallel region
      if (cfg_.gp.enabled) {
        for (int i = 0; i < n_; ++i) {
          if (engaged) {
            refresh_model(i, t, true);
          } else if (log_row) {
            refresh_model(i, t, false);
          }
        }
      }

      // (3) control from the measured snapshot
      parallel_for([&](int i) {
        try {
          const AgentView view{measured, twists, goals[i]};
          if (engaged && learners_[i].posterior) {
            ctrl[i] = learning_control(fields_[i], view, gains_[i], M_[i],
                                       LearnedModel{learners_[i].posterior.get(),
                                                    learners_[i].beta},
                                       measured[i], cfg_.fd_step);
          } else {
            ctrl[i] = nominal_control(fields_[i], view, gains_[i], M_[i],
                                      cfg_.fd_step);
            if (cfg_.gp.enabled && log_row && learners_[i].posterior) {
              const auto pred = learners_[i].posterior->predict(
                  gp::encode(measured[i], twists[i]));
              ctrl[i].gp_mean = Wrench::from_vector(pred.mean);
              ctrl[i].error_bound = gp::error_bound(pred, learners_[i].beta);
            }
          }
          dist[i] = eval_disturbance(cfg_.agents[i].disturbance, t, state[i],
                                     gust_[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
      rethrow_first(errors, k);
      for (int i = 0; i < n_; ++i) u[i] = ctrl[i].u;

      // (4) learning
      if (cfg_.gp.enabled) {
        for (int i = 0; i < n_; ++i) record_sample(i, k, measured[i], twists[i], u[i]);
      }

      // diagnostics on the true state
      double V = 0.0;
      std::vector<double> psi_true(n_);
      for (int i = 0; i < n_; ++i) {
        try {
          psi_true[i] = fields_[i].potential(true_poses, goals[i]);
        } catch (const DegenerateConfiguration& e) {
          throw DegenerateConfiguration(e.what(), i, k);
        }
        V += K_[i] * psi_true[i] + 0.5 * M_[i].metric(twists[i], twists[i]);
      }
      log.V.push_back(V);
      for (int i = 0; i < n_; ++i) {
        TickSample s;
        s.gamma_d = goal_distance(true_poses[i], goals[i]);
        s.attitude_error = detail::rotation_angle(true_poses[i].R, goals[i].R);
        s.min_dist = min_distance(true_poses, i);
        s.generation = learners_[i].data.generation();
        if (engaged && learners_[i].posterior) {
          s.error_bound = ctrl[i].error_bound;
          s.residual_error = (dist[i] - ctrl[i].gp_mean).vector().norm();
        }
        log.samples.push_back(s);
        if (log_row) {
          LogRow r;
          r.tick = k;
          r.t = t;
          r.agent = i;
          r.pose = true_poses[i];
          r.measured = measured[i];
          r.xi = twists[i];
          r.u = u[i];
          r.disturbance = dist[i];
          r.gp_mean = ctrl[i].gp_mean;
          r.error_bound = ctrl[i].error_bound;
          r.psi = psi_true[i];
          r.V = V;
          r.min_dist = s.min_dist;
          log.rows.push_back(r);
        }
      }
      if (k == n_ticks) break;

      // (5) integrate
      state = step(state, u, dist, M_, cfg_.sim, k);
      for (int i = 0; i < n_; ++i) gust_[i].advance(dt);
    }
    for (const auto& l : learners_) log.datasets.push_back(l.data);
    return log;
  }

 private:
  template <class F>
  void parallel_for(F&& f) {
#ifdef _OPENMP
    if (opt_.threads > 1) {
#pragma omp parallel for num_threads(opt_.threads) schedule(static)
      for (int i = 0; i < n_; ++i) f(i);
      return;
    }
#endif
    for (int i = 0; i < n_; ++i) f(i);
  }

  static void rethrow_first(std::vector<std::exception_ptr>& errors, long tick) {
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (!errors[i]) continue;
      auto e = errors[i];
      errors[i] = nullptr;
      try {
        std::rethrow_exception(e);
      } catch (const DegenerateConfiguration& d) {
        throw DegenerateConfiguration(d.what(), static_cast<int>(i), tick);
      }
    }
  }

  static double min_distance(std::span<const Pose> poses, int i) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < poses.size(); ++j) {
      if (static_cast<int>(j) == i) continue;
      m = std::min(m, (poses[j].q - poses[i].q).norm());
    }
    return m;
  }

  /// Filtered training target at the window centre from the forward
  /// differences around it, weights (2, 3, 3, 2) / 10.
  void record_sample(int i, long k, const Pose& meas, const Twist& xi,
                     const Wrench& u) {
    auto& L = learners_[i];
    L.window.push_back({meas, xi, u});
    if (L.window.size() > 5) L.window.erase(L.window.begin());
    if (L.window.size() < 5) return;
    const long c = k - 2;
    if (c % cfg_.gp.sample_period != 0) return;
    const double tc = static_cast<double>(c) * cfg_.sim.dt;
    if (tc >= cfg_.sim.gp_freeze_time) return;
    static constexpr double w[4] = {0.2, 0.3, 0.3, 0.2};
    Vec6 y = Vec6::Zero();
    for (int j = 0; j < 4; ++j) {
      const auto& a = L.window[j];
      const auto& b = L.window[j + 1];
      const Twist rate = (1.0 / cfg_.sim.dt) * (b.xi - a.xi);
      y += w[j] * gp::assemble_output(rate, a.xi, a.u, M_[i]).vector();
    }
    const auto& centre = L.window[2];
    const gp::State x = gp::encode(centre.measured, centre.xi);
    L.data.update({x, y}, tc, cfg_.sim.gp_freeze_time);
    if (L.pool.size() < cfg_.gp.pool_size) {
      L.pool.push_back(x);
    } else {
      L.pool[L.pool_head] = x;
      L.pool_head = (L.pool_head + 1) % L.pool.size();
    }
  }

  void refresh_model(int i, double t, bool engaged) {
    auto& L = learners_[i];
    if (L.data.empty()) return;
    if (L.posterior && L.posterior->generation() == L.data.generation()) return;
    if (!engaged && t - L.refreshed_at < opt_.diagnostics_refresh) return;
    const bool frozen = t >= cfg_.sim.gp_freeze_time;
    if (cfg_.gp.fit_hyperparameters && frozen && !L.fitted &&
        L.data.size() >= 5) {
      L.kernel = gp::fit_hyperparameters(L.data, cfg_.gp.kernel, cfg_.gp.fit_budget,
                                         substream(cfg_.sim.seed, "gp-fit", i)())
                     .params;
      L.fitted = true;
    }
    L.posterior = std::make_unique<gp::Posterior>(L.data, L.kernel);
    gp::BoundParams b;
    b.delta = cfg_.gp.delta;
    b.rkhs_bound.setConstant(cfg_.gp.rkhs_bound);
    const std::size_t picks = std::min(L.data.size() + 1, L.pool.size());
    b.info_gain.setConstant(gp::info_gain_greedy(L.pool, picks, L.kernel));
    L.beta = gp::beta_bound(L.data.size(), b);
    L.refreshed_at = t;
  }

  ScenarioConfig cfg_;
  RunOptions opt_;
  int n_ = 0;
  std::vector<NavigationField> fields_;
  std::vector<Inertia> M_;
  std::vector<Gains> gains_;
  std::vector<double> K_;
  std::vector<std::mt19937_64> noise_rng_;
  std::vector<GustProcess> gust_;
  std::vector<detail::Learner> learners_;
};

inline EpisodeLog run_episode(const ScenarioConfig& config, RunOptions options = {}) {
  return EpisodeRunner(config, options).run();
}

}  // namespace se3nav
