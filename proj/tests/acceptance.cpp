// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "se3nav/config_io.hpp"
#include "se3nav/control.hpp"
#include "se3nav/episode_io.hpp"
#include "se3nav/gp.hpp"
#include "se3nav/lie.hpp"
#include "se3nav/metrics.hpp"
#include "se3nav/navigation.hpp"
#include "se3nav/presets.hpp"
#include "se3nav/sha256.hpp"
#include "se3nav/sim.hpp"

using namespace se3nav;
namespace t = se3nav::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  /// Records "name=value (requirement)" and folds ok into the verdict.
  void check(const std::string& name, double value, const std::string& requirement, bool ok) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", value);
    add(name + "=" + buf + " (" + requirement + (ok ? ")" : ", FAILED)"));
    pass = pass && ok;
  }
  void below(const std::string& name, double value, double limit) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "< %g", limit);
    check(name, value, buf, value < limit);
  }
  void flag(const std::string& name, bool ok) {
    add(name + (ok ? "" : " FAILED"));
    pass = pass && ok;
  }
  void add(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string csv_of(const EpisodeLog& log) {
  std::ostringstream os;
  write_episode_csv(os, log);
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. Lie-group suite
// ---------------------------------------------------------------------------

Eigen::Matrix<double, 6, 6> ad_matrix(const Twist& x) {
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
  A.topLeftCorner<3, 3>() = lie::hat(x.omega);
  A.bottomLeftCorner<3, 3>() = lie::hat(x.v);
  A.bottomRightCorner<3, 3>() = lie::hat(x.omega);
  return A;
}

Outcome lie_suite() {
  Outcome o;
  std::mt19937_64 rng(101);
  double axioms = 0, exp_log = 0, exp_series = 0, hat_vee = 0, duality = 0, jacobi = 0;
  for (int k = 0; k < 10000; ++k) {
    const Pose a = t::rand_pose(rng), b = t::rand_pose(rng), c = t::rand_pose(rng);
    axioms = std::max(axioms, t::max_abs(lie::compose(lie::compose(a, b), c).matrix() -
                                         lie::compose(a, lie::compose(b, c)).matrix()));
    axioms = std::max(axioms, t::max_abs(lie::compose(a, lie::inverse(a)).matrix() -
                                         Mat4::Identity()));
    axioms = std::max(axioms, t::max_abs(lie::compose(Pose{}, a).matrix() - a.matrix()));

    Twist xi = t::rand_twist(rng);
    if (xi.omega.norm() > 3.0) xi.omega *= 3.0 / xi.omega.norm();
    exp_log = std::max(exp_log, t::max_abs(lie::log(lie::exp(xi)).vector() - xi.vector()));
    exp_log = std::max(exp_log, t::max_abs(lie::exp(lie::log(a)).matrix() - a.matrix()));
    exp_series = std::max(exp_series,
                          t::max_abs(lie::exp(xi).matrix() - t::series_exp(lie::embed(xi), 40)));

    const Vec3 w = t::rand3(rng);
    const Mat3 W = lie::hat(w);
    hat_vee = std::max(hat_vee, t::max_abs(lie::vee(W) - w));
    hat_vee = std::max(hat_vee, t::max_abs(W + W.transpose()));

    const Twist x = t::rand_twist(rng), y = t::rand_twist(rng), z = t::rand_twist(rng);
    const Wrench m = t::rand_wrench(rng);
    duality = std::max(duality, std::abs(pairing(lie::ad_star(x, m), y) -
                                         pairing(m, lie::ad(x, y))));
    duality = std::max(duality, t::max_abs(lie::ad(x, y).vector() - ad_matrix(x) * y.vector()));
    duality = std::max(duality, t::max_abs(lie::ad_star(x, m).vector() -
                                           ad_matrix(x).transpose() * m.vector()));
    jacobi = std::max(jacobi, t::max_abs((lie::ad(x, lie::ad(y, z)) + lie::ad(y, lie::ad(z, x)) +
                                          lie::ad(z, lie::ad(x, y)))
                                             .vector()));
  }
  o.below("group axioms", axioms, 1e-9);
  o.below("exp/log roundtrip", exp_log, 1e-9);
  o.below("exp vs series", exp_series, 1e-9);
  o.check("hat/vee", hat_vee, "exact", hat_vee == 0.0);
  o.below("ad*/ad duality", duality, 1e-12);
  o.below("Jacobi", jacobi, 1e-10);
  return o;
}

// ---------------------------------------------------------------------------
// 2. Free rigid body
// ---------------------------------------------------------------------------

const Inertia kBody = Inertia::rigid_body(Vec3(0.02, 0.02, 0.04), 1.3);

AgentState body_start() {
  AgentState s;
  s.xi = Twist{Vec3(1.0, 0.5, -0.7), Vec3(0.3, -0.2, 0.1)};
  return s;
}

AgentState run_free(double dt, double t_end, Integrator scheme) {
  AgentState s = body_start();
  const long n = std::lround(t_end / dt);
  for (long k = 0; k < n; ++k) s = integrate(s, Wrench{}, kBody, dt, scheme);
  return s;
}

double state_error(const AgentState& a, const AgentState& b) {
  return lie::log(lie::compose(lie::inverse(b.g), a.g)).vector().norm() +
         (a.xi.vector() - b.xi.vector()).norm();
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = std::log(xs[k]), y = std::log(ys[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome rigid_body() {
  Outcome o;
  AgentState s = body_start();
  const double e0 = 0.5 * kBody.metric(s.xi, s.xi);
  double drift = 0.0;
  for (int k = 0; k < 10000; ++k) {
    s = integrate(s, Wrench{}, kBody, 1e-3, Integrator::kRkmk4);
    drift = std::max(drift, std::abs(0.5 * kBody.metric(s.xi, s.xi) - e0) / e0);
  }
  o.below("energy drift", drift, 1e-6);

  const double t_end = 2.0;
  const AgentState ref = run_free(1e-5, t_end, Integrator::kRkmk4);
  const std::vector<double> dts = {0.04, 0.02, 0.01, 0.005};
  std::vector<double> euler, rk;
  for (double dt : dts) {
    euler.push_back(state_error(run_free(dt, t_end, Integrator::kLieEuler), ref));
    rk.push_back(state_error(run_free(dt, t_end, Integrator::kRkmk4), ref));
  }
  const double se = loglog_slope(dts, euler), sr = loglog_slope(dts, rk);
  o.check("lie-euler slope", se, "1 +- 0.3", std::abs(se - 1.0) <= 0.3);
  o.check("rkmk4 slope", sr, "4 +- 0.3", std::abs(sr - 4.0) <= 0.3);
  return o;
}

// ---------------------------------------------------------------------------
// 3. Navigation function
// ---------------------------------------------------------------------------

double richardson(const NavigationField& f, std::vector<Pose> poses, const Pose& goal,
                  const Twist& eta, double h) {
  const Pose base = poses[0];
  const auto D = [&](double s) {
    poses[0] = lie::compose(base, lie::exp(eta, s));
    const double p = f.potential(poses, goal);
    poses[0] = lie::compose(base, lie::exp(eta, -s));
    const double m = f.potential(poses, goal);
    return (p - m) / (2.0 * s);
  };
  return (4.0 * D(h / 2) - D(h)) / 3.0;
}

Outcome navigation() {
  Outcome o;
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(-4, 4);
  std::uniform_real_distribution<double> kd(1, 4);
  double lo = 1.0, hi = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int s = 1 + trial % 5;
    std::vector<AgentGeometry> geo(static_cast<std::size_t>(s));
    std::vector<Pose> poses;
    for (int i = 0; i < s; ++i) {
      poses.push_back({lie::so3_exp(t::rand3(rng)), Vec3(u(rng), u(rng), u(rng))});
    }
    NavParams p;
    p.k = kd(rng);
    if (trial % 2) p.sensing_radius = 3.0;
    const double psi = NavigationField(trial % s, geo, p).potential(poses, t::rand_pose(rng, 3.0));
    lo = std::min(lo, psi);
    hi = std::max(hi, psi);
  }
  o.check("psi min", lo, ">= 0", lo >= 0.0);
  o.check("psi max", hi, "<= 1", hi <= 1.0);

  NavParams c1;
  c1.X = 1.0;
  double f_max = 0.0, df_max = 0.0;
  for (double e : {-1e-6, 1e-6}) {
    f_max = std::max(f_max, std::abs(correction(c1.X + e, c1)));
    df_max = std::max(df_max, std::abs(correction_slope(c1.X + e, c1)));
  }
  o.below("|f| at X=1 +- 1e-6", f_max, 1e-6);
  o.below("|f'| at X=1 +- 1e-6", df_max, 1e-6);

  bool counts = true;
  for (int s = 2; s <= 8; ++s) {
    for (int i = 0; i < s; ++i) {
      counts = counts && build_relation_tree(i, s).size() == (std::size_t{1} << (s - 1)) - 1;
    }
  }
  o.flag("tree counts 2^(s-1)-1 for s=2..8", counts);

  double worst = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int s = 2 + trial % 3;
    std::vector<AgentGeometry> geo(static_cast<std::size_t>(s));
    NavParams p;
    if (trial % 2) {
      p.sensing_radius = 4.0;
      p.obstacle_scale = 10.0;
    }
    std::vector<Pose> poses;
    std::uniform_real_distribution<double> w(-3, 3);
    while (static_cast<int>(poses.size()) < s) {
      const Pose c{lie::so3_exp(t::rand3(rng, 0.5)), Vec3(w(rng), w(rng), w(rng))};
      bool ok = true;
      for (const auto& q : poses) ok = ok && (q.q - c.q).norm() > 1.8;
      if (ok) poses.push_back(c);
    }
    const NavigationField f(0, geo, p);
    if (std::abs(f.obstacle(poses).G - p.X) < 1e-2) continue;
    const Pose goal = t::rand_pose(rng, 3.0);
    const Twist eta = t::rand_twist(rng);
    const double analytic = pairing(f.gradient(poses, goal, 1e-5), eta);
    const double oracle = richardson(f, poses, goal, eta, 1e-3);
    worst = std::max(worst, std::abs(analytic - oracle) / std::max(std::abs(oracle), 1e-3));
    ++checked;
  }
  o.below("gradient rel. error (" + std::to_string(checked) + " configs)", worst, 1e-5);
  return o;
}

// ---------------------------------------------------------------------------
// 4. Nominal swap
// ---------------------------------------------------------------------------

Outcome nominal_swap() {
  Outcome o;
  const ScenarioConfig cfg = presets::two_agent_swap();
  const EpisodeLog log = run_episode(cfg);
  double rise = 0.0;
  for (std::size_t k = 1; k < log.V.size(); ++k) rise = std::max(rise, log.V[k] - log.V[k - 1]);
  const MetricsReport m = compute_metrics(log, cfg);
  const double rsum = cfg.agents[0].geometry.radius + cfg.agents[1].geometry.radius;
  double gamma = 0.0;
  for (const auto& a : m.agents) gamma = std::max(gamma, a.final_gamma);
  o.check("max V rise per step", rise, "<= 1e-6", rise <= 1e-6);
  o.check("min distance", m.min_distance, "> r_i + r_j = " + std::to_string(rsum).substr(0, 4), m.min_distance > rsum);
  o.below("final gamma_d at 30 s", gamma, 1e-2);
  return o;
}

// ---------------------------------------------------------------------------
// 5. GP oracle
// ---------------------------------------------------------------------------

gp::State rand_state(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n;
  gp::State x;
  for (int c = 0; c < gp::kStateDim; ++c) x(c) = scale * n(rng);
  return x;
}

double kernel(const gp::State& a, const gp::State& b, const gp::KernelParams& p) {
  return p.signal_variance *
         std::exp(-(a - b).squaredNorm() / (2.0 * p.lengthscale * p.lengthscale));
}

Outcome gp_oracle() {
  Outcome o;
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> logp(-1.0, 1.0);
  std::normal_distribution<double> nd;
  double err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const gp::KernelParams p{std::exp(logp(rng)), std::exp(logp(rng)), 0.01 * std::exp(logp(rng))};
    const int n = 1 + trial % 10;
    gp::Dataset d(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      gp::TrainingPair tp{rand_state(rng, 1.0), Vec6()};
      for (int c = 0; c < 6; ++c) tp.y(c) = nd(rng);
      d.update(tp, 0.0, 1.0);
    }
    Eigen::MatrixXd K(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) K(a, b) = kernel(d[a].x, d[b].x, p) + (a == b ? p.noise_variance : 0.0);
    }
    const gp::Posterior post(d, p);
    for (int q = 0; q < 5; ++q) {
      const gp::State x = rand_state(rng, 1.0);
      Eigen::VectorXd ks(n);
      for (int a = 0; a < n; ++a) ks(a) = kernel(x, d[a].x, p);
      const Eigen::VectorXd w = K.fullPivLu().solve(ks);
      const gp::Prediction pr = post.predict(x);
      for (int j = 0; j < 6; ++j) {
        double mean = 0.0;
        for (int a = 0; a < n; ++a) mean += w(a) * d[a].y(j);
        err = std::max(err, std::abs(mean - pr.mean(j)));
        err = std::max(err, std::abs(p.signal_variance - ks.dot(w) - pr.variance(j)));
      }
    }
  }
  o.below("posterior vs dense solve", err, 1e-10);

  double margin = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const gp::KernelParams p{std::exp(logp(rng)), std::exp(logp(rng)), 0.01 * std::exp(logp(rng))};
    std::vector<gp::State> xs(static_cast<std::size_t>(2 + trial % 49));
    for (auto& x : xs) x = rand_state(rng, 0.1);
    const Eigen::MatrixXd G = gp::gram_matrix(xs, p);
    const double ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().minCoeff();
    margin = std::min(margin, ev / p.noise_variance);
  }
  o.check("min eig / sigma^2", margin, ">= 1", margin >= 1.0 - 1e-9);

  bool monotone = true;
  for (int trial = 0; trial < 50; ++trial) {
    const gp::KernelParams p{1.0, std::exp(logp(rng)), 0.01};
    std::vector<gp::State> probes(20);
    for (auto& x : probes) x = rand_state(rng, 1.0);
    gp::Dataset d(40);
    std::vector<double> prev(probes.size(), p.signal_variance);
    for (int k = 0; k < 40; ++k) {
      gp::TrainingPair tp{rand_state(rng, 1.0), Vec6()};
      for (int c = 0; c < 6; ++c) tp.y(c) = nd(rng);
      d.update(tp, 0.0, 1.0);
      const gp::Posterior post(d, p);
      for (std::size_t q = 0; q < probes.size(); ++q) {
        const double v = post.predict(probes[q]).variance(0);
        monotone = monotone && v <= prev[q] + 1e-12;
        prev[q] = v;
      }
    }
  }
  o.flag("variance nonincreasing under data growth", monotone);
  return o;
}

// ---------------------------------------------------------------------------
// 6. Bound coverage
// ---------------------------------------------------------------------------

Outcome coverage() {
  Outcome o;
  std::mt19937_64 rng(606);
  std::normal_distribution<double> nd;
  const gp::KernelParams truth{1.0, 1.0, 0.01};
  std::vector<gp::State> centers(20);
  for (auto& c : centers) c = rand_state(rng, 0.5);
  gp::KernelParams noiseless = truth;
  noiseless.noise_variance = 1e-12;
  const Eigen::MatrixXd Kc = gp::gram_matrix(centers, noiseless);
  Eigen::MatrixXd alpha(20, 6);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 6; ++c) alpha(r, c) = nd(rng);
  }
  for (int j = 0; j < 6; ++j) alpha.col(j) /= std::sqrt(alpha.col(j).dot(Kc * alpha.col(j)));
  const auto f = [&](const gp::State& x) {
    Eigen::VectorXd k(20);
    for (int m = 0; m < 20; ++m) k(m) = kernel(x, centers[m], truth);
    return Vec6(alpha.transpose() * k);
  };

  gp::Dataset d(100);
  for (int n = 0; n < 100; ++n) {
    const gp::State x = rand_state(rng, 0.5);
    Vec6 y = f(x);
    for (int c = 0; c < 6; ++c) y(c) += 0.1 * nd(rng);
    d.update({x, y}, 0, 1);
  }
  const gp::FitResult fit = gp::fit_hyperparameters(d, gp::KernelParams{}, 300, 1);
  std::vector<gp::State> pool(300);
  for (auto& x : pool) x = rand_state(rng, 0.5);
  gp::BoundParams b;
  b.delta = 0.9;
  b.rkhs_bound.setConstant(1.0);
  b.info_gain.setConstant(gp::info_gain_greedy(pool, d.size() + 1, fit.params));
  const gp::Posterior post(d, fit.params);
  const Vec6 beta = gp::beta_bound(d.size(), b);
  int held = 0;
  const int total = 10000;
  for (int k = 0; k < total; ++k) {
    const gp::State x = rand_state(rng, 0.5);
    const gp::Prediction pr = post.predict(x);
    if ((f(x) - pr.mean).norm() <= gp::error_bound(pr, beta)) ++held;
  }
  const double rate = static_cast<double>(held) / total;
  o.check("coverage at delta=0.9", rate, ">= 0.88", rate >= b.delta - 0.02);
  return o;
}

// ---------------------------------------------------------------------------
// 7. Learning control reduction and compensation
// ---------------------------------------------------------------------------

ScenarioConfig compensation_scenario(bool compensate) {
  ScenarioConfig cfg = presets::single_agent();
  cfg.sim.t_end = 45.0;
  cfg.sim.log_period = 100;
  auto& a = cfg.agents[0];
  a.disturbance.kind = DisturbanceKind::kStep;
  a.disturbance.start = 0.0;
  a.disturbance.wrench = Wrench{Vec3(0.3, 0, 0), Vec3(2.0, 0, 0)};
  cfg.gp.enabled = compensate;
  cfg.gp.capacity = 250;
  cfg.gp.sample_period = 100;
  cfg.sim.gp_freeze_time = 30.0;
  cfg.sim.gp_engage_time = 30.0;
  return cfg;
}

double mean_gamma(const EpisodeLog& log, double t0, double t1) {
  double sum = 0.0;
  long n = 0;
  for (long k = 0; k <= log.ticks; ++k) {
    const double tk = static_cast<double>(k) * log.dt;
    if (tk < t0 || tk >= t1) continue;
    sum += log.sample(k, 0).gamma_d;
    ++n;
  }
  return sum / static_cast<double>(n);
}

Outcome learning() {
  Outcome o;
  std::mt19937_64 rng(707);
  const ScenarioConfig swap = presets::two_agent_swap();
  std::vector<AgentGeometry> geo;
  for (const auto& a : swap.agents) geo.push_back(a.geometry);
  const NavigationField field(0, geo, swap.nav);
  const Gains g(swap.agents[0].K, swap.c, swap.dissipation, swap.theta_epsilon);
  const Inertia M = swap.agents[0].inertia_operator();
  const gp::Dataset empty(250);
  const gp::Posterior post(empty, gp::KernelParams{});
  double diff = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Pose> poses = {t::rand_pose(rng, 3.0), t::rand_pose(rng, 3.0)};
    if ((poses[0].q - poses[1].q).norm() < 2.0) continue;
    const std::vector<Twist> tw = {t::rand_twist(rng, 0.5), t::rand_twist(rng, 0.5)};
    const AgentView view{poses, tw, t::rand_pose(rng, 3.0)};
    const auto a = nominal_control(field, view, g, M);
    const auto b = learning_control(field, view, g, M, LearnedModel{&post, Vec6::Constant(3.0)},
                                    poses[0]);
    diff = std::max(diff, t::max_abs(a.u.vector() - b.u.vector()));
  }
  o.check("empty-data |u_learn - u_nom|", diff, "exact", diff == 0.0);

  const EpisodeLog on = run_episode(compensation_scenario(true));
  const EpisodeLog off = run_episode(compensation_scenario(false));
  const std::size_t n = on.datasets[0].size();
  o.check("dataset size at engage", static_cast<double>(n), "= 250", n == 250);
  const double e_on = mean_gamma(on, 35.0, 45.0);
  const double e_off = mean_gamma(off, 35.0, 45.0);
  o.check("compensated/uncompensated gamma_d over [35,45) s", e_on / e_off, "<= 0.5",
          e_on <= 0.5 * e_off);
  return o;
}

// ---------------------------------------------------------------------------
// 8. Seven-vehicle scenario
// ---------------------------------------------------------------------------

Outcome seven_uav() {
  Outcome o;
  const std::string path = std::string(SE3NAV_SOURCE_DIR) + "/configs/paper_7uav.cfg";
  if (!std::filesystem::exists(path)) {
    o.flag("bundled config present", false);
    return o;
  }
  const ScenarioConfig cfg = config::load_config(path);
  const EpisodeLog first = run_episode(cfg);
  const MetricsReport m = compute_metrics(first, cfg);
  const std::string h1 = sha256_hex(csv_of(first));
  const std::string h2 = sha256_hex(csv_of(run_episode(cfg)));
  o.check("min distance", m.min_distance, "> 1.5", m.min_distance > 1.5);
  o.check("waypoints missed", m.waypoints_missed, "= 0", m.waypoints_missed == 0);
  o.flag("episode hash " + h1.substr(0, 12) + " repeated", h1 == h2);
  return o;
}

// ---------------------------------------------------------------------------
// 9. Thread-count determinism
// ---------------------------------------------------------------------------

Outcome determinism() {
  Outcome o;
  ScenarioConfig cfg = presets::paper_7uav();
  cfg.sim.t_end = 90.0;
  const std::string one = csv_of(run_episode(cfg, RunOptions{1}));
  const std::string eight = csv_of(run_episode(cfg, RunOptions{8}));
  o.flag("episode.csv identical for 1 and 8 threads (" + std::to_string(one.size()) + " bytes)",
         one == eight);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "Lie-group suite", 10, lie_suite},
      {2, "free rigid body", 30, rigid_body},
      {3, "navigation function", 60, navigation},
      {4, "nominal two-agent swap", 60, nominal_swap},
      {5, "GP oracle equivalence", 20, gp_oracle},
      {6, "error-bound coverage", 60, coverage},
      {7, "learning control", 300, learning},
      {8, "seven-vehicle scenario", 600, seven_uav},
      {9, "thread-count determinism", 600, determinism},
  };
  bool all_pass = true;
  for (const auto& c : all) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = c.run();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::printf("criterion %d %s  %s: %s [%.1f s, limit %.0f s%s]\n", c.id, pass ? "PASS" : "FAIL",
                c.title, o.detail.c_str(), secs, c.limit_s, in_time ? "" : ", TOO SLOW");
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
