#pragma once

// Embedded self-check suite run by `se3nav validate`.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "se3nav/control.hpp"
#include "se3nav/gp.hpp"
#include "se3nav/lie.hpp"
#include "se3nav/navigation.hpp"
#include "se3nav/presets.hpp"
#include "se3nav/sim.hpp"

namespace se3nav::validation {

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct SuiteOptions {
  /// Replace ad* by its negation in the duality check.
  bool mutate_ad_star = false;
  std::uint64_t seed = 1;
};

using AdStar = std::function<Wrench(const Twist&, const Wrench&)>;

namespace detail {

inline Vec3 rand3(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n;
  return scale * Vec3(n(rng), n(rng), n(rng));
}

inline Twist rand_twist(std::mt19937_64& rng, double scale = 1.0) {
  return {rand3(rng, scale), rand3(rng, scale)};
}

inline Pose rand_pose(std::mt19937_64& rng) {
  Vec3 w = rand3(rng);
  if (w.norm() > 3.0) w *= 3.0 / w.norm();
  return {lie::so3_exp(w), rand3(rng, 2.0)};
}

inline double pose_error(const Pose& a, const Pose& b) {
  return std::max((a.R - b.R).cwiseAbs().maxCoeff(), (a.q - b.q).cwiseAbs().maxCoeff());
}

inline CheckResult make(std::string name, double residual, double tol) {
  return {std::move(name), residual, tol, residual <= tol};
}

}  // namespace detail

inline CheckResult check_group_axioms(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double r = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Pose a = detail::rand_pose(rng), b = detail::rand_pose(rng),
               c = detail::rand_pose(rng);
    r = std::max(r, detail::pose_error(lie::compose(lie::compose(a, b), c),
                                       lie::compose(a, lie::compose(b, c))));
    r = std::max(r, detail::pose_error(lie::compose(a, lie::inverse(a)), Pose{}));
    r = std::max(r, detail::pose_error(lie::compose(Pose{}, a), a));
  }
  return detail::make("group axioms", r, 1e-12);
}

inline CheckResult check_exp_log(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double r = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Twist xi = detail::rand_twist(rng);
    if (xi.omega.norm() > 3.0) xi.omega *= 3.0 / xi.omega.norm();
    r = std::max(r, (lie::log(lie::exp(xi)).vector() - xi.vector()).cwiseAbs().maxCoeff());
  }
  return detail::make("exp/log roundtrip", r, 1e-9);
}

inline CheckResult check_hat_vee(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double r = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec3 w = detail::rand3(rng);
    r = std::max(r, (lie::vee(lie::hat(w)) - w).cwiseAbs().maxCoeff());
  }
  return detail::make("hat/vee exactness", r, 0.0);
}

inline CheckResult check_duality(std::uint64_t seed, const AdStar& ad_star) {
  std::mt19937_64 rng(seed);
  double r = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Twist xi = detail::rand_twist(rng), eta = detail::rand_twist(rng);
    const Wrench m = Wrench::from_vector(detail::rand_twist(rng).vector());
    r = std::max(r, std::abs(pairing(ad_star(xi, m), eta) -
                             pairing(m, lie::ad(xi, eta))));
  }
  return detail::make("ad*/ad duality", r, 1e-12);
}

inline CheckResult check_jacobi(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double r = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Twist a = detail::rand_twist(rng), b = detail::rand_twist(rng),
                c = detail::rand_twist(rng);
    const Twist s = lie::ad(a, lie::ad(b, c)) + lie::ad(b, lie::ad(c, a)) +
                    lie::ad(c, lie::ad(a, b));
    r = std::max(r, s.vector().cwiseAbs().maxCoeff());
  }
  return detail::make("Jacobi identity", r, 1e-10);
}

inline CheckResult check_energy() {
  const Inertia M = Inertia::rigid_body(Vec3(0.02, 0.02, 0.04), 1.3);
  AgentState s;
  s.xi = Twist{Vec3(1.0, 0.5, -0.7), Vec3(0.3, -0.2, 0.1)};
  const double e0 = 0.5 * M.metric(s.xi, s.xi);
  double drift = 0.0;
  for (int k = 0; k < 10000; ++k) {
    s = integrate(s, Wrench{}, M, 1e-3, Integrator::kRkmk4);
    drift = std::max(drift, std::abs(0.5 * M.metric(s.xi, s.xi) - e0) / e0);
  }
  return detail::make("free rigid body energy drift", drift, 1e-6);
}

inline CheckResult check_gp_oracle(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const gp::KernelParams p{1.5, 0.8, 0.05};
  double r = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    gp::Dataset d(10);
    for (int n = 0; n < 10; ++n) {
      gp::TrainingPair tp;
      for (int c = 0; c < gp::kStateDim; ++c) tp.x(c) = std::normal_distribution<>()(rng);
      for (int c = 0; c < 6; ++c) tp.y(c) = std::normal_distribution<>()(rng);
      d.update(tp, 0.0, 1.0);
    }
    const auto xs = d.inputs();
    Eigen::MatrixXd K(10, 10);
    for (int a = 0; a < 10; ++a) {
      for (int b = 0; b < 10; ++b) {
        K(a, b) = p.signal_variance *
                      std::exp(-(xs[a] - xs[b]).squaredNorm() / (2 * p.lengthscale * p.lengthscale)) +
                  (a == b ? p.noise_variance : 0.0);
      }
    }
    gp::State x;
    for (int c = 0; c < gp::kStateDim; ++c) x(c) = std::normal_distribution<>()(rng);
    Eigen::VectorXd ks(10);
    for (int a = 0; a < 10; ++a) {
      ks(a) = p.signal_variance *
              std::exp(-(x - xs[a]).squaredNorm() / (2 * p.lengthscale * p.lengthscale));
    }
    const Eigen::VectorXd w = K.fullPivLu().solve(ks);
    const gp::Prediction pr = gp::Posterior(d, p).predict(x);
    for (int j = 0; j < 6; ++j) {
      double mean = 0.0;
      for (int a = 0; a < 10; ++a) mean += w(a) * d[a].y(j);
      r = std::max(r, std::abs(mean - pr.mean(j)));
    }
    r = std::max(r, std::abs((p.signal_variance - ks.dot(w)) - pr.variance(0)));
  }
  return detail::make("GP posterior vs dense solve", r, 1e-10);
}

inline CheckResult check_gram_spectrum(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const gp::KernelParams p{1.0, 0.5, 0.01};
  std::vector<gp::State> xs(40);
  for (auto& x : xs) {
    for (int c = 0; c < gp::kStateDim; ++c) x(c) = 0.1 * std::normal_distribution<>()(rng);
  }
  const Eigen::MatrixXd K = gp::gram_matrix(xs, p);
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff();
  return detail::make("Gram min eigenvalue >= noise variance",
                      std::max(0.0, p.noise_variance - min_eig), 1e-12);
}

inline CheckResult check_psi_range(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double r = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int s = 2 + trial % 4;
    std::vector<AgentGeometry> geo(static_cast<std::size_t>(s));
    std::vector<Pose> poses;
    for (int i = 0; i < s; ++i) poses.push_back({lie::so3_exp(detail::rand3(rng)), Vec3(u(rng), u(rng), u(rng))});
    const Pose goal{Mat3::Identity(), Vec3(u(rng), u(rng), u(rng))};
    NavParams p;
    const double psi = NavigationField(0, geo, p).potential(poses, goal);
    r = std::max(r, std::max(-psi, psi - 1.0));
  }
  return detail::make("psi within [0, 1]", std::max(r, 0.0), 0.0);
}

inline CheckResult check_learning_reduction() {
  const auto cfg = presets::two_agent_swap();
  std::vector<AgentGeometry> geo;
  for (const auto& a : cfg.agents) geo.push_back(a.geometry);
  const NavigationField f(0, geo, cfg.nav);
  std::vector<Pose> poses = {cfg.agents[0].initial, cfg.agents[1].initial};
  std::vector<Twist> tw = {Twist{Vec3(0.1, 0, 0), Vec3(0.2, 0.1, 0)},
                           Twist{Vec3(0, 0.1, 0), Vec3(-0.2, 0, 0)}};
  const AgentView view{poses, tw, cfg.agents[0].goals[0].pose};
  const Gains g(cfg.agents[0].K, cfg.c, cfg.dissipation, cfg.theta_epsilon);
  const Inertia M = cfg.agents[0].inertia_operator();
  const gp::Dataset empty(5);
  const gp::Posterior post(empty, gp::KernelParams{});
  const auto a = nominal_control(f, view, g, M);
  const auto b = learning_control(f, view, g, M, LearnedModel{&post, Vec6::Ones()}, poses[0]);
  return detail::make("empty-data learning control equals nominal",
                      (a.u.vector() - b.u.vector()).cwiseAbs().maxCoeff(), 0.0);
}

inline CheckResult check_descent() {
  auto cfg = presets::two_agent_swap();
  cfg.sim.t_end = 5.0;
  const EpisodeLog log = run_episode(cfg);
  double worst = 0.0;
  for (std::size_t k = 1; k < log.V.size(); ++k) worst = std::max(worst, log.V[k] - log.V[k - 1]);
  return detail::make("Lyapunov descent per step (two-agent swap)", worst, 1e-6);
}

inline std::vector<CheckResult> run_suite(const SuiteOptions& opt = {}) {
  const AdStar ad_star = opt.mutate_ad_star
                             ? AdStar([](const Twist& x, const Wrench& m) {
                                 return -1.0 * lie::ad_star(x, m);
                               })
                             : AdStar([](const Twist& x, const Wrench& m) {
                                 return lie::ad_star(x, m);
                               });
  return {check_group_axioms(opt.seed),
          check_exp_log(opt.seed),
          check_hat_vee(opt.seed),
          check_duality(opt.seed, ad_star),
          check_jacobi(opt.seed),
          check_energy(),
          check_gp_oracle(opt.seed),
          check_gram_spectrum(opt.seed),
          check_psi_range(opt.seed),
          check_learning_reduction(),
          check_descent()};
}

inline void print_table(std::ostream& os, const std::vector<CheckResult>& results) {
  os << std::left << std::setw(46) << "invariant" << std::setw(14) << "residual"
     << std::setw(14) << "tolerance" << "status\n";
  for (const auto& r : results) {
    os << std::left << std::setw(46) << r.name << std::setw(14) << std::setprecision(3)
       << r.residual << std::setw(14) << r.tolerance << (r.pass ? "PASS" : "FAIL") << '\n';
  }
}

}  // namespace se3nav::validation
