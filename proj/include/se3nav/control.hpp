#pragma once

// Decentralized feedback laws. The algebra-valued control sum
//
//   a = -I#(K dpsi) + theta xi + F_d xi - I# ad*_xi(I xi)
//
// is emitted as the wrench u = I a, so the force-level dynamics
// I xi_dot = ad*_xi(I xi) + u + f_uk see the gyroscopic term cancelled.

#include <cmath>
#include <span>

#include "se3nav/errors.hpp"
#include "se3nav/gp.hpp"
#include "se3nav/lie.hpp"
#include "se3nav/navigation.hpp"

namespace se3nav {

struct Gains {
  double K = 1.0;             ///< potential gain of this agent
  double c = 2.0;             ///< shared, must exceed every agent's K
  double dissipation = 0.5;   ///< F_d = -dissipation * identity
  double theta_epsilon = 1e-6;
  double hold_time = 0.0;     ///< control sample period; 0 for continuous time

  Gains() = default;
  Gains(double K_, double c_, double d_ = 0.5, double eps = 1e-6)
      : K(K_), c(c_), dissipation(d_), theta_epsilon(eps) {
    validate();
  }

  void validate() const {
    if (!(K > 0.0)) throw InvalidArgument("Gains: K must be > 0");
    if (!(c > K)) throw InvalidArgument("Gains: c must exceed K");
    if (!(dissipation >= 0.0)) throw InvalidArgument("Gains: dissipation must be >= 0");
    if (!(theta_epsilon > 0.0)) throw InvalidArgument("Gains: theta_epsilon must be > 0");
    if (!(hold_time >= 0.0)) throw InvalidArgument("Gains: hold_time must be >= 0");
  }

  Twist dissipate(const Twist& xi) const { return -dissipation * xi; }

  /// Decay rate actually applied for a requested rate theta: theta itself in
  /// continuous time, otherwise the exact zero-order-hold equivalent
  /// (exp(theta T) - 1) / T, which never reverses xi within one sample.
  double held_rate(double theta) const {
    if (hold_time <= 0.0) return theta;
    return std::expm1(theta * hold_time) / hold_time;
  }
};

struct ControlOutput {
  Wrench u;
  double theta = 0.0;
  double grad_norm = 0.0;
  double dpsi_dt = 0.0;
  double psi = 0.0;
  Wrench gp_mean;
  double error_bound = 0.0;
};

/// -c |dpsi/dt| / tanh(max(<<xi, xi>>, epsilon)).
inline double theta(const Twist& xi, double dpsi_dt, const Inertia& M,
                    const Gains& gains) {
  if (dpsi_dt == 0.0) return 0.0;
  const double x = std::max(M.metric(xi, xi), gains.theta_epsilon);
  return -gains.c * std::abs(dpsi_dt) / std::tanh(x);
}

/// What agent i sees at a control tick: pose snapshots of every agent,
/// their twists, and its own goal.
struct AgentView {
  std::span<const Pose> poses;
  std::span<const Twist> twists;
  const Pose& goal;
};

inline ControlOutput nominal_control(const NavigationField& field,
                                     const AgentView& view, const Gains& gains,
                                     const Inertia& M, double h_fd = 1e-5) {
  const int i = field.agent();
  const Twist& xi = view.twists[i];
  ControlOutput out;
  const Wrench dpsi = field.gradient(view.poses, view.goal, h_fd);
  out.grad_norm = dpsi.vector().norm();
  out.dpsi_dt = field.dpsi_dt(view.poses, view.twists, view.goal, h_fd);
  out.theta = theta(xi, out.dpsi_dt, M, gains);
  out.psi = field.potential(view.poses, view.goal);
  const Wrench momentum = M.apply(xi);
  out.u = -gains.K * dpsi +
          M.apply(gains.held_rate(out.theta) * xi + gains.dissipate(xi)) -
          lie::ad_star(xi, momentum);
  return out;
}

/// Frozen GP model of one agent: factorized posterior plus its beta vector.
struct LearnedModel {
  const gp::Posterior* posterior = nullptr;
  Vec6 beta = Vec6::Zero();
};

/// Nominal control minus the GP mean of the residual wrench. An empty
/// posterior with zero prior reproduces nominal_control exactly.
inline ControlOutput learning_control(const NavigationField& field,
                                      const AgentView& view, const Gains& gains,
                                      const Inertia& M, const LearnedModel& model,
                                      const Pose& measured_pose,
                                      double h_fd = 1e-5) {
  ControlOutput out = nominal_control(field, view, gains, M, h_fd);
  if (model.posterior == nullptr) return out;
  const gp::State x = gp::encode(measured_pose, view.twists[field.agent()]);
  const gp::Prediction pred = model.posterior->predict(x);
  out.gp_mean = Wrench::from_vector(pred.mean);
  out.error_bound = gp::error_bound(pred, model.beta);
  out.u = out.u - out.gp_mean;
  return out;
}

/// V = sum_i K_i psi_i + 1/2 <<xi_i, xi_i>>.
inline double lyapunov_value(std::span<const NavigationField> fields,
                             std::span<const Pose> poses,
                             std::span<const Twist> twists,
                             std::span<const Pose> goals,
                             std::span<const double> K,
                             std::span<const Inertia> M) {
  double V = 0.0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    V += K[i] * fields[i].potential(poses, goals[i]) +
         0.5 * M[i].metric(twists[i], twists[i]);
  }
  return V;
}

}  // namespace se3nav
