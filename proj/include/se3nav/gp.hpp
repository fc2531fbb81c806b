#pragma once

// Online Gaussian-process regression of the dynamics residual, one
// independent GP per wrench component sharing a single isotropic
// squared-exponential kernel.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "se3nav/errors.hpp"
#include "se3nav/lie.hpp"

namespace se3nav::gp {

inline constexpr int kStateDim = 12;
using State = Eigen::Matrix<double, kStateDim, 1>;

/// (q, log R, omega, v).
inline State encode(const Pose& g, const Twist& xi) {
  State x;
  x << g.q, lie::so3_log(g.R), xi.omega, xi.v;
  return x;
}

struct DecodedState {
  Pose pose;
  Twist twist;
};

inline DecodedState decode(const State& x) {
  DecodedState d;
  d.pose.q = x.segment<3>(0);
  d.pose.R = lie::so3_exp(x.segment<3>(3));
  d.twist.omega = x.segment<3>(6);
  d.twist.v = x.segment<3>(9);
  return d;
}

struct TrainingPair {
  State x;
  Vec6 y;
};

/// y = I xi_dot - ad*_xi(I xi) - u, the part of the applied wrench the
/// nominal model does not explain.
inline Wrench assemble_output(const Twist& xi_dot, const Twist& xi,
                              const Wrench& u, const Inertia& M) {
  return M.apply(xi_dot) - lie::ad_star(xi, M.apply(xi)) - u;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

/// FIFO buffer of training pairs. Every mutation bumps the generation
/// counter; updates at or after the freeze time are ignored.
class Dataset {
 public:
  explicit Dataset(std::size_t capacity = 250) : capacity_(capacity) {
    if (capacity == 0) throw InvalidArgument("Dataset: capacity must be > 0");
  }

  /// Returns true if the dataset changed.
  bool update(const TrainingPair& pair, double now, double freeze_time) {
    if (now >= freeze_time) return false;
    pairs_.push_back(pair);
    if (pairs_.size() > capacity_) pairs_.pop_front();
    ++generation_;
    return true;
  }

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t generation() const { return generation_; }
  const TrainingPair& operator[](std::size_t n) const { return pairs_[n]; }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

  std::vector<State> inputs() const {
    std::vector<State> xs;
    xs.reserve(pairs_.size());
    for (const auto& p : pairs_) xs.push_back(p.x);
    return xs;
  }

  static Dataset from_pairs(std::span<const TrainingPair> pairs,
                            std::size_t capacity = 0) {
    Dataset d(capacity == 0 ? std::max<std::size_t>(pairs.size(), 1) : capacity);
    for (const auto& p : pairs) d.update(p, 0.0, 1.0);
    return d;
  }

 private:
  std::size_t capacity_;
  std::deque<TrainingPair> pairs_;
  std::uint64_t generation_ = 0;
};

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

struct KernelParams {
  double signal_variance = 1.0;
  double lengthscale = 1.0;
  double noise_variance = 0.01;

  void validate() const {
    if (!(signal_variance > 0.0 && lengthscale > 0.0 && noise_variance > 0.0)) {
      throw InvalidArgument("KernelParams: all parameters must be > 0");
    }
  }
};

inline double se_kernel(const State& a, const State& b, const KernelParams& p) {
  return p.signal_variance *
         std::exp(-(a - b).squaredNorm() / (2.0 * p.lengthscale * p.lengthscale));
}

/// K + sigma^2 I.
inline Eigen::MatrixXd gram_matrix(std::span<const State> xs,
                                   const KernelParams& p) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    K(r, r) = p.signal_variance + p.noise_variance;
    for (Eigen::Index c = 0; c < r; ++c) {
      K(r, c) = K(c, r) = se_kernel(xs[r], xs[c], p);
    }
  }
  return K;
}

/// Cholesky with jitter escalation 1e-10, 1e-9, ..., 1e-6.
inline Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& K) {
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) return llt;
  const auto n = K.rows();
  for (double jitter = 1e-10; jitter <= 1e-6 * 1.0001; jitter *= 10.0) {
    llt.compute(K + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return llt;
  }
  const Eigen::VectorXd d = K.diagonal();
  const double cond = d.maxCoeff() / std::max(d.minCoeff(), 1e-300);
  throw IllConditionedGram("Gram matrix Cholesky failed after jitter escalation",
                           cond);
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

using PriorMean = std::function<Vec6(const State&)>;

struct Prediction {
  Vec6 mean = Vec6::Zero();
  Vec6 variance = Vec6::Zero();
};

/// Factorized posterior for a fixed dataset; reused across predictions
/// until the dataset generation changes.
class Posterior {
 public:
  Posterior() = default;

  Posterior(const Dataset& data, const KernelParams& params,
            PriorMean prior = {})
      : params_(params), prior_(std::move(prior)), generation_(data.generation()) {
    params_.validate();
    inputs_ = data.inputs();
    if (inputs_.empty()) return;
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    llt_ = factorize(gram_matrix(inputs_, params_));
    Eigen::MatrixXd Y(n, 6);
    for (Eigen::Index r = 0; r < n; ++r) {
      Vec6 y = data[static_cast<std::size_t>(r)].y;
      if (prior_) y -= prior_(inputs_[r]);
      Y.row(r) = y.transpose();
    }
    alpha_ = llt_.solve(Y);
  }

  std::size_t size() const { return inputs_.size(); }
  std::uint64_t generation() const { return generation_; }
  const KernelParams& params() const { return params_; }

  Prediction predict(const State& x) const {
    Prediction out;
    if (prior_) out.mean = prior_(x);
    const double kxx = params_.signal_variance;
    if (inputs_.empty()) {
      out.variance.setConstant(kxx);
      return out;
    }
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    Eigen::VectorXd ks(n);
    for (Eigen::Index r = 0; r < n; ++r) ks(r) = se_kernel(x, inputs_[r], params_);
    out.mean += (alpha_.transpose() * ks);
    const Eigen::VectorXd v = llt_.matrixL().solve(ks);
    out.variance.setConstant(std::max(kxx - v.squaredNorm(), 0.0));
    return out;
  }

 private:
  KernelParams params_;
  PriorMean prior_;
  std::uint64_t generation_ = 0;
  std::vector<State> inputs_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd alpha_;
};

inline Prediction gp_predict(const State& x, const Dataset& data,
                             const KernelParams& params, PriorMean prior = {}) {
  return Posterior(data, params, std::move(prior)).predict(x);
}

// ---------------------------------------------------------------------------
// Hyperparameters
// ---------------------------------------------------------------------------

/// Sum over the six output dimensions of the Gaussian log evidence.
inline double log_marginal_likelihood(const Dataset& data,
                                      const KernelParams& params) {
  params.validate();
  const auto xs = data.inputs();
  const auto n = static_cast<Eigen::Index>(xs.size());
  const Eigen::LLT<Eigen::MatrixXd> llt = factorize(gram_matrix(xs, params));
  Eigen::MatrixXd Y(n, 6);
  for (Eigen::Index r = 0; r < n; ++r) {
    Y.row(r) = data[static_cast<std::size_t>(r)].y.transpose();
  }
  const Eigen::MatrixXd alpha = llt.solve(Y);
  const double quad = (Y.array() * alpha.array()).sum();
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * quad - 3.0 * logdet -
         3.0 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

struct FitResult {
  KernelParams params;
  double log_likelihood = 0.0;
  int evaluations = 0;
};

/// Multi-start coordinate search over (log sf2, log l, log sn2). The initial
/// point is always evaluated first, so the result never has lower evidence
/// than `init`. Deterministic given `seed`.
inline FitResult fit_hyperparameters(const Dataset& data, const KernelParams& init,
                                     int budget = 400, std::uint64_t seed = 0,
                                     int starts = 4) {
  if (data.size() < 5) {
    throw InsufficientData("fit_hyperparameters: need at least 5 training pairs");
  }
  init.validate();
  using P = Eigen::Vector3d;
  const auto to_params = [](const P& z) {
    return KernelParams{std::exp(z(0)), std::exp(z(1)), std::exp(z(2))};
  };
  const P lo(std::log(1e-6), std::log(1e-4), std::log(1e-10));
  const P hi(std::log(1e6), std::log(1e4), std::log(1e4));
  int evals = 0;
  const auto score = [&](const P& z) {
    ++evals;
    try {
      return log_marginal_likelihood(data, to_params(z));
    } catch (const IllConditionedGram&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  const P z0(std::log(init.signal_variance), std::log(init.lengthscale),
             std::log(init.noise_variance));
  P best = z0;
  double best_score = score(z0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jump(0.0, 1.0);
  for (int s = 0; s < starts && evals < budget; ++s) {
    P z = z0;
    if (s > 0) {
      for (int c = 0; c < 3; ++c) z(c) = std::clamp(z0(c) + jump(rng), lo(c), hi(c));
    }
    double f = s == 0 ? best_score : score(z);
    double step = 1.0;
    while (step > 1e-3 && evals < budget) {
      bool improved = false;
      for (int c = 0; c < 3 && evals < budget; ++c) {
        for (double dir : {+1.0, -1.0}) {
          P trial = z;
          trial(c) = std::clamp(z(c) + dir * step, lo(c), hi(c));
          if (trial(c) == z(c)) continue;
          const double ft = score(trial);
          if (ft > f) {
            z = trial;
            f = ft;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (f > best_score) {
      best_score = f;
      best = z;
    }
  }
  return {to_params(best), best_score, evals};
}

// ---------------------------------------------------------------------------
// Error bound
// ---------------------------------------------------------------------------

struct BoundParams {
  double delta = 0.9;
  Vec6 rkhs_bound = Vec6::Ones();  ///< B_j, bound on the RKHS norm of f_uk,j
  Vec6 info_gain = Vec6::Zero();   ///< gamma_j

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) {
      throw InvalidArgument("BoundParams: delta must lie in (0, 1)");
    }
    if ((rkhs_bound.array() < 0.0).any() || (info_gain.array() < 0.0).any()) {
      throw InvalidArgument("BoundParams: bounds must be nonnegative");
    }
  }
};

/// Greedy maximization of 1/2 log|I + K_S / sigma^2| over subsets S of the
/// pool with |S| = n_plus_1, via incremental (pivoted) Cholesky of the
/// posterior covariance.
inline double info_gain_greedy(std::span<const State> pool, std::size_t n_plus_1,
                               const KernelParams& p) {
  p.validate();
  if (pool.size() < n_plus_1 || n_plus_1 == 0) {
    throw InvalidArgument("info_gain_greedy: candidate pool too small");
  }
  const std::size_t P = pool.size();
  std::vector<double> var(P, p.signal_variance);
  std::vector<bool> used(P, false);
  // V(c, t): scaled posterior cross-covariance with the t-th chosen point.
  Eigen::MatrixXd V(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(n_plus_1));
  double gain = 0.0;
  for (std::size_t t = 0; t < n_plus_1; ++t) {
    std::size_t pick = P;
    for (std::size_t c = 0; c < P; ++c) {
      if (!used[c] && (pick == P || var[c] > var[pick])) pick = c;
    }
    used[pick] = true;
    const double vp = std::max(var[pick], 0.0);
    gain += 0.5 * std::log1p(vp / p.noise_variance);
    const double scale = 1.0 / std::sqrt(vp + p.noise_variance);
    const auto ti = static_cast<Eigen::Index>(t);
    for (std::size_t c = 0; c < P; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      double cov = se_kernel(pool[c], pool[pick], p);
      for (Eigen::Index s = 0; s < ti; ++s) {
        cov -= V(ci, s) * V(static_cast<Eigen::Index>(pick), s);
      }
      V(ci, ti) = cov * scale;
    }
    for (std::size_t c = 0; c < P; ++c) {
      var[c] -= V(static_cast<Eigen::Index>(c), ti) * V(static_cast<Eigen::Index>(c), ti);
    }
  }
  return gain;
}

/// Exact 1/2 log|I + K_S / sigma^2| for a given subset.
inline double information_gain(std::span<const State> subset, const KernelParams& p) {
  KernelParams noiseless = p;
  const auto n = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd K = gram_matrix(subset, noiseless);
  K -= p.noise_variance * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) + K / p.noise_variance;
  const Eigen::LLT<Eigen::MatrixXd> llt(A);
  return llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

/// beta_j = sqrt(2 B_j^2 + 300 gamma_j ln^3((N + 1) / (1 - delta^(1/6)))).
inline Vec6 beta_bound(std::size_t dataset_size, const BoundParams& b) {
  b.validate();
  const double l = std::log((static_cast<double>(dataset_size) + 1.0) /
                            (1.0 - std::pow(b.delta, 1.0 / 6.0)));
  const double l3 = l * l * l;
  Vec6 beta;
  for (int j = 0; j < 6; ++j) {
    beta(j) = std::sqrt(2.0 * b.rkhs_bound(j) * b.rkhs_bound(j) +
                        300.0 * b.info_gain(j) * l3);
  }
  return beta;
}

/// sqrt(sum_j beta_j^2 var_j(x)).
inline double error_bound(const Prediction& pred, const Vec6& beta) {
  return std::sqrt((beta.array().square() * pred.variance.array()).sum());
}

inline double error_bound(const State& x, const Posterior& post,
                          const BoundParams& b) {
  return error_bound(post.predict(x), beta_bound(post.size(), b));
}

// ---------------------------------------------------------------------------
// Dataset table (18 comma-separated columns plus a header row)
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols = {
      "q_x",     "q_y",     "q_z",     "rot_x",   "rot_y",   "rot_z",
      "omega_x", "omega_y", "omega_z", "v_x",     "v_y",     "v_z",
      "y_tx",    "y_ty",    "y_tz",    "y_fx",    "y_fy",    "y_fz"};
  return cols;
}

inline std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline void write_table(std::ostream& os, std::span<const TrainingPair> pairs) {
  const auto& cols = table_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  for (const auto& p : pairs) {
    for (int c = 0; c < kStateDim; ++c) os << (c ? "," : "") << format_double(p.x(c));
    for (int c = 0; c < 6; ++c) os << ',' << format_double(p.y(c));
    os << '\n';
  }
}

inline void write_table(std::ostream& os, const Dataset& d) {
  std::vector<TrainingPair> v(d.begin(), d.end());
  write_table(os, std::span<const TrainingPair>(v));
}

/// Parses a table; ParseError carries the offending row (line) and column.
inline std::vector<TrainingPair> read_table(std::istream& is) {
  std::string line;
  int lineno = 0;
  if (!std::getline(is, line)) throw ParseError("dataset table: missing header", 1, 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::stringstream ss(line);
    std::string name;
    std::size_t c = 0;
    const auto& cols = table_columns();
    while (std::getline(ss, name, ',')) {
      if (c >= cols.size() || name != cols[c]) {
        throw ParseError("dataset table: unexpected header column '" + name + "'",
                         1, static_cast<int>(c + 1));
      }
      ++c;
    }
    if (c != cols.size()) {
      throw ParseError("dataset table: header must name 18 columns", 1,
                       static_cast<int>(c + 1));
    }
  }
  std::vector<TrainingPair> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double vals[18];
    std::size_t c = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      if (c >= 18) {
        throw ParseError("dataset table: too many columns", lineno,
                         static_cast<int>(c + 1));
      }
      const auto r = std::from_chars(p, end, vals[c]);
      if (r.ec != std::errc() || !std::isfinite(vals[c])) {
        throw ParseError("dataset table: malformed number", lineno,
                         static_cast<int>(c + 1));
      }
      ++c;
      p = r.ptr;
      if (p == end) break;
      if (*p != ',') {
        throw ParseError("dataset table: expected ','", lineno, static_cast<int>(c));
      }
      ++p;
    }
    if (c != 18) {
      throw ParseError("dataset table: expected 18 columns", lineno,
                       static_cast<int>(c));
    }
    TrainingPair tp;
    for (int k = 0; k < kStateDim; ++k) tp.x(k) = vals[k];
    for (int k = 0; k < 6; ++k) tp.y(k) = vals[kStateDim + k];
    out.push_back(tp);
  }
  return out;
}

}  // namespace se3nav::gp
