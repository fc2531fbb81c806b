#pragma once

// Decentralized navigation potential for agent i:
//
//   psi_i = (gamma_i + f_i) / ((gamma_i + f_i)^k + G_i)^(1/k)
//
// gamma_i is the goal distance, G_i the product of relation verification
// functions over agent i's relation tree, and f_i the cubic correction that
// lifts the minimum off the goal while G_i <= X.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "se3nav/errors.hpp"
#include "se3nav/lie.hpp"

namespace se3nav {

/// Safety sphere and camera cone of one agent.
struct AgentGeometry {
  double radius = 0.75;
  Vec3 camera_axis = Vec3::UnitX();
  double fov_half_angle = M_PI / 6.0;

  void validate() const {
    if (!(radius > 0.0)) throw InvalidArgument("AgentGeometry: radius must be > 0");
    if (!(fov_half_angle > 0.0 && fov_half_angle < M_PI / 2.0)) {
      throw InvalidArgument("AgentGeometry: fov_half_angle must be in (0, pi/2)");
    }
    if (std::abs(camera_axis.norm() - 1.0) > 1e-12) {
      throw InvalidArgument("AgentGeometry: camera_axis must be a unit vector");
    }
  }
};

/// Shape parameters of the potential.
///
/// With `sensing_radius` <= 0 every relation uses the raw proximity functions
/// and G is the plain product of RVFs. With a positive sensing radius each
/// pairwise proximity is normalized to [0, 1] and saturates at 1 once the
/// neighbor is beyond the sensing radius, and G is rescaled so that it equals
/// `obstacle_scale` when no neighbor is sensed. The zero set of G (and so the
/// collision barrier) is the same in both modes.
struct NavParams {
  double k = 1.0;
  double lambda = 1.0;
  double sigma = 1.0;  ///< RVF exponent
  double X = 0.1;      ///< correction activation threshold on G
  double a0 = 0.05;    ///< correction height f(0)

  bool fov_avoidance = false;
  double sensing_radius = 0.0;  ///< meters; <= 0 disables normalization
  double fov_range = 0.0;       ///< meters; camera relations fade out beyond
  double obstacle_scale = 1.0;  ///< value of G with no sensed neighbor

  double a1() const { return 0.0; }
  double a2() const { return -3.0 * a0 / (X * X); }
  double a3() const { return 2.0 * a0 / (X * X * X); }
  bool normalized() const { return sensing_radius > 0.0; }

  void validate() const {
    std::vector<std::string> v;
    collect_violations(v);
    if (!v.empty()) throw ValidationError(std::move(v));
  }
  void collect_violations(std::vector<std::string>& v) const {
    if (!(k >= 1.0)) v.push_back("nav.k must be >= 1");
    if (!(lambda > 0.0)) v.push_back("nav.lambda must be > 0");
    if (!(sigma > 0.0)) v.push_back("nav.sigma must be > 0");
    if (!(X > 0.0)) v.push_back("nav.X must be > 0");
    if (!(a0 > 0.0)) v.push_back("nav.a0 must be > 0");
    if (normalized()) {
      if (!(obstacle_scale > 0.0)) v.push_back("nav.obstacle_scale must be > 0");
      if (fov_avoidance && !(fov_range > 0.0)) {
        v.push_back("nav.fov_range must be > 0 when sensing_radius > 0");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Scalar building blocks
// ---------------------------------------------------------------------------

/// trace(I - R R_d^T) + |q - q_d|^2.
inline double goal_distance(const Pose& g, const Pose& goal) {
  return (Mat3::Identity() - g.R * goal.R.transpose()).trace() +
         (g.q - goal.q).squaredNorm();
}

/// Relation proximity function between two safety spheres.
inline double rpf(const Pose& gi, const Pose& gj, double ri, double rj) {
  const double s = ri + rj;
  return (lie::project_position(gi) - lie::project_position(gj)).squaredNorm() -
         s * s;
}

/// Angle between agent i's camera axis and the line of sight to agent j.
inline double view_angle(const Pose& gi, const AgentGeometry& geo,
                         const Pose& gj) {
  const Vec3 d = gj.q - gi.q;
  if (d.squaredNorm() == 0.0) {
    throw InvalidArgument("fov_proximity: coincident agent positions");
  }
  const Vec3 a = gi.R * geo.camera_axis;
  return std::atan2(a.cross(d).norm(), a.dot(d));
}

/// angle^2 - half_angle^2: negative while agent j is inside i's view cone.
inline double fov_proximity(const Pose& gi, const AgentGeometry& geo,
                            const Pose& gj) {
  const double ang = view_angle(gi, geo, gj);
  return ang * ang - geo.fov_half_angle * geo.fov_half_angle;
}

struct RvfValue {
  double h = 0.0;
  bool degenerate = false;  ///< b and B vanished together
};

/// Relation verification function. `top_level` means the complement set is
/// empty and B is the empty product 1.
inline RvfValue rvf(double b, double B_complement, const NavParams& p,
                    bool top_level) {
  const double B = top_level ? 1.0 : B_complement;
  const double Bs = p.sigma == 1.0 ? B : std::pow(B, 1.0 / p.sigma);
  const double den = b + Bs;
  if (den == 0.0) return {0.0, true};
  return {b + p.lambda * b / den, false};
}

/// Cubic switch: a0 + a2 G^2 + a3 G^3 for G <= X, zero above.
inline double correction(double G, const NavParams& p) {
  if (G > p.X) return 0.0;
  return p.a0 + p.a2() * G * G + p.a3() * G * G * G;
}

inline double correction_slope(double G, const NavParams& p) {
  if (G > p.X) return 0.0;
  return 2.0 * p.a2() * G + 3.0 * p.a3() * G * G;
}

/// Potential from its three ingredients.
inline double potential_value(double gamma, double f, double G,
                              const NavParams& p) {
  const double num = gamma + f;
  if (num == 0.0 && G == 0.0) {
    throw DegenerateConfiguration("potential: gamma + f and G both vanish");
  }
  if (p.k == 1.0) return num / (num + G);
  return std::min(1.0, num / std::pow(std::pow(num, p.k) + G, 1.0 / p.k));
}

// ---------------------------------------------------------------------------
// Relation tree
// ---------------------------------------------------------------------------

enum class RelationKind : std::uint8_t { kCollision, kFieldOfView };

struct RelationNode {
  int level = 0;
  std::vector<int> members;  ///< neighbor agent indices (never the owner)
  RelationKind kind = RelationKind::kCollision;
  std::vector<int> complement;  ///< indices of same-level siblings in the tree
};

/// All relations of one agent, grouped by level.
struct RelationTree {
  int agent = 0;
  int agent_count = 1;
  std::vector<RelationNode> nodes;
  std::vector<std::vector<int>> levels;  ///< levels[l-1] = node indices

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
};

inline constexpr int kMaxAgents = 12;

/// Enumerates every subset of the other agents, level by level. With `fov`
/// one camera relation per neighbor is added at level 1.
inline RelationTree build_relation_tree(int i, int s, bool fov = false) {
  if (s > kMaxAgents) {
    throw CapacityError("build_relation_tree: at most 12 agents supported");
  }
  if (s < 1 || i < 0 || i >= s) {
    throw InvalidArgument("build_relation_tree: bad agent index or count");
  }
  RelationTree tree;
  tree.agent = i;
  tree.agent_count = s;
  std::vector<int> others;
  for (int j = 0; j < s; ++j) {
    if (j != i) others.push_back(j);
  }
  const int n = static_cast<int>(others.size());
  tree.levels.resize(static_cast<std::size_t>(n));
  // Subsets in lexicographic order within each level.
  for (int level = 1; level <= n; ++level) {
    std::vector<bool> pick(static_cast<std::size_t>(n), false);
    std::fill(pick.begin(), pick.begin() + level, true);
    do {
      RelationNode node;
      node.level = level;
      for (int a = 0; a < n; ++a) {
        if (pick[static_cast<std::size_t>(a)]) node.members.push_back(others[a]);
      }
      tree.levels[level - 1].push_back(static_cast<int>(tree.nodes.size()));
      tree.nodes.push_back(std::move(node));
    } while (std::prev_permutation(pick.begin(), pick.end()));
    if (level == 1 && fov) {
      for (int j : others) {
        RelationNode node;
        node.level = 1;
        node.members = {j};
        node.kind = RelationKind::kFieldOfView;
        tree.levels[0].push_back(static_cast<int>(tree.nodes.size()));
        tree.nodes.push_back(std::move(node));
      }
    }
  }
  for (const auto& lvl : tree.levels) {
    for (int a : lvl) {
      for (int b : lvl) {
        if (a != b) tree.nodes[a].complement.push_back(b);
      }
    }
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Obstacle function
// ---------------------------------------------------------------------------

struct ObstacleValue {
  double G = 1.0;
  int degenerate_nodes = 0;
};

namespace detail {

/// 1 - (1 - x)^3 on [0, 1], saturating at 1; C2 at x = 1.
inline double saturate(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double y = 1.0 - x;
  return 1.0 - y * y * y;
}

/// G from per-node b values. Complement products use prefix/suffix sweeps
/// so zeros are handled exactly.
inline ObstacleValue product_of_rvfs(const RelationTree& tree,
                                     std::span<const double> b,
                                     const NavParams& p) {
  ObstacleValue out;
  std::vector<double> prefix;
  for (const auto& lvl : tree.levels) {
    const std::size_t n = lvl.size();
    if (n == 1) {
      const RvfValue r = rvf(b[lvl[0]], 1.0, p, true);
      out.G *= r.h;
      out.degenerate_nodes += r.degenerate;
      continue;
    }
    prefix.assign(n + 1, 1.0);
    for (std::size_t a = 0; a < n; ++a) prefix[a + 1] = prefix[a] * b[lvl[a]];
    double suffix = 1.0;
    for (std::size_t a = n; a-- > 0;) {
      const double B = prefix[a] * suffix;
      const RvfValue r = rvf(b[lvl[a]], B, p, false);
      out.G *= r.h;
      out.degenerate_nodes += r.degenerate;
      suffix *= b[lvl[a]];
    }
  }
  return out;
}

}  // namespace detail

/// Evaluates G_i, psi_i and their left-trivialized derivatives for one agent.
/// Built once per episode; all evaluation methods are const and thread-safe.
class NavigationField {
 public:
  NavigationField(int agent, std::vector<AgentGeometry> geometries,
                  NavParams params)
      : agent_(agent),
        geometries_(std::move(geometries)),
        params_(params),
        tree_(build_relation_tree(agent, static_cast<int>(geometries_.size()),
                                  params.fov_avoidance)) {
    params_.validate();
    for (const auto& g : geometries_) g.validate();
    if (params_.normalized() && !tree_.empty()) {
      std::vector<double> b(tree_.size());
      for (std::size_t n = 0; n < tree_.size(); ++n) {
        b[n] = static_cast<double>(tree_.nodes[n].members.size());
      }
      far_field_ = detail::product_of_rvfs(tree_, b, params_).G;
    }
  }

  int agent() const { return agent_; }
  int agent_count() const { return static_cast<int>(geometries_.size()); }
  const NavParams& params() const { return params_; }
  const RelationTree& tree() const { return tree_; }
  const AgentGeometry& geometry(int j) const { return geometries_[j]; }

  /// Per-neighbor proximity values that enter the relation machinery.
  double collision_proximity(const Pose& gi, const Pose& gj, int j) const {
    const double beta =
        rpf(gi, gj, geometries_[agent_].radius, geometries_[j].radius);
    if (!params_.normalized()) return std::max(beta, 0.0);
    const double s = geometries_[agent_].radius + geometries_[j].radius;
    const double span = params_.sensing_radius * params_.sensing_radius - s * s;
    return detail::saturate(beta / span);
  }

  double camera_proximity(const Pose& gi, const Pose& gj) const {
    const AgentGeometry& geo = geometries_[agent_];
    const double raw = fov_proximity(gi, geo, gj);
    if (!params_.normalized()) return std::max(raw, 0.0);
    const double h2 = geo.fov_half_angle * geo.fov_half_angle;
    const double outside = std::clamp(raw / (M_PI * M_PI - h2), 0.0, 1.0);
    const double far = detail::saturate((gj.q - gi.q).squaredNorm() /
                                        (params_.fov_range * params_.fov_range));
    return 1.0 - (1.0 - outside) * (1.0 - far);
  }

  ObstacleValue obstacle(std::span<const Pose> poses) const {
    check_size(poses);
    if (tree_.empty()) return {params_.normalized() ? params_.obstacle_scale : 1.0, 0};
    const int s = agent_count();
    const Pose& gi = poses[agent_];
    double col[kMaxAgents];
    double cam[kMaxAgents];
    for (int j = 0; j < s; ++j) {
      if (j == agent_) continue;
      col[j] = collision_proximity(gi, poses[j], j);
      if (params_.fov_avoidance) cam[j] = camera_proximity(gi, poses[j]);
    }
    std::vector<double> b(tree_.size());
    for (std::size_t n = 0; n < tree_.size(); ++n) {
      const RelationNode& node = tree_.nodes[n];
      double sum = 0.0;
      if (node.kind == RelationKind::kFieldOfView) {
        sum = cam[node.members[0]];
      } else {
        for (int j : node.members) sum += col[j];
      }
      b[n] = sum;
    }
    ObstacleValue out = detail::product_of_rvfs(tree_, b, params_);
    if (params_.normalized()) out.G *= params_.obstacle_scale / far_field_;
    return out;
  }

  double potential(std::span<const Pose> poses, const Pose& goal) const {
    const double gamma = goal_distance(poses[agent_], goal);
    const double G = obstacle(poses).G;
    return potential_value(gamma, correction(G, params_), G, params_);
  }

  /// Central differences of psi along g_j exp(+-h e_a), a = 0..5. With
  /// j = agent() this is the left-trivialized differential of psi_i with
  /// respect to the agent's own pose.
  Wrench gradient_wrt(std::span<const Pose> poses, const Pose& goal, int j,
                      double h = 1e-5) const {
    check_step(h);
    std::vector<Pose> work(poses.begin(), poses.end());
    Vec6 d;
    for (int a = 0; a < 6; ++a) {
      const Twist e = Twist::basis(a);
      work[j] = lie::compose(poses[j], lie::exp(e, h));
      const double plus = potential(work, goal);
      work[j] = lie::compose(poses[j], lie::exp(e, -h));
      const double minus = potential(work, goal);
      d(a) = (plus - minus) / (2.0 * h);
    }
    return Wrench::from_vector(d);
  }

  Wrench gradient(std::span<const Pose> poses, const Pose& goal,
                  double h = 1e-5) const {
    return gradient_wrt(poses, goal, agent_, h);
  }

  /// Rate of change of psi_i caused by the neighbors' motion,
  /// sum_j <d psi_i / d g_j, xi_j>. Each term is the central difference of
  /// psi along the neighbor's own twist direction, which equals the pairing
  /// of the finite-difference gradient with xi_j to O(h^2).
  double dpsi_dt(std::span<const Pose> poses, std::span<const Twist> twists,
                 const Pose& goal, double h = 1e-5) const {
    check_step(h);
    check_size(poses);
    std::vector<Pose> work(poses.begin(), poses.end());
    double total = 0.0;
    for (int j = 0; j < agent_count(); ++j) {
      if (j == agent_) continue;
      const Vec6 x = twists[j].vector();
      const double n = x.norm();
      if (n == 0.0) continue;
      const Twist dir = Twist::from_vector(x / n);
      work[j] = lie::compose(poses[j], lie::exp(dir, h));
      const double plus = potential(work, goal);
      work[j] = lie::compose(poses[j], lie::exp(dir, -h));
      const double minus = potential(work, goal);
      work[j] = poses[j];
      total += n * (plus - minus) / (2.0 * h);
    }
    return total;
  }

 private:
  void check_size(std::span<const Pose> poses) const {
    if (static_cast<int>(poses.size()) != agent_count()) {
      throw InvalidArgument("NavigationField: pose list size mismatch");
    }
  }
  static void check_step(double h) {
    if (!(h >= 1e-7 && h <= 1e-3)) {
      throw InvalidArgument("finite-difference step must be in [1e-7, 1e-3]");
    }
  }

  int agent_;
  std::vector<AgentGeometry> geometries_;
  NavParams params_;
  RelationTree tree_;
  double far_field_ = 1.0;
};

// ---------------------------------------------------------------------------
// Free-function forms
// ---------------------------------------------------------------------------

/// G_i evaluated on a prebuilt tree (raw proximities, no normalization
/// unless the params request it).
inline ObstacleValue obstacle_function(int i, std::span<const Pose> poses,
                                       std::span<const AgentGeometry> geometries,
                                       const NavParams& params) {
  const NavigationField field(
      i, std::vector<AgentGeometry>(geometries.begin(), geometries.end()),
      params);
  return field.obstacle(poses);
}

inline double potential(int i, std::span<const Pose> poses, const Pose& goal,
                        std::span<const AgentGeometry> geometries,
                        const NavParams& params) {
  const NavigationField field(
      i, std::vector<AgentGeometry>(geometries.begin(), geometries.end()),
      params);
  return field.potential(poses, goal);
}

}  // namespace se3nav
