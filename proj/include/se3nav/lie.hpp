#pragma once

// Lie-group and Lie-algebra arithmetic for SO(3) and SE(3).
//
// Conventions:
//   Pose   g = [[R, q], [0, 1]]
//   Twist  xi = (omega, v), body frame, embedded as [[hat(omega), v], [0, 0]]
//   Wrench m = (torque, force), the dual of a twist under
//          <m, xi> = torque . omega + force . v

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "se3nav/errors.hpp"

namespace se3nav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Element of se(3): body angular velocity and body linear velocity.
struct Twist {
  Vec3 omega = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  static Twist zero() { return {}; }
  static Twist from_vector(const Vec6& x) {
    return {x.head<3>(), x.tail<3>()};
  }
  /// Basis direction e_a, a in [0, 6): rotations first, then translations.
  static Twist basis(int a) {
    Vec6 x = Vec6::Zero();
    x(a) = 1.0;
    return from_vector(x);
  }
  Vec6 vector() const {
    Vec6 x;
    x << omega, v;
    return x;
  }

  Twist operator+(const Twist& o) const { return {omega + o.omega, v + o.v}; }
  Twist operator-(const Twist& o) const { return {omega - o.omega, v - o.v}; }
  Twist operator-() const { return {-omega, -v}; }
  Twist operator*(double s) const { return {omega * s, v * s}; }
  friend Twist operator*(double s, const Twist& t) { return t * s; }
  bool operator==(const Twist& o) const {
    return omega == o.omega && v == o.v;
  }
};

/// Element of se(3)*: torque-like and force-like parts.
struct Wrench {
  Vec3 torque = Vec3::Zero();
  Vec3 force = Vec3::Zero();

  static Wrench zero() { return {}; }
  static Wrench from_vector(const Vec6& x) {
    return {x.head<3>(), x.tail<3>()};
  }
  Vec6 vector() const {
    Vec6 x;
    x << torque, force;
    return x;
  }

  Wrench operator+(const Wrench& o) const {
    return {torque + o.torque, force + o.force};
  }
  Wrench operator-(const Wrench& o) const {
    return {torque - o.torque, force - o.force};
  }
  Wrench operator-() const { return {-torque, -force}; }
  Wrench operator*(double s) const { return {torque * s, force * s}; }
  friend Wrench operator*(double s, const Wrench& w) { return w * s; }
  bool operator==(const Wrench& o) const {
    return torque == o.torque && force == o.force;
  }
};

/// Natural pairing between se(3)* and se(3).
inline double pairing(const Wrench& m, const Twist& xi) {
  return m.torque.dot(xi.omega) + m.force.dot(xi.v);
}

/// Rigid-body pose on SE(3).
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 q = Vec3::Zero();

  static Pose identity() { return {}; }

  Mat4 matrix() const {
    Mat4 g = Mat4::Identity();
    g.topLeftCorner<3, 3>() = R;
    g.topRightCorner<3, 1>() = q;
    return g;
  }
  static Pose from_matrix(const Mat4& g) {
    return {g.topLeftCorner<3, 3>(), g.topRightCorner<3, 1>()};
  }
};

namespace lie {

inline constexpr double kSkewTolerance = 1e-9;
inline constexpr double kBranchMargin = 1e-6;
inline constexpr double kSmallAngle = 1e-4;
inline constexpr double kOrthoDrift = 1e-9;
/// Below this angle the cancellation-prone Jacobian coefficients use series.
inline constexpr double kSeriesAngle = 0.1;

namespace detail {

/// (1 - cos th) / th^2 without cancellation.
inline double one_minus_cos_over_sq(double th) {
  const double s = std::sin(0.5 * th) / (0.5 * th);
  return 0.5 * s * s;
}

}  // namespace detail

inline Mat3 hat(const Vec3& w) {
  Mat3 s;
  // clang-format off
  s <<   0.0, -w.z(),  w.y(),
       w.z(),    0.0, -w.x(),
      -w.y(),  w.x(),    0.0;
  // clang-format on
  return s;
}

inline Vec3 vee(const Mat3& s) {
  if ((s + s.transpose()).norm() >= kSkewTolerance) {
    throw InvalidArgument("vee: matrix is not skew-symmetric");
  }
  return {s(2, 1), s(0, 2), s(1, 0)};
}

/// ||R^T R - I||_F, the orthogonality drift of a rotation block.
inline double rotation_drift(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

inline bool is_rotation(const Mat3& R, double tol = 1e-9) {
  return rotation_drift(R) < tol && std::abs(R.determinant() - 1.0) < tol;
}

/// Closest rotation in the Frobenius sense (polar factor).
inline Mat3 orthonormalize(const Mat3& R) {
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU();
  const Mat3& V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(2) *= -1.0;
  return U * V.transpose();
}

/// Rodrigues' formula.
inline Mat3 so3_exp(const Vec3& w) {
  const double th2 = w.squaredNorm();
  const double th = std::sqrt(th2);
  double a, b;
  if (th < kSmallAngle) {
    a = 1.0 - th2 / 6.0 + th2 * th2 / 120.0;
    b = 0.5 - th2 / 24.0 + th2 * th2 / 720.0;
  } else {
    a = std::sin(th) / th;
    b = detail::one_minus_cos_over_sq(th);
  }
  const Mat3 W = hat(w);
  return Mat3::Identity() + a * W + b * W * W;
}

/// Principal-branch rotation logarithm. Throws BranchCutError when the
/// rotation angle is within kBranchMargin of pi.
inline Vec3 so3_log(const Mat3& R) {
  const Vec3 w(0.5 * (R(2, 1) - R(1, 2)), 0.5 * (R(0, 2) - R(2, 0)),
               0.5 * (R(1, 0) - R(0, 1)));
  const double s = w.norm();
  const double c = 0.5 * (R.trace() - 1.0);
  const double th = std::atan2(s, c);
  if (th >= M_PI - kBranchMargin) {
    throw BranchCutError("so3_log: rotation angle at or beyond pi - 1e-6");
  }
  if (th < kSmallAngle) {
    const double th2 = th * th;
    return w * (1.0 + th2 / 6.0 + 7.0 * th2 * th2 / 360.0);
  }
  return w * (th / s);
}

/// Left Jacobian of SO(3); the translation block of exp on SE(3).
inline Mat3 so3_left_jacobian(const Vec3& w) {
  const double th2 = w.squaredNorm();
  const double th = std::sqrt(th2);
  const double th4 = th2 * th2;
  const double b = th < kSmallAngle ? 0.5 - th2 / 24.0 + th4 / 720.0
                                    : detail::one_minus_cos_over_sq(th);
  const double c = th < kSeriesAngle
                       ? 1.0 / 6.0 - th2 / 120.0 + th4 / 5040.0 - th4 * th2 / 362880.0 +
                             th4 * th4 / 39916800.0
                       : (th - std::sin(th)) / (th2 * th);
  const Mat3 W = hat(w);
  return Mat3::Identity() + b * W + c * W * W;
}

inline Mat3 so3_left_jacobian_inverse(const Vec3& w) {
  const double th2 = w.squaredNorm();
  const double th = std::sqrt(th2);
  const double th4 = th2 * th2;
  const double d = th < kSeriesAngle
                       ? 1.0 / 12.0 + th2 / 720.0 + th4 / 30240.0 + th4 * th2 / 1209600.0 +
                             th4 * th4 / 47900160.0
                       : (1.0 - 0.5 * th / std::tan(0.5 * th)) / th2;
  const Mat3 W = hat(w);
  return Mat3::Identity() - 0.5 * W + d * W * W;
}

/// exp(t * xi) on SE(3), closed form.
inline Pose exp(const Twist& xi, double t = 1.0) {
  const Vec3 w = xi.omega * t;
  return {so3_exp(w), so3_left_jacobian(w) * (xi.v * t)};
}

/// Principal-branch logarithm on SE(3).
inline Twist log(const Pose& g) {
  const Vec3 w = so3_log(g.R);
  return {w, so3_left_jacobian_inverse(w) * g.q};
}

inline Pose compose(const Pose& a, const Pose& b) {
  return {a.R * b.R, a.R * b.q + a.q};
}

inline Pose inverse(const Pose& g) {
  const Mat3 Rt = g.R.transpose();
  return {Rt, -Rt * g.q};
}

inline const Mat3& project_rotation(const Pose& g) { return g.R; }
inline const Vec3& project_position(const Pose& g) { return g.q; }

/// 4x4 matrix representative of a twist.
inline Mat4 embed(const Twist& xi) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = hat(xi.omega);
  m.topRightCorner<3, 1>() = xi.v;
  return m;
}

/// xi = g^{-1} g_dot for a tangent vector g_dot at g.
inline Twist left_trivialize(const Pose& g, const Mat4& g_dot) {
  if (g_dot.row(3).norm() != 0.0) {
    throw InvalidArgument("left_trivialize: tangent has nonzero bottom row");
  }
  const Mat4 m = inverse(g).matrix() * g_dot;
  Mat3 s = m.topLeftCorner<3, 3>();
  // Rounding from the product leaves s skew only up to ~1e-16; symmetrize
  // before the strict vee check.
  s = 0.5 * (s - s.transpose()).eval();
  return {vee(s), m.topRightCorner<3, 1>()};
}

/// Lie bracket [eta, zeta] on se(3).
inline Twist ad(const Twist& eta, const Twist& zeta) {
  return {eta.omega.cross(zeta.omega),
          eta.omega.cross(zeta.v) - zeta.omega.cross(eta.v)};
}

/// Dual adjoint: <ad*_xi m, zeta> = <m, ad_xi zeta>.
inline Wrench ad_star(const Twist& xi, const Wrench& m) {
  return {m.torque.cross(xi.omega) - xi.v.cross(m.force),
          -xi.omega.cross(m.force)};
}

/// Inverse of the right-trivialized differential of exp, truncated after the
/// second commutator (exact to the order an RKMK4 stage needs).
inline Twist dexp_inv(const Twist& theta, const Twist& xi) {
  const Twist a1 = ad(theta, xi);
  return xi + 0.5 * a1 + (1.0 / 12.0) * ad(theta, a1);
}

}  // namespace lie

/// Inertia isomorphism I : se(3) -> se(3)*, with its inverse and the
/// left-invariant metric <<a, b>> = <I a, b>.
class Inertia {
 public:
  explicit Inertia(const Mat6& M) : M_(M) {
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw InvalidArgument("Inertia: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat6> eig(M);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
      throw InvalidArgument("Inertia: matrix is not positive definite");
    }
    llt_.compute(M);
  }

  /// Canonical block form diag(J, m I3).
  static Inertia rigid_body(const Mat3& J, double mass) {
    Mat6 M = Mat6::Zero();
    M.topLeftCorner<3, 3>() = J;
    M.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
    return Inertia(M);
  }
  static Inertia rigid_body(const Vec3& principal, double mass) {
    return rigid_body(Mat3(principal.asDiagonal()), mass);
  }

  const Mat6& matrix() const { return M_; }

  Wrench apply(const Twist& xi) const {
    return Wrench::from_vector(M_ * xi.vector());
  }
  Twist solve(const Wrench& m) const {
    return Twist::from_vector(llt_.solve(m.vector()));
  }
  double metric(const Twist& a, const Twist& b) const {
    return a.vector().dot(M_ * b.vector());
  }

 private:
  Mat6 M_;
  Eigen::LLT<Mat6> llt_;
};

}  // namespace se3nav
