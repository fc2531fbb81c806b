#pragma once

#include <random>

#include "se3nav/lie.hpp"

namespace se3nav::testing {

inline Vec3 rand3(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n;
  return scale * Vec3(n(rng), n(rng), n(rng));
}

inline Twist rand_twist(std::mt19937_64& rng, double scale = 1.0) {
  return {rand3(rng, scale), rand3(rng, scale)};
}

inline Wrench rand_wrench(std::mt19937_64& rng, double scale = 1.0) {
  return {rand3(rng, scale), rand3(rng, scale)};
}

inline Pose rand_pose(std::mt19937_64& rng, double spread = 2.0) {
  Vec3 w = rand3(rng);
  if (w.norm() > 3.0) w *= 3.0 / w.norm();
  return {lie::so3_exp(w), rand3(rng, spread)};
}

/// exp of a 4x4 matrix by its Taylor series.
inline Mat4 series_exp(const Mat4& A, int terms = 20) {
  Mat4 out = Mat4::Identity();
  Mat4 term = Mat4::Identity();
  for (int k = 1; k < terms; ++k) {
    term = term * A / static_cast<double>(k);
    out += term;
  }
  return out;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace se3nav::testing
