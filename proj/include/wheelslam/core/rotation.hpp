#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "wheelslam/core/errors.hpp"

namespace wheelslam {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

/// Unit quaternion for the rotation vector `rv` (axis * angle).
inline Eigen::Quaterniond quat_from_rotvec(const Vec3& rv) {
  const double angle = rv.norm();
  if (angle < 1e-12) {
    // second-order expansion keeps the result accurate for tiny steps
    Eigen::Quaterniond q(1.0 - angle * angle / 8.0, 0.5 * rv.x(), 0.5 * rv.y(), 0.5 * rv.z());
    return q.normalized();
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, rv / angle));
}

inline Vec3 rotvec_from_quat(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.w() < 0.0 ? Eigen::Quaterniond(-q_in.coeffs()) : q_in;
  const double s = q.vec().norm();
  if (s < 1e-15) return 2.0 * q.vec();
  const double angle = 2.0 * std::atan2(s, q.w());
  return q.vec() * (angle / s);
}

inline Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
inline Mat3 rot_y(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }
inline Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

/// Body-to-navigation rotation stored as a unit quaternion.
class Attitude {
 public:
  Attitude() = default;
  explicit Attitude(const Eigen::Quaterniond& q) : q_(q.normalized()) {}
  explicit Attitude(const Mat3& c_nb) : q_(Eigen::Quaterniond(c_nb).normalized()) {}

  static Attitude identity() { return Attitude(); }
  static Attitude from_rotvec(const Vec3& rv) { return Attitude(quat_from_rotvec(rv)); }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }

  /// Maps a body-frame vector into the navigation frame.
  Vec3 to_nav(const Vec3& v_b) const { return q_ * v_b; }
  /// Maps a navigation-frame vector into the body frame.
  Vec3 to_body(const Vec3& v_n) const { return q_.conjugate() * v_n; }

  /// this * other (apply `other` first, expressed in the body frame).
  Attitude operator*(const Attitude& other) const { return Attitude(q_ * other.q_); }
  Attitude inverse() const { return Attitude(q_.conjugate()); }

  /// Rotation angle between two attitudes, radians.
  double angle_to(const Attitude& other) const {
    return rotvec_from_quat(q_.conjugate() * other.q_).norm();
  }

 private:
  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

/// Rotates `att` by the body-frame increment omega*dt. Single-sample scheme:
/// omega is taken constant (or interval-averaged) over the step.
inline Attitude integrate_attitude(const Attitude& att, const Vec3& omega, double dt) {
  if (!all_finite(omega) || !std::isfinite(dt)) {
    throw InvalidInput("integrate_attitude: non-finite input");
  }
  if (!(dt > 0.0)) throw InvalidInput("integrate_attitude: dt must be positive");
  Eigen::Quaterniond q = att.quaternion() * quat_from_rotvec(omega * dt);
  return Attitude(q);
}

}  // namespace wheelslam
