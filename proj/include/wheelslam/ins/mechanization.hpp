#pragma once

#include <cmath>
#include <span>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/errors.hpp"
#include "wheelslam/core/rotation.hpp"
#include "wheelslam/ins/config.hpp"
#include "wheelslam/ins/types.hpp"

namespace wheelslam {

inline Vec3 gravity_nav() { return Vec3(0.0, 0.0, -kGravity); }

// Frame conventions
//   v-frame: x forward, y left, z up.
//   b-frame at zero spin angle: x = -y_v (outward spin axis of the right
//   wheel), y = x_v, z = z_v. Spinning forward is a positive rotation about x_b.

/// b-frame to v-frame rotation at zero wheel spin angle.
inline Mat3 body_to_vehicle_at_rest() {
  Mat3 c;
  c << 0.0, 1.0, 0.0,
       -1.0, 0.0, 0.0,
       0.0, 0.0, 1.0;
  return c;
}

/// Wheel spin axis (b-frame x) expressed in the navigation frame.
inline Vec3 spin_axis_nav(const Attitude& att) { return att.to_nav(Vec3::UnitX()); }

/// Vehicle roll, i.e. the road bank angle. Positive when the right side is
/// down. Depends only on the spin axis, so it is invariant to wheel rotation.
inline Angle vehicle_roll(const Attitude& att) {
  const Vec3 a = spin_axis_nav(att);
  return Angle(std::asin(std::clamp(-a.z(), -1.0, 1.0)));
}
inline Angle vehicle_roll(const InsState& s) { return vehicle_roll(s.attitude); }

/// Vehicle heading, counter-clockwise from the navigation x axis.
inline Angle vehicle_heading(const Attitude& att) {
  const Vec3 a = spin_axis_nav(att);
  return Angle(std::atan2(a.x(), -a.y()));
}
inline Angle vehicle_heading(const InsState& s) { return vehicle_heading(s.attitude); }

/// v-frame to n-frame rotation with the pitch of the wheel removed.
inline Mat3 vehicle_to_nav(double heading, double bank) { return rot_z(heading) * rot_x(bank); }
inline Mat3 vehicle_to_nav(const Attitude& att) {
  return vehicle_to_nav(vehicle_heading(att).rad(), vehicle_roll(att).rad());
}

struct AlignmentResult {
  Attitude attitude;
  Vec3 gyro_bias = Vec3::Zero();
};

/// Coarse alignment from stationary data: gravity levelling for roll and
/// pitch, mean angular rate for gyro bias, vehicle heading set to
/// `initial_heading` (unobservable).
inline AlignmentResult static_align(std::span<const ImuSample> samples, const WheelInsConfig& cfg,
                                    double initial_heading = 0.0) {
  if (samples.size() < 2) throw AlignmentFailed("static_align: not enough samples");
  const double span_s = samples.back().t - samples.front().t;
  if (span_s < 1.0 - 1.5 / cfg.imu_rate) {
    throw AlignmentFailed("static_align: need at least 1 s of stationary data");
  }
  Vec3 f_mean = Vec3::Zero();
  Vec3 w_mean = Vec3::Zero();
  double mag_sum = 0.0, mag_sq = 0.0;
  for (const auto& s : samples) {
    if (!s.accel.allFinite() || !s.gyro.allFinite()) throw InvalidInput("static_align: non-finite sample");
    f_mean += s.accel;
    w_mean += s.gyro;
    const double m = s.accel.norm();
    mag_sum += m;
    mag_sq += m * m;
  }
  const double n = static_cast<double>(samples.size());
  f_mean /= n;
  w_mean /= n;
  const double mag_mean = mag_sum / n;
  const double mag_var = std::max(0.0, mag_sq / n - mag_mean * mag_mean);
  if (mag_var > cfg.align_max_accel_var) {
    throw AlignmentFailed("static_align: motion detected (accelerometer variance)");
  }
  if (w_mean.norm() > cfg.align_max_gyro_mean) {
    throw AlignmentFailed("static_align: motion detected (angular rate)");
  }
  if (f_mean.norm() < 0.5 * kGravity) throw AlignmentFailed("static_align: no gravity reaction");

  const double roll = std::atan2(f_mean.y(), f_mean.z());
  const double pitch = std::atan2(-f_mean.x(), std::hypot(f_mean.y(), f_mean.z()));
  // Rz(-pi/2) puts the b-frame y axis (forward at zero spin) on the heading.
  const Mat3 c_nb = rot_z(initial_heading - kPi / 2.0) * rot_y(pitch) * rot_x(roll);
  return AlignmentResult{Attitude(c_nb), w_mean};
}

/// Strapdown update with a bias-corrected sample. Attitude uses the single
/// sample rotation vector; velocity uses the mid-interval attitude; position
/// is trapezoidal.
inline InsState mechanize(const InsState& state, const ImuSample& sample, double dt) {
  if (!(sample.t > state.timestamp)) throw InvalidInput("mechanize: non-monotonic timestamp");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("mechanize: dt must be positive");
  if (!sample.gyro.allFinite() || !sample.accel.allFinite()) {
    throw InvalidInput("mechanize: non-finite sample");
  }
  InsState out = state;
  const Vec3 dtheta = sample.gyro * dt;
  const Eigen::Quaterniond q_mid = state.attitude.quaternion() * quat_from_rotvec(0.5 * dtheta);
  out.attitude = integrate_attitude(state.attitude, sample.gyro, dt);
  const Vec3 f_nav = q_mid * sample.accel;
  out.velocity = state.velocity + (f_nav + gravity_nav()) * dt;
  out.position = state.position + 0.5 * (state.velocity + out.velocity) * dt;
  out.timestamp = sample.t;
  return out;
}

}  // namespace wheelslam
