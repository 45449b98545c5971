#pragma once

#include <vector>

#include "wheelslam/core/rotation.hpp"
#include "wheelslam/ins/config.hpp"
#include "wheelslam/ins/mechanization.hpp"
#include "wheelslam/ins/types.hpp"
#include "wheelslam/sim/trajectory.hpp"

namespace wheelslam::sim {

/// Exact kinematics of the Wheel-IMU at one truth epoch.
struct ImuKinematics {
  Eigen::Quaterniond c_nb;   // b -> n
  Vec3 omega_b;              // instantaneous angular rate, b-frame
  Vec3 velocity_n;           // velocity of the IMU point, n-frame
  Vec3 position_n;           // position of the IMU point, n-frame
};

/// Attitude composed as C(heading) * C(bank) * C_vb0 * C(spin).
inline Eigen::Quaterniond truth_attitude(const TruthSample& s) {
  const Mat3 c = rot_z(s.heading) * rot_x(s.bank) * body_to_vehicle_at_rest() * rot_x(s.spin);
  return Eigen::Quaterniond(c).normalized();
}

inline ImuKinematics imu_kinematics(const TruthSample& s, double wheel_radius, const Vec3& lever_arm) {
  ImuKinematics k;
  k.c_nb = truth_attitude(s);
  const double heading_rate = s.curvature * s.speed;
  const Vec3 omega_v(s.bank_rate, heading_rate * std::sin(s.bank), heading_rate * std::cos(s.bank));
  const Mat3 c_vb = body_to_vehicle_at_rest() * rot_x(s.spin);
  k.omega_b = c_vb.transpose() * omega_v + Vec3(s.speed / wheel_radius, 0.0, 0.0);
  const Vec3 v_centre(s.speed * std::cos(s.heading), s.speed * std::sin(s.heading), 0.0);
  k.velocity_n = v_centre + k.c_nb * k.omega_b.cross(lever_arm);
  k.position_n = Vec3(s.position.x(), s.position.y(), 0.0) + k.c_nb * lever_arm;
  return k;
}

/// Error-free IMU stream. Sample k covers (t_{k-1}, t_k]: the gyro is the
/// exact attitude increment divided by dt, the accelerometer the exact
/// velocity increment (less gravity) resolved in the mid-interval body frame.
inline std::vector<ImuSample> synthesize_imu(const GroundTruth& truth, const Vec3& lever_arm = Vec3::Zero()) {
  std::vector<ImuSample> out;
  if (truth.samples.size() < 2) return out;
  out.reserve(truth.samples.size() - 1);
  ImuKinematics prev = imu_kinematics(truth.samples.front(), truth.wheel_radius, lever_arm);
  const Vec3 g_reaction(0.0, 0.0, kGravity);
  for (std::size_t k = 1; k < truth.samples.size(); ++k) {
    const TruthSample& s = truth.samples[k];
    const ImuKinematics cur = imu_kinematics(s, truth.wheel_radius, lever_arm);
    const double dt = s.t - truth.samples[k - 1].t;
    const Vec3 dtheta = rotvec_from_quat(prev.c_nb.conjugate() * cur.c_nb);
    const Eigen::Quaterniond c_mid = prev.c_nb * quat_from_rotvec(0.5 * dtheta);
    ImuSample sample;
    sample.t = s.t;
    sample.gyro = dtheta / dt;
    sample.accel = c_mid.conjugate() * ((cur.velocity_n - prev.velocity_n) / dt + g_reaction);
    out.push_back(sample);
    prev = cur;
  }
  return out;
}

/// Initial navigation state matching the first truth epoch.
inline InsState truth_initial_state(const GroundTruth& truth, const Vec3& lever_arm = Vec3::Zero()) {
  const TruthSample& s = truth.samples.front();
  const ImuKinematics k = imu_kinematics(s, truth.wheel_radius, lever_arm);
  InsState st;
  st.position = k.position_n;
  st.velocity = k.velocity_n;
  st.attitude = Attitude(k.c_nb);
  st.timestamp = s.t;
  return st;
}

}  // namespace wheelslam::sim
