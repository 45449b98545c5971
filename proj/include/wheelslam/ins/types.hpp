#pragma once

#include <Eigen/Core>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/rotation.hpp"

namespace wheelslam {

/// One Wheel-IMU epoch. Rates and forces are averages over the interval
/// ending at `t` (equivalent to delta-angle / delta-velocity output).
struct ImuSample {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();   // rad/s, b-frame
  Vec3 accel = Vec3::Zero();  // m/s^2, b-frame specific force

  bool operator==(const ImuSample&) const = default;
};

/// Accumulated sensor-error estimates applied to raw samples.
struct SensorCorrections {
  Vec3 gyro_bias = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_scale = Vec3::Zero();
  Vec3 accel_scale = Vec3::Zero();

  ImuSample apply(const ImuSample& raw) const {
    ImuSample s = raw;
    s.gyro = (raw.gyro - gyro_bias).cwiseQuotient(Vec3::Ones() + gyro_scale);
    s.accel = (raw.accel - accel_bias).cwiseQuotient(Vec3::Ones() + accel_scale);
    return s;
  }
};

/// Navigation state of the Wheel-IMU in a local-level (x east, y north,
/// z up) frame.
struct InsState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Attitude attitude;
  double timestamp = 0.0;
  SensorCorrections sensor;
};

/// Error-state layout: position, velocity, attitude (phi-angle), gyro bias,
/// accel bias, gyro scale, accel scale.
namespace es {
inline constexpr int kPos = 0;
inline constexpr int kVel = 3;
inline constexpr int kAtt = 6;
inline constexpr int kGyroBias = 9;
inline constexpr int kAccelBias = 12;
inline constexpr int kGyroScale = 15;
inline constexpr int kAccelScale = 18;
inline constexpr int kDim = 21;
}  // namespace es

using ErrorVector = Eigen::Matrix<double, es::kDim, 1>;
using ErrorCovariance = Eigen::Matrix<double, es::kDim, es::kDim>;

/// Error estimate and its covariance. Errors are defined as
/// estimate - truth; the attitude error phi satisfies C_true = exp(phi) C_est.
struct ErrorState {
  ErrorVector x = ErrorVector::Zero();
  ErrorCovariance P = ErrorCovariance::Zero();
};

/// Dead-reckoning increment handed to the particle filter.
struct OdometryIncrement {
  double distance = 0.0;       // m, planar distance since the previous increment
  double heading_change = 0.0; // rad, wrapped
  double roll = 0.0;           // rad, vehicle roll (road bank)
  double timestamp = 0.0;
};

}  // namespace wheelslam
