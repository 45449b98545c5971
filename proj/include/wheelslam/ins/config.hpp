#pragma once

#include <cmath>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/rotation.hpp"

namespace wheelslam {

inline constexpr double kGravity = 9.80665;

struct WheelInsConfig {
  double wheel_radius = 0.3;          // m
  Vec3 lever_arm = Vec3::Zero();      // m, wheel centre -> IMU, rotating with the wheel
  double imu_rate = 200.0;            // Hz

  // Noise model (ICM20602 grade).
  double gyro_arw = 0.24;             // deg/sqrt(h)
  double accel_vrw = 3.0;             // m/s/sqrt(h)
  double gyro_bias_instability = 200.0;  // deg/h
  double accel_bias_instability = 0.01;  // m/s^2
  double bias_correlation_time = 3600.0; // s

  // Initial uncertainty after static alignment.
  double init_position_std = 0.01;    // m
  double init_velocity_std = 0.01;    // m/s
  double init_roll_pitch_std = 0.1;   // deg
  double init_heading_std = 0.1;      // deg
  double init_gyro_bias_std = 20.0;   // deg/h
  double init_accel_bias_std = 0.01;  // m/s^2
  double init_gyro_scale_std = 5000.0;   // ppm
  double init_accel_scale_std = 1000.0;  // ppm

  // Observation model.
  double wheel_velocity_std = 0.05;   // m/s, e_v
  double nhc_std = 0.05;              // m/s
  double update_interval = 1.0;       // s, upper bound; also at least once per revolution
  double chi2_gate = 16.266;          // 99.9% quantile, 3 dof

  // Odometry output.
  double increment_distance = 0.5;    // m, roll sample distance

  // Static alignment.
  double align_duration = 2.0;        // s
  double align_max_accel_var = 1.0;   // (m/s^2)^2
  double align_max_gyro_mean = 0.05;  // rad/s

  double arw_rad_sqrt_s() const { return deg2rad(gyro_arw) / 60.0; }
  double vrw_ms_sqrt_s() const { return accel_vrw / 60.0; }
  double gyro_bias_rad_s() const { return deg2rad(gyro_bias_instability) / 3600.0; }

  void validate() const {
    if (!(wheel_radius > 0.0)) throw InvalidInput("wheel_radius must be positive");
    if (!(imu_rate > 0.0)) throw InvalidInput("imu_rate must be positive");
    if (!lever_arm.allFinite()) throw InvalidInput("lever_arm must be finite");
    for (double s : {wheel_velocity_std, nhc_std, gyro_arw, accel_vrw, init_position_std,
                     init_velocity_std, init_roll_pitch_std, init_heading_std}) {
      if (!(s > 0.0)) throw InvalidInput("noise standard deviations must be positive");
    }
    if (!(update_interval > 0.0)) throw InvalidInput("update_interval must be positive");
    if (!(increment_distance > 0.0)) throw InvalidInput("increment_distance must be positive");
  }
};

}  // namespace wheelslam
