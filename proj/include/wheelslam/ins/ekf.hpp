#pragma once

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/errors.hpp"
#include "wheelslam/ins/config.hpp"
#include "wheelslam/ins/mechanization.hpp"
#include "wheelslam/ins/types.hpp"

namespace wheelslam {

/// Forward wheel speed from the spin-axis gyro: v = omega_x * r.
inline double wheel_velocity(double omega_x, double wheel_radius) {
  if (!(wheel_radius > 0.0)) throw InvalidInput("wheel_velocity: radius must be positive");
  return omega_x * wheel_radius;
}

/// Spin rate of the wheel about its own axis. On a banked road the tilted
/// axis also picks up part of the vehicle yaw rate; that share is removed
/// using the vertical component of the nav-frame body rate.
inline double wheel_spin_rate(const Attitude& att, const Vec3& gyro) {
  const double az = spin_axis_nav(att).z();
  const double wz = att.to_nav(gyro).z();
  return (gyro.x() - az * wz) / (1.0 - az * az);
}

/// Initial covariance after alignment.
inline ErrorState initial_error_state(const WheelInsConfig& cfg) {
  ErrorState e;
  auto set = [&](int idx, double sigma) {
    e.P.block<3, 3>(idx, idx) = Mat3::Identity() * sigma * sigma;
  };
  set(es::kPos, cfg.init_position_std);
  set(es::kVel, cfg.init_velocity_std);
  e.P.block<3, 3>(es::kAtt, es::kAtt) =
      Eigen::Vector3d(deg2rad(cfg.init_roll_pitch_std), deg2rad(cfg.init_roll_pitch_std),
                      deg2rad(cfg.init_heading_std))
          .array()
          .square()
          .matrix()
          .asDiagonal();
  set(es::kGyroBias, deg2rad(cfg.init_gyro_bias_std) / 3600.0);
  set(es::kAccelBias, cfg.init_accel_bias_std);
  set(es::kGyroScale, cfg.init_gyro_scale_std * 1e-6);
  set(es::kAccelScale, cfg.init_accel_scale_std * 1e-6);
  return e;
}

struct CovarianceHealth {
  double asymmetry = 0.0;   // ||P - P^T|| / ||P||
  double min_eigenvalue = 0.0;
  bool ok(double sym_tol = 1e-10, double psd_tol = -1e-12) const {
    return asymmetry < sym_tol && min_eigenvalue >= psd_tol;
  }
};

inline CovarianceHealth covariance_health(const ErrorCovariance& P) {
  CovarianceHealth h;
  const double n = P.norm();
  h.asymmetry = n > 0.0 ? (P - P.transpose()).norm() / n : 0.0;
  Eigen::SelfAdjointEigenSolver<ErrorCovariance> eig(P, Eigen::EigenvaluesOnly);
  h.min_eigenvalue = eig.eigenvalues().minCoeff();
  return h;
}

inline void symmetrize(ErrorCovariance& P) { P = 0.5 * (P + P.transpose()).eval(); }

/// Propagates the error covariance over one sample with the linearised
/// flat-earth INS error model. Biases are random walks, scale factors
/// random constants. `sample` is the bias-corrected measurement.
inline ErrorState ekf_predict(const ErrorState& err, const InsState& state, const ImuSample& sample,
                              double dt, const WheelInsConfig& cfg) {
  if (dt < 0.0 || !std::isfinite(dt)) throw InvalidInput("ekf_predict: dt must be non-negative");
  if (dt == 0.0) return err;

  const Mat3 c_nb = state.attitude.matrix();
  const Vec3 f_nav = c_nb * sample.accel;

  ErrorCovariance F = ErrorCovariance::Zero();
  F.block<3, 3>(es::kPos, es::kVel) = Mat3::Identity();
  F.block<3, 3>(es::kVel, es::kAtt) = skew(f_nav);
  F.block<3, 3>(es::kVel, es::kAccelBias) = c_nb;
  F.block<3, 3>(es::kVel, es::kAccelScale) = c_nb * sample.accel.asDiagonal();
  F.block<3, 3>(es::kAtt, es::kGyroBias) = -c_nb;
  F.block<3, 3>(es::kAtt, es::kGyroScale) = -c_nb * sample.gyro.asDiagonal();

  const ErrorCovariance Phi = ErrorCovariance::Identity() + F * dt;

  const double q_arw = std::pow(cfg.arw_rad_sqrt_s(), 2);
  const double q_vrw = std::pow(cfg.vrw_ms_sqrt_s(), 2);
  const double tau = cfg.bias_correlation_time;
  const double q_bg = 2.0 * std::pow(cfg.gyro_bias_rad_s(), 2) / tau;
  const double q_ba = 2.0 * std::pow(cfg.accel_bias_instability, 2) / tau;

  ErrorState out;
  out.x = Phi * err.x;
  out.P = Phi * err.P * Phi.transpose();
  for (int i = 0; i < 3; ++i) {
    out.P(es::kVel + i, es::kVel + i) += q_vrw * dt;
    out.P(es::kAtt + i, es::kAtt + i) += q_arw * dt;
    out.P(es::kGyroBias + i, es::kGyroBias + i) += q_bg * dt;
    out.P(es::kAccelBias + i, es::kAccelBias + i) += q_ba * dt;
  }
  symmetrize(out.P);
  for (int i = 0; i < es::kDim; ++i) {
    if (!(out.P(i, i) >= 0.0)) throw NumericalFailure("ekf_predict: negative or NaN variance");
  }
  return out;
}

using ObservationMatrix = Eigen::Matrix<double, 3, es::kDim>;

/// Predicted v-frame velocity of the wheel centre and its Jacobian with
/// respect to the error state, excluding the wheel-speed gyro term.
struct VelocityModel {
  Vec3 predicted = Vec3::Zero();
  ObservationMatrix H = ObservationMatrix::Zero();
};

inline VelocityModel vehicle_velocity_model(const InsState& state, const ImuSample& sample,
                                            const WheelInsConfig& cfg) {
  const Mat3 c_nb = state.attitude.matrix();
  const Vec3 a = c_nb.col(0);  // spin axis in n
  const double heading = std::atan2(a.x(), -a.y());
  const double bank = std::asin(std::clamp(-a.z(), -1.0, 1.0));
  const Mat3 c_nv = vehicle_to_nav(heading, bank);
  const Mat3 c_vn = c_nv.transpose();

  const Vec3 lever_vel_nav = c_nb * sample.gyro.cross(cfg.lever_arm);
  const Vec3 v_centre = state.velocity - lever_vel_nav;

  VelocityModel m;
  m.predicted = c_vn * v_centre;

  // d(h)/d(heading, bank) with the centre velocity held fixed.
  Eigen::Matrix<double, 3, 2> dh_dangles;
  dh_dangles.col(0) = c_vn * v_centre.cross(Vec3::UnitZ());
  dh_dangles.col(1) = m.predicted.cross(Vec3::UnitX());
  // d(heading, bank)/d(spin axis), and d(axis)/d(phi) = [a x].
  const double cb2 = std::max(a.x() * a.x() + a.y() * a.y(), 1e-12);
  Eigen::Matrix<double, 2, 3> dangles_da;
  dangles_da << -a.y() / cb2, a.x() / cb2, 0.0,
                0.0, 0.0, -1.0 / std::sqrt(cb2);
  const Mat3 frame_term = dh_dangles * dangles_da * skew(a);

  m.H.block<3, 3>(0, es::kVel) = c_vn;
  m.H.block<3, 3>(0, es::kAtt) = frame_term - c_vn * skew(lever_vel_nav);
  const Mat3 lever_gyro = c_vn * c_nb * skew(cfg.lever_arm);
  m.H.block<3, 3>(0, es::kGyroBias) = lever_gyro;
  m.H.block<3, 3>(0, es::kGyroScale) = lever_gyro * sample.gyro.asDiagonal();
  return m;
}

struct VelocityUpdateResult {
  ErrorState error;
  bool accepted = false;
  double mahalanobis2 = 0.0;
  Vec3 innovation = Vec3::Zero();
};

/// Wheel-speed + non-holonomic 3D velocity update. Observation:
/// z = h(x) - [v_wheel, 0, 0]; the gyro error r*(b_gx + omega_x*s_gx)
/// enters the first row. Rejected (state untouched) above the chi-square gate.
inline VelocityUpdateResult ekf_update_velocity(const ErrorState& err, const InsState& state,
                                                const ImuSample& sample, double v_wheel,
                                                const WheelInsConfig& cfg) {
  if (!std::isfinite(v_wheel)) throw InvalidInput("ekf_update_velocity: non-finite wheel velocity");
  VelocityModel model = vehicle_velocity_model(state, sample, cfg);
  ObservationMatrix& H = model.H;
  H(0, es::kGyroBias) -= cfg.wheel_radius;
  H(0, es::kGyroScale) -= cfg.wheel_radius * sample.gyro.x();

  const Vec3 z = model.predicted - Vec3(v_wheel, 0.0, 0.0);
  Mat3 R = Mat3::Zero();
  R(0, 0) = cfg.wheel_velocity_std * cfg.wheel_velocity_std;
  R(1, 1) = R(2, 2) = cfg.nhc_std * cfg.nhc_std;

  const Vec3 innovation = z - H * err.x;
  const Mat3 S = H * err.P * H.transpose() + R;
  const Eigen::LDLT<Mat3> S_ldlt(S);
  const double d2 = innovation.dot(S_ldlt.solve(innovation));

  VelocityUpdateResult out;
  out.error = err;
  out.mahalanobis2 = d2;
  out.innovation = innovation;
  if (!std::isfinite(d2)) throw NumericalFailure("ekf_update_velocity: non-finite innovation");
  if (d2 > cfg.chi2_gate) return out;

  const Eigen::Matrix<double, es::kDim, 3> K = S_ldlt.solve(H * err.P).transpose();
  if (!K.allFinite()) throw NumericalFailure("ekf_update_velocity: non-finite gain");
  out.error.x = err.x + K * innovation;
  const ErrorCovariance IKH = ErrorCovariance::Identity() - K * H;
  out.error.P = IKH * err.P * IKH.transpose() + K * R * K.transpose();
  symmetrize(out.error.P);
  out.accepted = true;
  return out;
}

/// Closed-loop correction of the navigation state with the current error
/// estimate. The estimate is zeroed; the covariance is kept.
inline InsState feedback(const InsState& state, ErrorState& err) {
  InsState out = state;
  out.position -= err.x.segment<3>(es::kPos);
  out.velocity -= err.x.segment<3>(es::kVel);
  const Vec3 phi = err.x.segment<3>(es::kAtt);
  out.attitude = Attitude(quat_from_rotvec(phi) * state.attitude.quaternion());
  out.sensor.gyro_bias += err.x.segment<3>(es::kGyroBias);
  out.sensor.accel_bias += err.x.segment<3>(es::kAccelBias);
  out.sensor.gyro_scale += err.x.segment<3>(es::kGyroScale);
  out.sensor.accel_scale += err.x.segment<3>(es::kAccelScale);
  err.x.setZero();
  return out;
}

}  // namespace wheelslam
