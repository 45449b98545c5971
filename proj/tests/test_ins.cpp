#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "wheelslam/ins/ekf.hpp"
#include "wheelslam/ins/mechanization.hpp"
#include "wheelslam/ins/wheel_ins.hpp"
#include "wheelslam/sim/imu_synth.hpp"
#include "wheelslam/sim/trajectory.hpp"

using namespace wheelslam;

namespace {

std::vector<ImuSample> still(const Vec3& f, const Vec3& w, double seconds, double rate = 200.0) {
  std::vector<ImuSample> out;
  const int n = static_cast<int>(std::lround(seconds * rate));
  for (int k = 1; k <= n; ++k) out.push_back({k / rate, w, f});
  return out;
}

// Wheel attitude for a vehicle with the given heading and bank.
Attitude wheel_attitude(double heading, double bank, double spin) {
  return Attitude(Mat3(rot_z(heading) * rot_x(bank) * body_to_vehicle_at_rest() * rot_x(spin)));
}

InsState level_state(double heading = 0.0) {
  InsState s;
  s.attitude = wheel_attitude(heading, 0.0, 0.0);
  return s;
}

}  // namespace

TEST(StaticAlign, LevelAndStill) {
  const auto data = still(Vec3(0, 0, kGravity), Vec3::Zero(), 2.0);
  const AlignmentResult al = static_align(data, WheelInsConfig{});
  EXPECT_NEAR(vehicle_roll(al.attitude).rad(), 0.0, 1e-12);
  EXPECT_NEAR(spin_axis_nav(al.attitude).z(), 0.0, 1e-12);
  EXPECT_LT(al.gyro_bias.norm(), 1e-15);
}

TEST(StaticAlign, RecoversTenDegreeRoll) {
  const double roll = deg2rad(10.0);
  // specific force of a still IMU rolled about its x axis
  const Vec3 f = rot_x(roll).transpose() * Vec3(0, 0, kGravity);
  const AlignmentResult al = static_align(still(f, Vec3::Zero(), 2.0), WheelInsConfig{}, 0.3);
  // undo the heading rotation; what remains is Ry(pitch) * Rx(roll)
  const Mat3 m = rot_z(kPi / 2.0 - 0.3) * al.attitude.matrix();
  EXPECT_NEAR(std::atan2(m(2, 1), m(2, 2)), roll, 1e-6);
  EXPECT_NEAR(std::asin(-m(2, 0)), 0.0, 1e-9);
}

TEST(StaticAlign, ConstantRateIsBias) {
  const AlignmentResult al = static_align(still(Vec3(0, 0, kGravity), Vec3(0.01, 0, 0), 2.0), WheelInsConfig{});
  EXPECT_NEAR((al.gyro_bias - Vec3(0.01, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(StaticAlign, RejectsMotionAndShortData) {
  EXPECT_THROW(static_align(still(Vec3(0, 0, kGravity), Vec3(1.0, 0, 0), 2.0), WheelInsConfig{}), AlignmentFailed);
  EXPECT_THROW(static_align(still(Vec3(0, 0, kGravity), Vec3::Zero(), 0.5), WheelInsConfig{}), AlignmentFailed);
  auto shaky = still(Vec3(0, 0, kGravity), Vec3::Zero(), 2.0);
  for (std::size_t k = 0; k < shaky.size(); ++k) shaky[k].accel.z() += (k % 2 ? 3.0 : -3.0);
  EXPECT_THROW(static_align(shaky, WheelInsConfig{}), AlignmentFailed);
}

TEST(Mechanize, StationaryEquilibrium) {
  InsState s = level_state(0.4);
  s.position = Vec3(1, 2, 0);
  const Vec3 f = s.attitude.to_body(Vec3(0, 0, kGravity));
  const InsState out = mechanize(s, {0.005, Vec3::Zero(), f}, 0.005);
  EXPECT_LT((out.position - s.position).norm(), 1e-15);
  EXPECT_LT(out.velocity.norm(), 1e-15);
  EXPECT_LT(out.attitude.angle_to(s.attitude), 1e-15);
  EXPECT_EQ(out.timestamp, 0.005);
}

TEST(Mechanize, ConstantAccelerationKinematics) {
  InsState s = level_state(0.0);  // forward = east
  const Vec3 f = s.attitude.to_body(Vec3(1.0, 0, kGravity));
  for (int k = 1; k <= 200; ++k) s = mechanize(s, {k * 0.005, Vec3::Zero(), f}, 0.005);
  EXPECT_NEAR(s.velocity.x(), 1.0, 1e-12);
  EXPECT_NEAR(s.position.x(), 0.5, 1e-12);
  EXPECT_NEAR(s.position.y(), 0.0, 1e-12);
}

TEST(Mechanize, RejectsBadSamples) {
  InsState s = level_state();
  EXPECT_THROW(mechanize(s, {0.0, Vec3::Zero(), Vec3::Zero()}, 0.005), InvalidInput);
  EXPECT_THROW(mechanize(s, {0.005, Vec3(NAN, 0, 0), Vec3::Zero()}, 0.005), InvalidInput);
}

TEST(WheelVelocity, Examples) {
  EXPECT_EQ(wheel_velocity(0.0, 0.3), 0.0);
  EXPECT_NEAR(wheel_velocity(kTwoPi, 0.3), 1.8850, 5e-5);
  EXPECT_NEAR(wheel_velocity(-kTwoPi, 0.3), -1.8850, 5e-5);
  EXPECT_DOUBLE_EQ(wheel_velocity(kTwoPi, 0.3), -wheel_velocity(-kTwoPi, 0.3));
}

TEST(EkfPredict, ZeroDtLeavesCovariance) {
  const WheelInsConfig cfg;
  const ErrorState e = initial_error_state(cfg);
  const ErrorState out = ekf_predict(e, level_state(), {0.0, Vec3::Zero(), Vec3(0, 0, kGravity)}, 0.0, cfg);
  EXPECT_EQ(out.P, e.P);
}

TEST(EkfPredict, ArwGrowsAttitudeVarianceLinearly) {
  WheelInsConfig cfg;
  cfg.gyro_bias_instability = 0.0;
  cfg.accel_bias_instability = 0.0;
  ErrorState e;  // all-zero covariance
  const InsState s = level_state(0.2);
  const ImuSample z{0.0, Vec3(16.0, 0, 0), s.attitude.to_body(Vec3(0, 0, kGravity))};
  for (int k = 0; k < 200; ++k) e = ekf_predict(e, s, z, 0.005, cfg);
  const double arw = deg2rad(cfg.gyro_arw) / 60.0;  // rad/sqrt(s)
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.P(es::kAtt + i, es::kAtt + i), arw * arw, 1e-15);
}

TEST(EkfPredict, TraceNonDecreasing) {
  const WheelInsConfig cfg;
  ErrorState e = initial_error_state(cfg);
  InsState s = level_state(1.0);
  s.velocity = Vec3(3, 4, 0);
  const ImuSample z{0.0, Vec3(10.0, 0.2, -0.1), Vec3(0.3, -0.2, 9.7)};
  double prev = e.P.trace();
  for (int k = 0; k < 500; ++k) {
    e = ekf_predict(e, s, z, 0.005, cfg);
    ASSERT_GE(e.P.trace(), prev);
    prev = e.P.trace();
  }
}

TEST(EkfUpdate, ConsistentVelocityGivesNoCorrection) {
  const WheelInsConfig cfg;
  InsState s = level_state(0.7);
  s.velocity = Vec3(5 * std::cos(0.7), 5 * std::sin(0.7), 0);
  const ImuSample z{0.0, Vec3(5.0 / cfg.wheel_radius, 0, 0), Vec3(0, 0, kGravity)};
  const auto r = ekf_update_velocity(initial_error_state(cfg), s, z, 5.0, cfg);
  ASSERT_TRUE(r.accepted);
  EXPECT_LT(r.error.x.norm(), 1e-12);
}

TEST(EkfUpdate, ScalarKalmanOracle) {
  WheelInsConfig cfg;
  const double sigma = 0.7, r = cfg.wheel_velocity_std;
  InsState s = level_state(0.0);  // forward = east
  s.velocity = Vec3(4.2, 0, 0);
  ErrorState e;
  e.P(es::kVel, es::kVel) = sigma * sigma;
  const double v_wheel = 4.0;
  const auto out = ekf_update_velocity(e, s, {0.0, Vec3::Zero(), Vec3(0, 0, kGravity)}, v_wheel, cfg);
  ASSERT_TRUE(out.accepted);
  const double k = sigma * sigma / (sigma * sigma + r * r);
  EXPECT_NEAR(out.error.x(es::kVel), k * (4.2 - v_wheel), 1e-12);
  EXPECT_NEAR(out.error.P(es::kVel, es::kVel), sigma * sigma * r * r / (sigma * sigma + r * r), 1e-14);
  for (int i = 0; i < es::kDim; ++i) {
    if (i != es::kVel) EXPECT_EQ(out.error.x(i), 0.0) << i;
  }
}

TEST(EkfUpdate, NonHolonomicReducesLateralVelocity) {
  WheelInsConfig cfg;
  cfg.init_velocity_std = 1.0;
  InsState s = level_state(0.0);
  s.velocity = Vec3(0, 0.5, 0);  // sideways (left) while facing east
  const ImuSample z{0.0, Vec3::Zero(), Vec3(0, 0, kGravity)};
  ErrorState e = initial_error_state(cfg);
  const auto r = ekf_update_velocity(e, s, z, 0.0, cfg);
  ASSERT_TRUE(r.accepted);
  e = r.error;
  const InsState post = feedback(s, e);
  EXPECT_LT(std::abs(post.velocity.y()), 0.5);
  EXPECT_LT(std::abs(post.velocity.y()), 0.05);
}

TEST(EkfUpdate, ChiSquareGateRejectsOutliers) {
  const WheelInsConfig cfg;
  InsState s = level_state(0.0);
  s.velocity = Vec3(5, 0, 0);
  const ErrorState e = initial_error_state(cfg);
  const auto r = ekf_update_velocity(e, s, {0.0, Vec3::Zero(), Vec3(0, 0, kGravity)}, 50.0, cfg);
  EXPECT_FALSE(r.accepted);
  EXPECT_GT(r.mahalanobis2, cfg.chi2_gate);
  EXPECT_EQ(r.error.x, e.x);
  EXPECT_EQ(r.error.P, e.P);
}

TEST(EkfUpdate, JacobianMatchesFiniteDifferences) {
  WheelInsConfig cfg;
  cfg.lever_arm = Vec3(0.05, -0.02, 0.1);
  InsState s;
  s.attitude = wheel_attitude(0.9, deg2rad(4.0), 1.3);
  s.velocity = Vec3(2.0, 3.0, 0.1);
  const ImuSample z{0.0, Vec3(12.0, 0.3, -0.2), Vec3(0.1, 0.2, 9.8)};
  const VelocityModel m = vehicle_velocity_model(s, z, cfg);
  const double h = 1e-7;
  for (int i = 0; i < 3; ++i) {
    // phi: C_true = exp(phi) C_est, so an estimate perturbed by exp(-phi)
    Vec3 dphi = Vec3::Zero();
    dphi[i] = h;
    InsState p = s, q = s;
    p.attitude = Attitude(Eigen::Quaterniond(quat_from_rotvec(-dphi) * s.attitude.quaternion()));
    q.attitude = Attitude(Eigen::Quaterniond(quat_from_rotvec(dphi) * s.attitude.quaternion()));
    // h(est) - h(true) = H * err; the perturbed estimates carry errors +-h
    const Vec3 col = (vehicle_velocity_model(q, z, cfg).predicted - vehicle_velocity_model(p, z, cfg).predicted) /
                     (2 * h);
    EXPECT_LT((col - (-1.0) * m.H.col(es::kAtt + i)).norm(), 1e-5) << "att " << i;
    Vec3 dv = Vec3::Zero();
    dv[i] = h;
    p = s;
    q = s;
    p.velocity -= dv;
    q.velocity += dv;
    const Vec3 colv = (vehicle_velocity_model(q, z, cfg).predicted - vehicle_velocity_model(p, z, cfg).predicted) /
                      (2 * h);
    EXPECT_LT((colv - m.H.col(es::kVel + i)).norm(), 1e-6) << "vel " << i;
  }
}

TEST(Feedback, ZeroErrorIsIdentity) {
  InsState s = level_state(0.3);
  s.position = Vec3(1, 2, 3);
  ErrorState e;
  const InsState out = feedback(s, e);
  EXPECT_EQ(out.position, s.position);
  EXPECT_LT(out.attitude.angle_to(s.attitude), 1e-15);
}

TEST(Feedback, PositionErrorIsSubtracted) {
  InsState s = level_state();
  ErrorState e;
  e.x(es::kPos) = 1.0;
  const InsState out = feedback(s, e);
  EXPECT_DOUBLE_EQ(out.position.x(), -1.0);
  EXPECT_EQ(e.x.norm(), 0.0);
}

TEST(Feedback, ReEstimateAfterFeedbackIsSmall) {
  WheelInsConfig cfg;
  InsState s = level_state(0.0);
  s.velocity = Vec3(4.2, 0, 0);
  ErrorState e;
  e.P(es::kVel, es::kVel) = 1.0;
  const ImuSample z{0.0, Vec3::Zero(), Vec3(0, 0, kGravity)};
  auto r1 = ekf_update_velocity(e, s, z, 4.0, cfg);
  const double first = r1.error.x.norm();
  s = feedback(s, r1.error);
  const auto r2 = ekf_update_velocity(r1.error, s, z, 4.0, cfg);
  EXPECT_LT(r2.error.x.norm(), 0.01 * first);
}

TEST(VehicleRoll, FlatAndTilted) {
  EXPECT_NEAR(vehicle_roll(wheel_attitude(0.3, 0.0, 1.0)).rad(), 0.0, 1e-15);
  EXPECT_NEAR(vehicle_roll(wheel_attitude(0.3, deg2rad(5.0), 1.0)).rad(), deg2rad(5.0), 1e-9);
  EXPECT_NEAR(vehicle_roll(wheel_attitude(-2.0, deg2rad(-5.0), 0.0)).rad(), deg2rad(-5.0), 1e-9);
}

TEST(VehicleRoll, InvariantUnderSpin) {
  const double bank = deg2rad(7.0);
  for (double spin : {0.0, 0.5, 1.7, 3.1, -2.2, 100.0}) {
    EXPECT_NEAR(vehicle_roll(wheel_attitude(1.1, bank, spin)).rad(), bank, 1e-12) << spin;
    EXPECT_NEAR(angle_diff(vehicle_heading(wheel_attitude(1.1, bank, spin)).rad(), 1.1), 0.0, 1e-12) << spin;
  }
}

TEST(WheelInsStep, StationaryEmitsNothing) {
  const auto data = still(Vec3(0, 0, kGravity), Vec3::Zero(), 12.0);
  auto [ins, next] = WheelIns::from_static(data, WheelInsConfig{});
  int emitted = 0;
  for (std::size_t k = next; k < data.size(); ++k) emitted += ins.step(data[k]).has_value();
  EXPECT_EQ(emitted, 0);
}

TEST(WheelInsStep, StraightTenMetres) {
  sim::TrajectorySpec spec;
  spec.waypoints = {{0, 0}, {10, 0}};
  spec.closed = false;
  spec.static_duration = 3.0;
  spec.ramp_duration = 1.0;
  const auto truth = sim::generate_truth(spec, sim::TerrainModel{});
  const auto imu = sim::synthesize_imu(truth);
  auto [ins, next] = WheelIns::from_static(imu, WheelInsConfig{});
  std::vector<OdometryIncrement> incs;
  for (std::size_t k = next; k < imu.size(); ++k) {
    if (auto inc = ins.step(imu[k])) incs.push_back(*inc);
  }
  ASSERT_EQ(incs.size(), 20u);
  for (const auto& inc : incs) {
    EXPECT_EQ(inc.distance, 0.5);
    EXPECT_NEAR(inc.heading_change, 0.0, 1e-6);
    EXPECT_NEAR(inc.roll, 0.0, 1e-6);
  }
}

TEST(WheelInsStep, CircleHeadingRate) {
  const double r = 20.0;
  sim::TrajectorySpec spec;
  spec.waypoints = {{-r, -r}, {r, -r}, {r, r}, {-r, r}};
  spec.corner_radius = r;
  spec.static_duration = 3.0;
  spec.ramp_duration = 2.0;
  const auto truth = sim::generate_truth(spec, sim::TerrainModel{});
  const auto imu = sim::synthesize_imu(truth);
  auto [ins, next] = WheelIns::from_static(imu, WheelInsConfig{});
  std::vector<double> dpsi;
  for (std::size_t k = next; k < imu.size(); ++k) {
    if (auto inc = ins.step(imu[k])) dpsi.push_back(inc->heading_change);
  }
  ASSERT_GT(dpsi.size(), 200u);
  // emission happens at the first sample past each 0.5 m mark, so single
  // increments jitter by one sample of travel (0.025 m at 5 m/s)
  double sum = 0.0;
  for (double d : dpsi) {
    EXPECT_NEAR(d, 0.5 / r, 0.5 / r * (0.025 / 0.5) * 1.05);
    sum += d;
  }
  EXPECT_NEAR(sum / dpsi.size(), 0.5 / r, 0.5 / r * 2e-3);
}
