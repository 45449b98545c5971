#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "wheelslam/ins/mechanization.hpp"
#include "wheelslam/sim/imu_synth.hpp"
#include "wheelslam/sim/noise.hpp"
#include "wheelslam/sim/scene.hpp"
#include "wheelslam/sim/terrain.hpp"
#include "wheelslam/sim/trajectory.hpp"

using namespace wheelslam;
using namespace wheelslam::sim;

TEST(Terrain, EmptyIsFlat) {
  const TerrainModel t;
  for (double x : {-100.0, 0.0, 3.5, 1e4}) EXPECT_EQ(bank_at(t, {x, -x}).rad(), 0.0);
}

TEST(Terrain, GaussianBumpProfile) {
  TerrainModel t;
  t.bumps.push_back({{10.0, -4.0}, deg2rad(3.0), 12.0});
  EXPECT_NEAR(bank_at(t, {10.0, -4.0}).rad(), deg2rad(3.0), 1e-15);
  EXPECT_NEAR(bank_value(t, {22.0, -4.0}), deg2rad(3.0) * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(bank_value(t, {10.0, 8.0}), deg2rad(3.0) * std::exp(-0.5), 1e-15);
}

TEST(Terrain, GradientMatchesFiniteDifference) {
  TerrainModel t;
  t.bumps.push_back({{0.0, 0.0}, deg2rad(4.0), 15.0});
  t.bumps.push_back({{20.0, 5.0}, deg2rad(-2.0), 8.0});
  t.wave = {deg2rad(1.0), 40.0, 0.3, 0.2};
  const Eigen::Vector2d p(7.0, 3.0);
  const double h = 1e-6;
  const Eigen::Vector2d g = bank_gradient(t, p);
  EXPECT_NEAR(g.x(), (bank_value(t, p + Eigen::Vector2d(h, 0)) - bank_value(t, p - Eigen::Vector2d(h, 0))) / (2 * h),
              1e-9);
  EXPECT_NEAR(g.y(), (bank_value(t, p + Eigen::Vector2d(0, h)) - bank_value(t, p - Eigen::Vector2d(0, h))) / (2 * h),
              1e-9);
}

TEST(Truth, StraightHundredMetres) {
  TrajectorySpec spec;
  spec.waypoints = {{0, 0}, {100, 0}};
  spec.closed = false;
  const GroundTruth gt = generate_truth(spec, TerrainModel{});
  // 20 s at 200 Hz: 4000 sample intervals, i.e. 4000 IMU samples
  EXPECT_EQ(gt.samples.size(), 4001u);
  EXPECT_EQ(synthesize_imu(gt).size(), 4000u);
  for (const auto& s : gt.samples) ASSERT_EQ(s.heading, 0.0);
  EXPECT_NEAR(gt.samples.back().position.x(), 100.0, 1e-9);
}

TEST(Truth, SquareLoopCloses) {
  TrajectorySpec spec;
  spec.waypoints = {{0, 0}, {60, 0}, {60, 60}, {0, 60}};
  spec.laps = 2;
  spec.corner_radius = 10.0;
  const GroundTruth gt = generate_truth(spec, TerrainModel{});
  const Path path(spec.waypoints, true, spec.corner_radius);
  EXPECT_LT((path.at(2 * path.length()).position - path.at(0.0).position).norm(), 1e-9);
  EXPECT_NEAR(path.at(2 * path.length()).heading - path.at(0.0).heading, 2 * kTwoPi, 1e-9);
  // the last sample falls within one sample interval of the loop end
  const double step = spec.speed / spec.imu_rate;
  EXPECT_LT((gt.samples.back().position - gt.samples.front().position).norm(), step);
  EXPECT_NEAR(gt.samples.back().distance, 2 * path.length(), step);
}

TEST(Truth, PathLengthMatchesGeometry) {
  // square of side a with fillets of radius r: 4(a - 2r) + 2 pi r
  const double a = 80.0, r = 12.0;
  const Path path({{0, 0}, {a, 0}, {a, a}, {0, a}}, true, r);
  const double oracle = 4 * (a - 2 * r) + kTwoPi * r;
  EXPECT_NEAR(path.length(), oracle, 1e-3 * oracle);
  EXPECT_NEAR(path.length(), oracle, 1e-9);
  EXPECT_EQ(path.polyline_length(), 4 * a);
}

TEST(Truth, InfeasibleCornerRadius) {
  EXPECT_THROW(Path({{0, 0}, {10, 0}, {10, 10}, {0, 10}}, true, 8.0), SpecError);
}

TEST(Truth, BankLimitEnforced) {
  TrajectorySpec spec;
  spec.waypoints = {{0, 0}, {50, 0}};
  spec.closed = false;
  TerrainModel t;
  t.bumps.push_back({{25, 0}, deg2rad(16.0), 5.0});
  EXPECT_THROW(generate_truth(spec, t), SpecError);
}

TEST(Imu, PureRollingOnStraight) {
  TrajectorySpec spec;
  spec.waypoints = {{0, 0}, {50, 0}};
  spec.closed = false;
  spec.speed = 6.0;
  spec.wheel_radius = 0.3;
  const auto imu = synthesize_imu(generate_truth(spec, TerrainModel{}));
  for (std::size_t k = 10; k < imu.size(); ++k) {
    ASSERT_NEAR(imu[k].gyro.x(), 6.0 / 0.3, 1e-9);
    ASSERT_NEAR(imu[k].gyro.y(), 0.0, 1e-9);
    ASSERT_NEAR(imu[k].gyro.z(), 0.0, 1e-9);
    ASSERT_NEAR(imu[k].accel.norm(), kGravity, 1e-9);
  }
}

TEST(Imu, CircularMotionSpecificForce) {
  const double r = 25.0, v = 5.0;
  TrajectorySpec spec;
  spec.waypoints = {{-r, -r}, {r, -r}, {r, r}, {-r, r}};
  spec.corner_radius = r;
  spec.speed = v;
  const auto gt = generate_truth(spec, TerrainModel{});
  const auto imu = synthesize_imu(gt);
  const double oracle = std::hypot(kGravity, v * v / r);
  for (std::size_t k = 10; k < imu.size(); ++k) ASSERT_NEAR(imu[k].accel.norm(), oracle, 1e-6);
}

TEST(Imu, ZeroNoiseRoundTrip) {
  const Scene scene = benchmark_scene();
  const GroundTruth gt = generate_truth(scene.trajectory, scene.terrain);
  const auto imu = synthesize_imu(gt);
  InsState s = truth_initial_state(gt);
  double max_pos = 0.0, max_roll = 0.0;
  for (std::size_t k = 0; k < imu.size(); ++k) {
    s = mechanize(s, imu[k], imu[k].t - s.timestamp);
    const auto& t = gt.samples[k + 1];
    max_pos = std::max(max_pos, (s.position.head<2>() - t.position).norm());
    max_roll = std::max(max_roll, std::abs(vehicle_roll(s).rad() - t.bank));
  }
  EXPECT_LT(max_pos, 1e-3 * gt.samples.back().distance);
  EXPECT_LT(rad2deg(max_roll), 0.05);
}

TEST(Imu, BankObservability) {
  const Scene scene = benchmark_scene();
  const GroundTruth gt = generate_truth(scene.trajectory, scene.terrain);
  for (std::size_t k = 0; k < gt.samples.size(); k += 7) {
    const auto& s = gt.samples[k];
    const Attitude att(truth_attitude(s));
    ASSERT_NEAR(vehicle_roll(att).rad(), bank_value(scene.terrain, s.position), 1e-9);
  }
}

TEST(Noise, ZeroSpecIsIdentity) {
  TrajectorySpec spec;
  spec.waypoints = {{0, 0}, {20, 0}};
  spec.closed = false;
  const auto imu = synthesize_imu(generate_truth(spec, TerrainModel{}));
  const auto out = corrupt(imu, SensorErrorSpec{});
  ASSERT_EQ(out.size(), imu.size());
  for (std::size_t k = 0; k < imu.size(); ++k) {
    ASSERT_EQ(out[k].gyro, imu[k].gyro);
    ASSERT_EQ(out[k].accel, imu[k].accel);
  }
}

TEST(Noise, WhiteNoiseDensity) {
  const std::size_t n = 1000000;
  std::vector<ImuSample> zero(n);
  for (std::size_t k = 0; k < n; ++k) zero[k].t = (k + 1) / 200.0;
  SensorErrorSpec e;
  e.gyro_arw = 0.24;
  e.accel_vrw = 3.0;
  e.seed = 5;
  const auto out = corrupt(zero, e);
  const double sg = 0.24 * (kPi / 180.0) / 60.0 * std::sqrt(200.0);
  const double sa = 3.0 / 60.0 * std::sqrt(200.0);
  EXPECT_DOUBLE_EQ(gyro_noise_sigma(0.24, 200.0), sg);
  for (int axis = 0; axis < 3; ++axis) {
    double g2 = 0, a2 = 0;
    for (const auto& s : out) {
      g2 += s.gyro[axis] * s.gyro[axis];
      a2 += s.accel[axis] * s.accel[axis];
    }
    EXPECT_NEAR(std::sqrt(g2 / n), sg, 0.02 * sg);
    EXPECT_NEAR(std::sqrt(a2 / n), sa, 0.02 * sa);
  }
}

TEST(Noise, ConstantBiasMagnitude) {
  std::vector<ImuSample> zero(10);
  for (std::size_t k = 0; k < zero.size(); ++k) zero[k].t = (k + 1) / 200.0;
  SensorErrorSpec e;
  e.gyro_bias = 200.0;
  e.accel_bias = 0.01;
  SensorErrorRealization r;
  const auto out = corrupt(zero, e, &r);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(std::abs(r.gyro_bias[i]), deg2rad(200.0) / 3600.0, 1e-18);
    EXPECT_NEAR(std::abs(r.accel_bias[i]), 0.01, 1e-18);
  }
  for (const auto& s : out) EXPECT_EQ(s.gyro, r.gyro_bias);
}

TEST(Noise, SeedDeterminism) {
  TrajectorySpec spec;
  spec.waypoints = {{0, 0}, {20, 0}};
  spec.closed = false;
  const auto imu = synthesize_imu(generate_truth(spec, TerrainModel{}));
  const auto a = corrupt(imu, SensorErrorSpec::icm20602(9));
  const auto b = corrupt(imu, SensorErrorSpec::icm20602(9));
  const auto c = corrupt(imu, SensorErrorSpec::icm20602(10));
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_EQ(a[k].gyro, b[k].gyro);
    ASSERT_EQ(a[k].accel, b[k].accel);
    differs |= a[k].gyro != c[k].gyro;
  }
  EXPECT_TRUE(differs);
}

TEST(Noise, TableTwoGrade) {
  const auto e = SensorErrorSpec::icm20602();
  EXPECT_EQ(e.gyro_bias, 200.0);
  EXPECT_EQ(e.gyro_arw, 0.24);
  EXPECT_EQ(e.accel_bias, 0.01);
  EXPECT_EQ(e.accel_vrw, 3.0);
}

TEST(Scene, BenchmarkGeometry) {
  const Scene s = benchmark_scene();
  const GroundTruth gt = generate_truth(s.trajectory, s.terrain);
  EXPECT_NEAR(gt.lap_length, 400.0, 10.0);
  EXPECT_EQ(s.trajectory.laps, 2);
  EXPECT_EQ(s.terrain.bumps.size(), 20u);
  for (const auto& b : s.terrain.bumps) {
    EXPECT_GE(std::abs(rad2deg(b.amplitude)), 1.0);
    EXPECT_LE(std::abs(rad2deg(b.amplitude)), 5.0);
    EXPECT_GE(b.length_scale, 10.0);
    EXPECT_LE(b.length_scale, 30.0);
  }
}
