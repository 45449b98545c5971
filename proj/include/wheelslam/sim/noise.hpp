#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/errors.hpp"
#include "wheelslam/ins/types.hpp"

namespace wheelslam::sim {

/// Inertial sensor error magnitudes (datasheet units).
struct SensorErrorSpec {
  double gyro_bias = 0.0;     // deg/h
  double gyro_arw = 0.0;      // deg/sqrt(h)
  double accel_bias = 0.0;    // m/s^2
  double accel_vrw = 0.0;     // m/s/sqrt(h)
  double gyro_scale = 0.0;    // ppm
  double accel_scale = 0.0;   // ppm
  std::uint64_t seed = 0;

  /// ICM20602 row of the consumer-grade MEMS table.
  static SensorErrorSpec icm20602(std::uint64_t seed = 0) {
    SensorErrorSpec s;
    s.gyro_bias = 200.0;
    s.gyro_arw = 0.24;
    s.accel_bias = 0.01;
    s.accel_vrw = 3.0;
    s.seed = seed;
    return s;
  }

  void validate() const {
    for (double v : {gyro_bias, gyro_arw, accel_bias, accel_vrw, gyro_scale, accel_scale}) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("sensor error spec: values must be non-negative");
    }
  }
};

/// Per-sample white-noise standard deviations at `rate` Hz.
inline double gyro_noise_sigma(double arw_deg_sqrt_h, double rate) {
  return deg2rad(arw_deg_sqrt_h) / 60.0 * std::sqrt(rate);
}
inline double accel_noise_sigma(double vrw_ms_sqrt_h, double rate) {
  return vrw_ms_sqrt_h / 60.0 * std::sqrt(rate);
}

/// Realised constant errors of one run.
struct SensorErrorRealization {
  Vec3 gyro_bias = Vec3::Zero();    // rad/s
  Vec3 accel_bias = Vec3::Zero();   // m/s^2
  Vec3 gyro_scale = Vec3::Zero();   // unitless
  Vec3 accel_scale = Vec3::Zero();
};

/// Adds constant bias and scale errors (magnitude from the spec, sign drawn
/// per axis) and white noise. Deterministic under `err.seed`.
inline std::vector<ImuSample> corrupt(const std::vector<ImuSample>& stream, const SensorErrorSpec& err,
                                      SensorErrorRealization* realized = nullptr) {
  err.validate();
  std::vector<ImuSample> out = stream;
  if (stream.empty()) return out;
  std::mt19937_64 rng(err.seed);
  std::bernoulli_distribution coin(0.5);
  auto signs = [&] {
    return Vec3(coin(rng) ? 1.0 : -1.0, coin(rng) ? 1.0 : -1.0, coin(rng) ? 1.0 : -1.0);
  };
  SensorErrorRealization r;
  r.gyro_bias = signs() * (deg2rad(err.gyro_bias) / 3600.0);
  r.accel_bias = signs() * err.accel_bias;
  r.gyro_scale = signs() * (err.gyro_scale * 1e-6);
  r.accel_scale = signs() * (err.accel_scale * 1e-6);
  if (realized) *realized = r;

  const double dt = stream.size() > 1 ? stream[1].t - stream[0].t : 0.0;
  const double rate = dt > 0.0 ? 1.0 / dt : 1.0;
  const double sg = gyro_noise_sigma(err.gyro_arw, rate);
  const double sa = accel_noise_sigma(err.accel_vrw, rate);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& s : out) {
    Vec3 ng, na;
    for (int i = 0; i < 3; ++i) ng[i] = sg * normal(rng);
    for (int i = 0; i < 3; ++i) na[i] = sa * normal(rng);
    s.gyro = s.gyro + s.gyro.cwiseProduct(r.gyro_scale) + r.gyro_bias + ng;
    s.accel = s.accel + s.accel.cwiseProduct(r.accel_scale) + r.accel_bias + na;
  }
  return out;
}

}  // namespace wheelslam::sim
