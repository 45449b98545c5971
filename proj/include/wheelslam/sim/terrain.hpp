#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/errors.hpp"

namespace wheelslam::sim {

/// Gaussian bump of road bank angle.
struct BankBump {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double amplitude = 0.0;     // rad
  double length_scale = 1.0;  // m
};

/// Optional plane-wave corrugation A*sin(k . p + phase).
struct BankWave {
  double amplitude = 0.0;    // rad
  double wavelength = 50.0;  // m
  double direction = 0.0;    // rad
  double phase = 0.0;
};

/// Smooth road-bank field B(x, y).
struct TerrainModel {
  std::vector<BankBump> bumps;
  BankWave wave;

  static constexpr double kMaxBank = deg2rad(15.0);
};

inline double bank_value(const TerrainModel& terrain, const Eigen::Vector2d& p) {
  double b = 0.0;
  for (const auto& bump : terrain.bumps) {
    const double d2 = (p - bump.center).squaredNorm();
    b += bump.amplitude * std::exp(-0.5 * d2 / (bump.length_scale * bump.length_scale));
  }
  if (terrain.wave.amplitude != 0.0) {
    const double k = kTwoPi / terrain.wave.wavelength;
    const double u = p.x() * std::cos(terrain.wave.direction) + p.y() * std::sin(terrain.wave.direction);
    b += terrain.wave.amplitude * std::sin(k * u + terrain.wave.phase);
  }
  return b;
}

inline Angle bank_at(const TerrainModel& terrain, const Eigen::Vector2d& p) {
  return Angle(bank_value(terrain, p));
}

/// Spatial gradient of B.
inline Eigen::Vector2d bank_gradient(const TerrainModel& terrain, const Eigen::Vector2d& p) {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const auto& bump : terrain.bumps) {
    const double l2 = bump.length_scale * bump.length_scale;
    const Eigen::Vector2d d = p - bump.center;
    g += -bump.amplitude * std::exp(-0.5 * d.squaredNorm() / l2) / l2 * d;
  }
  if (terrain.wave.amplitude != 0.0) {
    const double k = kTwoPi / terrain.wave.wavelength;
    const Eigen::Vector2d dir(std::cos(terrain.wave.direction), std::sin(terrain.wave.direction));
    g += terrain.wave.amplitude * k * std::cos(k * p.dot(dir) + terrain.wave.phase) * dir;
  }
  return g;
}

/// Checks bump parameters. The |B| < 15 deg bound is enforced along the
/// driven path by generate_truth.
inline void validate(const TerrainModel& terrain) {
  for (const auto& b : terrain.bumps) {
    if (!(b.length_scale > 0.0) || !std::isfinite(b.amplitude) || !b.center.allFinite()) {
      throw SpecError("terrain: bump needs finite amplitude and positive length scale");
    }
  }
  if (terrain.wave.amplitude != 0.0 && !(terrain.wave.wavelength > 0.0)) {
    throw SpecError("terrain: wavelength must be positive");
  }
}

}  // namespace wheelslam::sim
