#pragma once

#include <cstdint>
#include <random>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/sim/noise.hpp"
#include "wheelslam/sim/terrain.hpp"
#include "wheelslam/sim/trajectory.hpp"

namespace wheelslam::sim {

struct Scene {
  TrajectorySpec trajectory;
  TerrainModel terrain;
};

struct BumpFieldSpec {
  int count = 20;
  double min_amplitude = 1.0;     // deg
  double max_amplitude = 5.0;     // deg
  double min_length_scale = 10.0; // m
  double max_length_scale = 30.0; // m
  double lateral_spread = 5.0;    // m, centre offset from the path
  std::uint64_t seed = 2022;
};

/// Bumps scattered along `path` with random sign and size.
inline TerrainModel bump_field_along(const Path& path, const BumpFieldSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> along(0.0, path.length());
  std::uniform_real_distribution<double> lateral(-spec.lateral_spread, spec.lateral_spread);
  std::uniform_real_distribution<double> amp(spec.min_amplitude, spec.max_amplitude);
  std::uniform_real_distribution<double> scale(spec.min_length_scale, spec.max_length_scale);
  std::bernoulli_distribution coin(0.5);
  TerrainModel t;
  for (int i = 0; i < spec.count; ++i) {
    const Path::Point p = path.at(along(rng));
    const Eigen::Vector2d normal(-std::sin(p.heading), std::cos(p.heading));
    BankBump b;
    b.center = p.position + lateral(rng) * normal;
    b.amplitude = deg2rad(amp(rng)) * (coin(rng) ? 1.0 : -1.0);
    b.length_scale = scale(rng);
    t.bumps.push_back(b);
  }
  return t;
}

/// Rounded-rectangle circuit of about 400 m starting at the origin heading
/// east, driven twice, with a 20-bump bank field.
inline Scene benchmark_scene() {
  Scene s;
  const double r = 15.0, w = 130.0, h = 85.0;
  s.trajectory.waypoints = {{-r, 0.0}, {w - r, 0.0}, {w - r, h}, {-r, h}};
  s.trajectory.closed = true;
  s.trajectory.laps = 2;
  s.trajectory.speed = 5.0;
  s.trajectory.corner_radius = r;
  s.trajectory.imu_rate = 200.0;
  s.trajectory.wheel_radius = 0.3;
  s.trajectory.static_duration = 3.0;
  s.trajectory.ramp_duration = 4.0;
  s.trajectory.initial_spin = 0.3;
  const Path path(s.trajectory.waypoints, true, r);
  s.terrain = bump_field_along(path, BumpFieldSpec{});
  return s;
}

}  // namespace wheelslam::sim
