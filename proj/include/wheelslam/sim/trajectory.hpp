#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/errors.hpp"
#include "wheelslam/sim/terrain.hpp"

namespace wheelslam::sim {

struct TrajectorySpec {
  std::vector<Eigen::Vector2d> waypoints;
  bool closed = true;            // closed circuit driven `laps` times
  int laps = 1;
  double speed = 5.0;            // m/s cruise
  double corner_radius = 15.0;   // m
  double imu_rate = 200.0;       // Hz
  double wheel_radius = 0.3;     // m
  double static_duration = 0.0;  // s at rest before moving
  double ramp_duration = 0.0;    // s of smooth acceleration to cruise speed
  double initial_spin = 0.0;     // rad, wheel angle at t = 0
};

/// One epoch of ground truth.
struct TruthSample {
  double t = 0.0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double heading = 0.0;      // rad, continuous (not wrapped)
  double bank = 0.0;         // rad
  double spin = 0.0;         // rad, wheel rotation angle
  double speed = 0.0;        // m/s
  double accel = 0.0;        // m/s^2 along the path
  double curvature = 0.0;    // 1/m, positive turning left
  double bank_rate = 0.0;    // rad/s
  double distance = 0.0;     // m travelled
};

struct GroundTruth {
  std::vector<TruthSample> samples;
  double wheel_radius = 0.3;
  double rate = 200.0;
  double lap_length = 0.0;
};

/// Planar path made of straight lines joined by circular fillets,
/// parameterised by arc length.
class Path {
 public:
  struct Point {
    Eigen::Vector2d position;
    double heading;    // continuous
    double curvature;
  };

  Path(const std::vector<Eigen::Vector2d>& waypoints, bool closed, double corner_radius) {
    build(waypoints, closed, corner_radius);
  }

  double length() const { return length_; }
  double polyline_length() const { return polyline_length_; }

  /// Evaluates at arc length s. On closed paths s wraps per lap and the
  /// heading keeps accumulating.
  Point at(double s) const {
    double turns = 0.0;
    if (closed_) {
      const double laps = std::floor(s / length_);
      s -= laps * length_;
      turns = laps * total_turn_;
    } else {
      s = std::clamp(s, 0.0, length_);
    }
    auto it = std::upper_bound(starts_.begin(), starts_.end(), s);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - starts_.begin()) - 1));
    const Segment& seg = segments_[i];
    const double u = std::min(s - starts_[i], seg.length);
    Point p;
    if (seg.curvature == 0.0) {
      p.position = seg.start + u * Eigen::Vector2d(std::cos(seg.heading), std::sin(seg.heading));
      p.heading = seg.heading;
    } else {
      const double h = seg.heading + u * seg.curvature;
      const double rad = 1.0 / seg.curvature;
      const Eigen::Vector2d centre =
          seg.start + rad * Eigen::Vector2d(-std::sin(seg.heading), std::cos(seg.heading));
      p.position = centre + rad * Eigen::Vector2d(std::sin(h), -std::cos(h));
      p.heading = h;
    }
    p.heading += turns;
    p.curvature = seg.curvature;
    return p;
  }

 private:
  struct Segment {
    Eigen::Vector2d start;
    double heading;    // continuous heading at segment start
    double curvature;  // 0 for lines
    double length;
  };

  void add_line(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double heading) {
    const double len = (b - a).norm();
    if (len > 1e-12) segments_.push_back({a, heading, 0.0, len});
  }

  void build(const std::vector<Eigen::Vector2d>& w, bool closed, double radius) {
    closed_ = closed;
    const std::size_t n = w.size();
    if (n < 2 || (closed && n < 3)) throw SpecError("trajectory: not enough waypoints");
    if (!(radius >= 0.0)) throw SpecError("trajectory: negative corner radius");
    const std::size_t nseg = closed ? n : n - 1;
    std::vector<Eigen::Vector2d> dir(nseg);
    std::vector<double> seg_len(nseg);
    for (std::size_t i = 0; i < nseg; ++i) {
      const Eigen::Vector2d d = w[(i + 1) % n] - w[i];
      seg_len[i] = d.norm();
      if (!(seg_len[i] > 1e-9)) throw SpecError("trajectory: consecutive waypoints coincide");
      dir[i] = d / seg_len[i];
      polyline_length_ += seg_len[i];
    }
    // turn angle and tangent length at every vertex (0 at open ends)
    std::vector<double> turn(n, 0.0), tangent(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      if (!closed && (v == 0 || v == n - 1)) continue;
      const Eigen::Vector2d& din = dir[(v + nseg - 1) % nseg];
      const Eigen::Vector2d& dout = dir[v % nseg];
      const double a = std::atan2(din.x() * dout.y() - din.y() * dout.x(), din.dot(dout));
      if (std::abs(a) > kPi - 1e-9) throw SpecError("trajectory: path reverses at a waypoint");
      turn[v] = a;
      tangent[v] = radius * std::tan(0.5 * std::abs(a));
    }
    for (std::size_t i = 0; i < nseg; ++i) {
      if (tangent[i] + tangent[(i + 1) % n] > seg_len[i] + 1e-9) {
        throw SpecError("trajectory: corner radius infeasible for segment length");
      }
    }
    double heading = std::atan2(dir[0].y(), dir[0].x());
    for (std::size_t i = 0; i < nseg; ++i) {
      const std::size_t v_end = (i + 1) % n;
      const Eigen::Vector2d a = w[i] + tangent[i] * dir[i];
      const Eigen::Vector2d b = w[v_end] - tangent[v_end] * dir[i];
      add_line(a, b, heading);
      if (turn[v_end] != 0.0 && radius > 0.0) {
        const double k = (turn[v_end] > 0.0 ? 1.0 : -1.0) / radius;
        segments_.push_back({b, heading, k, radius * std::abs(turn[v_end])});
      }
      heading += turn[v_end];
    }
    total_turn_ = heading - std::atan2(dir[0].y(), dir[0].x());
    double s = 0.0;
    for (const auto& seg : segments_) {
      starts_.push_back(s);
      s += seg.length;
    }
    length_ = s;
  }

  bool closed_ = true;
  std::vector<Segment> segments_;
  std::vector<double> starts_;
  double length_ = 0.0;
  double polyline_length_ = 0.0;
  double total_turn_ = 0.0;
};

/// Distance and speed profile: rest, raised-cosine ramp, cruise.
struct SpeedProfile {
  double static_duration = 0.0;
  double ramp_duration = 0.0;
  double speed = 0.0;

  double ramp_distance() const { return 0.5 * speed * ramp_duration; }

  double distance(double t) const {
    const double tau = t - static_duration;
    if (tau <= 0.0) return 0.0;
    if (tau < ramp_duration) {
      return 0.5 * speed * (tau - ramp_duration / kPi * std::sin(kPi * tau / ramp_duration));
    }
    return ramp_distance() + speed * (tau - ramp_duration);
  }
  double velocity(double t) const {
    const double tau = t - static_duration;
    if (tau <= 0.0) return 0.0;
    if (tau < ramp_duration) return 0.5 * speed * (1.0 - std::cos(kPi * tau / ramp_duration));
    return speed;
  }
  double acceleration(double t) const {
    const double tau = t - static_duration;
    if (tau <= 0.0 || tau >= ramp_duration) return 0.0;
    return 0.5 * speed * kPi / ramp_duration * std::sin(kPi * tau / ramp_duration);
  }
  /// Time at which `d` metres have been covered (d beyond the ramp).
  double time_for_distance(double d) const {
    if (d <= ramp_distance()) throw SpecError("trajectory: path shorter than the speed ramp");
    return static_duration + ramp_duration + (d - ramp_distance()) / speed;
  }
};

inline void validate(const TrajectorySpec& spec) {
  if (!(spec.speed > 0.0)) throw SpecError("trajectory: speed must be positive");
  if (!(spec.imu_rate > 0.0)) throw SpecError("trajectory: imu_rate must be positive");
  if (!(spec.wheel_radius > 0.0)) throw SpecError("trajectory: wheel_radius must be positive");
  if (spec.closed && spec.laps < 1) throw SpecError("trajectory: laps must be >= 1");
  if (spec.static_duration < 0.0 || spec.ramp_duration < 0.0) {
    throw SpecError("trajectory: durations must be non-negative");
  }
}

/// Samples the ground truth at the IMU rate, t = 0 .. T inclusive.
inline GroundTruth generate_truth(const TrajectorySpec& spec, const TerrainModel& terrain) {
  validate(spec);
  validate(terrain);
  const Path path(spec.waypoints, spec.closed, spec.corner_radius);
  const SpeedProfile prof{spec.static_duration, spec.ramp_duration, spec.speed};
  const double total = spec.closed ? path.length() * spec.laps : path.length();
  const double duration = prof.time_for_distance(total);
  const auto n = static_cast<long>(std::floor(duration * spec.imu_rate + 1e-6));

  GroundTruth gt;
  gt.wheel_radius = spec.wheel_radius;
  gt.rate = spec.imu_rate;
  gt.lap_length = path.length();
  gt.samples.reserve(static_cast<std::size_t>(n + 1));
  for (long k = 0; k <= n; ++k) {
    TruthSample ts;
    ts.t = static_cast<double>(k) / spec.imu_rate;
    ts.distance = std::min(prof.distance(ts.t), total);
    ts.speed = prof.velocity(ts.t);
    ts.accel = prof.acceleration(ts.t);
    const Path::Point p = path.at(ts.distance);
    ts.position = p.position;
    ts.heading = p.heading;
    ts.curvature = p.curvature;
    ts.bank = bank_value(terrain, p.position);
    if (std::abs(ts.bank) >= TerrainModel::kMaxBank) {
      throw SpecError("terrain: bank angle along the path exceeds 15 deg");
    }
    const Eigen::Vector2d vel = ts.speed * Eigen::Vector2d(std::cos(p.heading), std::sin(p.heading));
    ts.bank_rate = bank_gradient(terrain, p.position).dot(vel);
    ts.spin = spec.initial_spin + ts.distance / spec.wheel_radius;
    gt.samples.push_back(ts);
  }
  return gt;
}

}  // namespace wheelslam::sim
