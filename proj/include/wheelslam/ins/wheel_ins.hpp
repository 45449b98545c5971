#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/ins/config.hpp"
#include "wheelslam/ins/ekf.hpp"
#include "wheelslam/ins/mechanization.hpp"
#include "wheelslam/ins/types.hpp"

namespace wheelslam {

struct WheelInsStats {
  long samples = 0;
  long updates_accepted = 0;
  long updates_rejected = 0;
  double max_asymmetry = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  long health_checks = 0;
  long health_violations = 0;
};

/// Wheel-INS pipeline: mechanization at the IMU rate, wheel-speed/NHC
/// updates at the configured interval, closed-loop feedback, and odometry
/// increments every `increment_distance` metres of forward travel.
class WheelIns {
 public:
  WheelIns(const WheelInsConfig& cfg, const InsState& initial)
      : cfg_(cfg), state_(initial), err_(initial_error_state(cfg)) {
    cfg_.validate();
    last_heading_ = vehicle_heading(state_).rad();
    last_position_ = position2d();
    prev_heading_ = last_heading_;
  }

  /// Aligns on the leading stationary samples and returns the pipeline plus
  /// the index of the first sample still to be processed.
  static std::pair<WheelIns, std::size_t> from_static(std::span<const ImuSample> stream,
                                                      const WheelInsConfig& cfg,
                                                      const Vec3& initial_position = Vec3::Zero(),
                                                      double initial_heading = 0.0) {
    if (stream.empty()) throw AlignmentFailed("from_static: empty stream");
    const double t_end = stream.front().t + cfg.align_duration;
    std::size_t n = 0;
    while (n < stream.size() && stream[n].t <= t_end + 1e-9) ++n;
    const AlignmentResult al = static_align(stream.first(n), cfg, initial_heading);
    InsState s;
    s.position = initial_position;
    s.attitude = al.attitude;
    s.timestamp = stream[n - 1].t;
    s.sensor.gyro_bias = al.gyro_bias;
    return {WheelIns(cfg, s), n};
  }

  /// When set, the covariance is fully checked (symmetry + eigenvalues)
  /// after every update.
  void set_health_checks(bool on) { health_checks_ = on; }

  std::optional<OdometryIncrement> step(const ImuSample& raw) {
    const double dt = raw.t - state_.timestamp;
    if (!(dt > 0.0)) throw InvalidInput("WheelIns::step: non-monotonic timestamp");
    const ImuSample s = state_.sensor.apply(raw);

    err_ = ekf_predict(err_, state_, s, dt, cfg_);
    const Vec3 v_prev = centre_velocity(s.gyro);
    state_ = mechanize(state_, s, dt);
    ++stats_.samples;

    since_update_ += dt;
    const double revolution = std::abs(s.gyro.x()) > 1e-6 ? kTwoPi / std::abs(s.gyro.x()) : 1e9;
    if (since_update_ >= std::min(cfg_.update_interval, revolution) - 1e-9) {
      since_update_ = 0.0;
      // the sample is an interval mean: the speed half a sample ago
      const double v_wheel = wheel_velocity(wheel_spin_rate(state_.attitude, s.gyro), cfg_.wheel_radius) +
                             0.5 * vehicle_to_nav(state_.attitude).col(0).dot(centre_velocity(s.gyro) - v_prev);
      auto res = ekf_update_velocity(err_, state_, s, v_wheel, cfg_);
      err_ = res.error;
      if (res.accepted) {
        ++stats_.updates_accepted;
        state_ = feedback(state_, err_);
        state_.position.z() = 0.0;
      } else {
        ++stats_.updates_rejected;
      }
      if (health_checks_) check_health();
    }

    // forward component of the (corrected) wheel-centre displacement
    const double psi = vehicle_heading(state_).rad();
    const Eigen::Vector2d p = position2d();
    const Eigen::Vector2d dp = p - last_position_;
    last_position_ = p;
    const double mid = psi - 0.5 * angle_diff(psi, prev_heading_);
    prev_heading_ = psi;
    travelled_ += dp.x() * std::cos(mid) + dp.y() * std::sin(mid);

    if (travelled_ >= cfg_.increment_distance - 1e-9) {
      travelled_ -= cfg_.increment_distance;
      OdometryIncrement inc;
      inc.distance = cfg_.increment_distance;
      inc.heading_change = angle_diff(psi, last_heading_);
      inc.roll = vehicle_roll(state_).rad();
      inc.timestamp = state_.timestamp;
      last_heading_ = psi;
      return inc;
    }
    return std::nullopt;
  }

  const InsState& state() const { return state_; }
  const ErrorState& error_state() const { return err_; }
  const WheelInsConfig& config() const { return cfg_; }
  const WheelInsStats& stats() const { return stats_; }

  /// Planar position of the wheel centre.
  Eigen::Vector2d position2d() const {
    const Vec3 p = state_.position - state_.attitude.to_nav(cfg_.lever_arm);
    return {p.x(), p.y()};
  }
  double heading() const { return vehicle_heading(state_).rad(); }

 private:
  Vec3 centre_velocity(const Vec3& gyro) const {
    return state_.velocity - state_.attitude.to_nav(gyro.cross(cfg_.lever_arm));
  }

  void check_health() {
    const CovarianceHealth h = covariance_health(err_.P);
    ++stats_.health_checks;
    stats_.max_asymmetry = std::max(stats_.max_asymmetry, h.asymmetry);
    stats_.min_eigenvalue = std::min(stats_.min_eigenvalue, h.min_eigenvalue);
    if (!h.ok()) ++stats_.health_violations;
  }

  WheelInsConfig cfg_;
  InsState state_;
  ErrorState err_;
  WheelInsStats stats_;
  bool health_checks_ = false;
  double since_update_ = 0.0;
  double travelled_ = 0.0;
  Eigen::Vector2d last_position_ = Eigen::Vector2d::Zero();
  double prev_heading_ = 0.0;
  double last_heading_ = 0.0;
};

}  // namespace wheelslam
