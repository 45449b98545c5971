#pragma once

#include <cmath>
#include <numbers>

#include "wheelslam/core/errors.hpp"

namespace wheelslam {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad2deg(double rad) { return rad * (180.0 / kPi); }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  if (!std::isfinite(a)) throw InvalidInput("wrap_angle: non-finite angle");
  double r = std::remainder(a, kTwoPi);  // [-pi, pi]
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Angle in radians, always held in (-pi, pi].
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double rad) : rad_(wrap_angle(rad)) {}

  static Angle from_degrees(double deg) { return Angle(deg2rad(deg)); }

  double rad() const { return rad_; }
  double deg() const { return rad2deg(rad_); }

  Angle operator+(Angle o) const { return Angle(rad_ + o.rad_); }
  Angle operator-(Angle o) const { return Angle(rad_ - o.rad_); }
  Angle operator-() const { return Angle(-rad_); }
  bool operator==(const Angle&) const = default;

 private:
  double rad_ = 0.0;
};

/// Signed difference a - b on the circle, in (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

}  // namespace wheelslam
