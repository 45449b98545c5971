#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/errors.hpp"
#include "wheelslam/core/stats.hpp"
#include "wheelslam/io/csv.hpp"

namespace wheelslam::io {

struct EpochError {
  double t = 0.0;
  double dx = 0.0;        // m, estimate - truth
  double dy = 0.0;        // m
  double heading = 0.0;   // rad, wrapped difference
};

struct Metrics {
  double position_rmse = 0.0;  // m, horizontal
  double heading_rmse = 0.0;   // deg
  std::vector<EpochError> series;
};

/// Truth pose at time t, linear in position and along the short arc in
/// heading. `t` must lie inside the truth span.
inline TruthPoint interpolate_truth(std::span<const TruthPoint> truth, double t) {
  const auto it = std::lower_bound(truth.begin(), truth.end(), t,
                                   [](const TruthPoint& p, double v) { return p.t < v; });
  if (it == truth.end()) throw InvalidInput("interpolate_truth: time after truth span");
  if (it->t == t) return *it;
  if (it == truth.begin()) throw InvalidInput("interpolate_truth: time before truth span");
  const TruthPoint& a = *(it - 1);
  const TruthPoint& b = *it;
  const double u = (t - a.t) / (b.t - a.t);
  TruthPoint p;
  p.t = t;
  p.x = a.x + u * (b.x - a.x);
  p.y = a.y + u * (b.y - a.y);
  p.heading = wrap_angle(a.heading + u * angle_diff(b.heading, a.heading));
  p.bank = a.bank + u * (b.bank - a.bank);
  p.speed = a.speed + u * (b.speed - a.speed);
  return p;
}

/// Errors of every estimate epoch inside [t_begin, t_end] that the truth
/// covers.
inline Metrics evaluate(std::span<const TrajectoryPoint> estimate, std::span<const TruthPoint> truth,
                        double t_begin = -std::numeric_limits<double>::infinity(),
                        double t_end = std::numeric_limits<double>::infinity()) {
  if (truth.empty()) throw InvalidInput("evaluate: empty truth");
  Metrics m;
  double se_pos = 0.0, se_head = 0.0;
  for (const auto& e : estimate) {
    if (e.t < t_begin || e.t > t_end) continue;
    if (e.t < truth.front().t || e.t > truth.back().t) continue;
    const TruthPoint g = interpolate_truth(truth, e.t);
    EpochError err{e.t, e.x - g.x, e.y - g.y, angle_diff(e.heading, g.heading)};
    se_pos += err.dx * err.dx + err.dy * err.dy;
    se_head += err.heading * err.heading;
    m.series.push_back(err);
  }
  if (m.series.empty()) throw InvalidInput("evaluate: estimate and truth do not overlap in time");
  const auto n = static_cast<double>(m.series.size());
  m.position_rmse = std::sqrt(se_pos / n);
  m.heading_rmse = rad2deg(std::sqrt(se_head / n));
  return m;
}

/// Percentage reduction of `candidate` relative to `baseline`.
inline double improvement(double baseline, double candidate) {
  if (!(baseline > 0.0)) throw InvalidInput("improvement: baseline must be positive");
  return 100.0 * (baseline - candidate) / baseline;
}

struct Summary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  double iqr() const { return q3 - q1; }
};

inline Summary summarize(std::span<const double> xs) {
  if (xs.empty()) throw InvalidInput("summarize: empty sample");
  Summary s;
  const std::vector<double> v(xs.begin(), xs.end());
  s.median = median(v);
  s.q1 = quantile(v, 0.25);
  s.q3 = quantile(v, 0.75);
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  return s;
}

inline nlohmann::ordered_json to_json(const Summary& s) {
  return {{"median", s.median}, {"q1", s.q1}, {"q3", s.q3}, {"min", s.min}, {"max", s.max}};
}

inline nlohmann::ordered_json to_json(const Metrics& m) {
  return {{"epochs", m.series.size()}, {"position_rmse_m", m.position_rmse}, {"heading_rmse_deg", m.heading_rmse}};
}

/// Per-epoch errors, plot-ready.
inline std::string error_series_csv(const Metrics& m) {
  std::string out = "t_s,dx_m,dy_m,position_error_m,heading_error_deg\n";
  for (const auto& e : m.series) {
    out += format_double(e.t) + "," + format_double(e.dx) + "," + format_double(e.dy) + "," +
           format_double(std::hypot(e.dx, e.dy)) + "," + format_deg(e.heading) + "\n";
  }
  return out;
}

}  // namespace wheelslam::io
