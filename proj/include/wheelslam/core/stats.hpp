#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "wheelslam/core/errors.hpp"

namespace wheelslam {

inline double mean(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("mean: empty sequence");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

/// Root mean square, sqrt(sum(v^2)/n).
inline double rms(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("rms: empty sequence");
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s / static_cast<double>(values.size()));
}

/// Pearson product-moment correlation. Throws DegenerateSequence when either
/// input has (numerically) zero variance.
inline double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("pearson_correlation: length mismatch");
  if (a.size() < 2) throw InvalidInput("pearson_correlation: need at least two samples");
  const double ma = mean(a);
  const double mb = mean(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  double scale_a = 0.0, scale_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
    scale_a = std::max(scale_a, std::abs(a[i]));
    scale_b = std::max(scale_b, std::abs(b[i]));
  }
  if (!std::isfinite(saa) || !std::isfinite(sbb) || !std::isfinite(sab)) {
    throw InvalidInput("pearson_correlation: non-finite input");
  }
  // Variance below the rounding floor of the data is treated as exactly zero.
  const double n = static_cast<double>(a.size());
  const double floor_a = n * std::pow(1e-14 * scale_a, 2);
  const double floor_b = n * std::pow(1e-14 * scale_b, 2);
  if (saa <= floor_a || sbb <= floor_b) {
    throw DegenerateSequence("pearson_correlation: zero-variance sequence");
  }
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

/// Linear-interpolated quantile (same definition as numpy's default), q in [0,1].
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile: empty sequence");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("quantile: q outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace wheelslam
