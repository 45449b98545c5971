#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/errors.hpp"
#include "wheelslam/core/rng.hpp"
#include "wheelslam/core/stats.hpp"
#include "wheelslam/ins/types.hpp"
#include "wheelslam/slam/types.hpp"

namespace wheelslam {

/// Samples the motion model: perturb the increment, translate along the
/// current heading, then rotate.
template <typename Rng>
void propagate(Particle& particle, const OdometryIncrement& inc, const SlamConfig& cfg, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double ds = inc.distance + cfg.distance_std * normal(rng);
  const double dpsi = inc.heading_change + deg2rad(cfg.heading_std) * normal(rng);
  const double psi = particle.pose.heading.rad();
  particle.pose.p += ds * Eigen::Vector2d(std::cos(psi), std::sin(psi));
  particle.pose.heading = Angle(psi + dpsi);
}

/// True when the sample falls in a cell written more than the exclusion
/// distance ago. Maintains the particle's revisit streak.
inline bool detect_revisit(Particle& particle, const RollSample& sample, const SlamConfig& cfg) {
  const TerrainCell* cell = particle.map.find(particle.map.index_of(sample.position));
  const bool revisit =
      cell != nullptr && sample.cumulative_distance - cell->last_visit_distance > cfg.exclusion_distance;
  particle.revisit_streak = revisit ? particle.revisit_streak + 1 : 0;
  return revisit;
}

/// Writes the sample into the particle's map. Cells from an earlier pass
/// (older than the exclusion distance) are left untouched so they remain a
/// fixed reference for matching. Returns true if a write happened.
inline bool update_map(Particle& particle, const RollSample& sample, const SlamConfig& cfg) {
  const CellIndex idx = particle.map.index_of(sample.position);
  const TerrainCell* cell = particle.map.find(idx);
  if (cell != nullptr && sample.cumulative_distance - cell->last_visit_distance > cfg.exclusion_distance) {
    return false;
  }
  particle.map.observe(idx, sample.bank, sample.cumulative_distance);
  return true;
}

namespace detail {
inline bool is_flat(std::span<const double> v, double min_std) {
  if (min_std <= 0.0) return false;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size())) < min_std;
}
}  // namespace detail

/// Pearson correlation between the window's current bank estimates and the
/// stored map banks under the same samples. Empty when the window is not
/// full, any cell is missing, or either sequence is degenerate.
inline std::optional<double> match_sequence(const Particle& particle, const SlamConfig& cfg) {
  const auto& w = particle.roll_window;
  if (!w.full()) return std::nullopt;
  std::vector<double> current(w.size()), stored(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!w[i].map_bank) return std::nullopt;
    current[i] = w[i].sample.bank;
    stored[i] = *w[i].map_bank;
  }
  const double min_std = deg2rad(cfg.min_bank_std);
  if (detail::is_flat(current, min_std) || detail::is_flat(stored, min_std)) return std::nullopt;
  try {
    return pearson_correlation(current, stored);
  } catch (const DegenerateSequence&) {
    return std::nullopt;
  }
}

/// Three-criterion loop-closure test over the last N_r epochs:
/// (1) revisits at every one of them, (2) at least N_thr coefficients above
/// C_thr, (3) the current coefficient above C_thr.
inline std::optional<LoopClosureEvidence> check_criteria(const RingBuffer<std::optional<double>>& recent,
                                                         int revisit_streak, const SlamConfig& cfg) {
  if (revisit_streak < cfg.window) return std::nullopt;
  if (recent.size() < static_cast<std::size_t>(cfg.window)) return std::nullopt;
  const std::optional<double>& current = recent.back();
  if (!current || !(*current > cfg.corr_threshold)) return std::nullopt;
  LoopClosureEvidence ev;
  for (std::size_t i = 0; i < recent.size(); ++i) {
    if (recent[i] && *recent[i] > cfg.corr_threshold) ev.coefficients.push_back(*recent[i]);
  }
  ev.n_c = static_cast<int>(ev.coefficients.size());
  if (ev.n_c < cfg.min_matches) return std::nullopt;
  ev.current_coefficient = *current;
  return ev;
}

/// Multiplicative factor (N_c / N_r) * exp(score) applied to the weight.
inline double weight_factor(const LoopClosureEvidence& ev, int window, WeightScore mode) {
  double score = 0.0;
  if (mode == WeightScore::kRmsOfCoefficients) {
    score = rms(ev.coefficients);
  } else {
    std::vector<double> residual(ev.coefficients.size());
    std::transform(ev.coefficients.begin(), ev.coefficients.end(), residual.begin(),
                   [](double c) { return 1.0 - c; });
    score = -rms(residual);
  }
  return static_cast<double>(ev.n_c) / static_cast<double>(window) * std::exp(score);
}

inline void update_weight(Particle& particle, const LoopClosureEvidence& ev, int window,
                          WeightScore mode = WeightScore::kRmsOfCoefficients) {
  particle.weight *= weight_factor(ev, window, mode);
}

/// Divides every weight by the sum. On an all-zero (or non-finite) sum the
/// weights are reset to uniform and FilterDegeneracy is thrown.
inline void normalize(std::span<Particle> particles) {
  double sum = 0.0;
  for (const auto& p : particles) sum += p.weight;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    const double u = 1.0 / static_cast<double>(particles.size());
    for (auto& p : particles) p.weight = u;
    throw FilterDegeneracy("normalize: all particle weights vanished; reset to uniform");
  }
  for (auto& p : particles) p.weight /= sum;
}

/// N_eff / N_p with N_eff = 1 / sum(w^2).
inline double effective_sample_ratio(std::span<const Particle> particles) {
  double sq = 0.0;
  for (const auto& p : particles) sq += p.weight * p.weight;
  return 1.0 / sq / static_cast<double>(particles.size());
}

/// Systematic resampling indices for normalized weights; `u0` in [0, 1).
inline std::vector<std::size_t> systematic_indices(std::span<const double> weights, double u0) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> idx(n);
  const double step = 1.0 / static_cast<double>(n);
  double cum = weights[0];
  std::size_t i = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const double u = (u0 + static_cast<double>(m)) * step;
    while (cum <= u && i + 1 < n) cum += weights[++i];
    idx[m] = i;
  }
  return idx;
}

/// Low-variance resampling. Survivors are deep copies (pose, map, window);
/// weights are reset to uniform.
template <typename Rng>
std::vector<Particle> resample(std::vector<Particle>&& particles, Rng& rng) {
  std::vector<double> w(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) w[i] = particles[i].weight;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const std::vector<std::size_t> idx = systematic_indices(w, uni(rng));
  std::vector<int> remaining(particles.size(), 0);
  for (std::size_t i : idx) ++remaining[i];
  std::vector<Particle> out;
  out.reserve(particles.size());
  const double u = 1.0 / static_cast<double>(particles.size());
  for (std::size_t i : idx) {
    // the last copy of each source can take ownership
    if (--remaining[i] == 0) {
      out.push_back(std::move(particles[i]));
    } else {
      out.push_back(particles[i]);
    }
    out.back().weight = u;
  }
  return out;
}

/// Weighted mean position and weighted circular-mean heading.
inline Pose2D estimate(std::span<const Particle> particles, bool* heading_fallback = nullptr) {
  Pose2D out;
  double s = 0.0, c = 0.0, wsum = 0.0;
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  std::size_t best = 0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const auto& q = particles[i];
    p += q.weight * q.pose.p;
    s += q.weight * std::sin(q.pose.heading.rad());
    c += q.weight * std::cos(q.pose.heading.rad());
    wsum += q.weight;
    if (q.weight > particles[best].weight) best = i;
  }
  out.p = p / wsum;
  const double resultant = std::hypot(s, c);
  if (resultant < 1e-12 * wsum) {
    out.heading = particles[best].pose.heading;
    if (heading_fallback) *heading_fallback = true;
  } else {
    out.heading = Angle(std::atan2(s, c));
    if (heading_fallback) *heading_fallback = false;
  }
  return out;
}

}  // namespace wheelslam
