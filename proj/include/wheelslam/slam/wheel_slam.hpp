#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

#include "wheelslam/core/rng.hpp"
#include "wheelslam/ins/types.hpp"
#include "wheelslam/slam/operations.hpp"
#include "wheelslam/slam/types.hpp"

namespace wheelslam {

/// Runs fn(i) for i in [0, n) on `workers` threads in contiguous chunks.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  const std::size_t chunk = (n + w - 1) / w;
  std::vector<std::jthread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

struct LoopClosureEvent {
  long step = 0;
  int particle = 0;
  int n_c = 0;
  double rms = 0.0;
  double current_coefficient = 0.0;
  double weight_before = 0.0;
  double weight_after = 0.0;
};

struct SlamStats {
  long steps = 0;
  long weight_updates = 0;     // particle-level evidence events
  long update_steps = 0;       // steps with at least one event
  long resamples = 0;
  long degeneracies = 0;
  long heading_fallbacks = 0;
  long criterion3_vetoes = 0;  // criteria 1-2 held but the current coefficient did not
  double max_simplex_error = 0.0;
  double min_weight = 1.0;
  bool particle_count_preserved = true;
};

/// Rao-Blackwellized particle filter over planar pose with per-particle
/// terrain (road bank) grids.
class WheelSlam {
 public:
  WheelSlam(const SlamConfig& cfg, const Pose2D& prior) : cfg_(cfg) {
    cfg_.validate();
    particles_.reserve(static_cast<std::size_t>(cfg_.particles));
    for (int i = 0; i < cfg_.particles; ++i) particles_.emplace_back(cfg_, prior);
  }

  /// One filter cycle for an odometry increment; returns the pose estimate.
  Pose2D step(const OdometryIncrement& inc) {
    travelled_ += inc.distance;
    const auto step_id = static_cast<std::uint64_t>(stats_.steps);
    const double travelled = travelled_;
    const std::size_t n = particles_.size();
    std::vector<std::optional<LoopClosureEvent>> events(n);
    std::vector<char> vetoed(n, 0);

    parallel_for(n, cfg_.workers, [&](std::size_t i) {
      Particle& q = particles_[i];
      CounterRng rng(cfg_.seed, i, step_id);
      propagate(q, inc, cfg_, rng);
      const RollSample sample{q.pose.p, inc.roll, travelled};
      const bool revisit = detect_revisit(q, sample, cfg_);
      WindowEntry entry{sample, std::nullopt};
      if (revisit) {
        entry.map_bank = q.map.find(q.map.index_of(sample.position))->bank;
      }
      update_map(q, sample, cfg_);
      q.roll_window.push(entry);
      q.matches.push(match_sequence(q, cfg_));
      if (!cfg_.loop_closure) return;
      const auto ev = check_criteria(q.matches, q.revisit_streak, cfg_);
      if (!ev) {
        vetoed[i] = criteria_one_two_hold(q) ? 1 : 0;
        return;
      }
      LoopClosureEvent e;
      e.step = stats_.steps;
      e.particle = static_cast<int>(i);
      e.n_c = ev->n_c;
      e.rms = rms(ev->coefficients);
      e.current_coefficient = ev->current_coefficient;
      e.weight_before = q.weight;
      update_weight(q, *ev, cfg_.window, cfg_.weight_score);
      e.weight_after = q.weight;
      events[i] = e;
    });

    long fired = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (events[i]) {
        ++fired;
        if (cfg_.log_events) log_.push_back(*events[i]);
      }
      stats_.criterion3_vetoes += vetoed[i];
    }
    stats_.weight_updates += fired;
    if (fired > 0) ++stats_.update_steps;

    try {
      normalize(particles_);
    } catch (const FilterDegeneracy&) {
      ++stats_.degeneracies;
    }
    if (effective_sample_ratio(particles_) < cfg_.resample_ratio) {
      CounterRng rng(cfg_.seed, kResampleStream, step_id);
      particles_ = resample(std::move(particles_), rng);
      ++stats_.resamples;
    }
    track_invariants();

    bool fallback = false;
    const Pose2D out = estimate(particles_, &fallback);
    if (fallback) ++stats_.heading_fallbacks;
    ++stats_.steps;
    return out;
  }

  const std::vector<Particle>& particles() const { return particles_; }
  std::vector<Particle>& particles() { return particles_; }
  const SlamConfig& config() const { return cfg_; }
  const SlamStats& stats() const { return stats_; }
  const std::vector<LoopClosureEvent>& events() const { return log_; }
  double travelled() const { return travelled_; }

  /// Particle with the largest weight (first on ties).
  const Particle& best_particle() const {
    return *std::max_element(particles_.begin(), particles_.end(),
                             [](const Particle& a, const Particle& b) { return a.weight < b.weight; });
  }

 private:
  static constexpr std::uint64_t kResampleStream = 0xFFFFFFFFFFFFULL;

  bool criteria_one_two_hold(const Particle& q) const {
    if (q.revisit_streak < cfg_.window || !q.matches.full()) return false;
    int above = 0;
    for (std::size_t k = 0; k < q.matches.size(); ++k) {
      if (q.matches[k] && *q.matches[k] > cfg_.corr_threshold) ++above;
    }
    return above >= cfg_.min_matches;
  }

  void track_invariants() {
    double sum = 0.0;
    for (const auto& p : particles_) {
      sum += p.weight;
      stats_.min_weight = std::min(stats_.min_weight, p.weight);
    }
    stats_.max_simplex_error = std::max(stats_.max_simplex_error, std::abs(sum - 1.0));
    if (particles_.size() != static_cast<std::size_t>(cfg_.particles)) stats_.particle_count_preserved = false;
  }

  SlamConfig cfg_;
  std::vector<Particle> particles_;
  std::vector<LoopClosureEvent> log_;
  SlamStats stats_;
  double travelled_ = 0.0;
};

}  // namespace wheelslam
