#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/errors.hpp"
#include "wheelslam/slam/terrain_grid.hpp"

namespace wheelslam {

/// How the correlation set enters the weight update.
enum class WeightScore {
  kRmsOfCoefficients,  // exp(rms(V))
  kRmsOfResiduals,     // exp(-rms(1 - V))
};

struct SlamConfig {
  int particles = 100;
  double cell_size = 1.5;             // m
  double distance_std = 0.025;        // m per increment
  double heading_std = 0.05;          // deg per increment
  double sample_distance = 0.5;       // m between roll samples
  double sequence_length = 25.0;      // m matched per correlation
  double corr_threshold = 0.4;        // C_thr
  int window = 50;                    // N_r
  int min_matches = 40;               // N_thr = ceil(0.8 * N_r)
  double resample_ratio = 0.75;       // resample when N_eff / N_p drops below
  double exclusion_distance = 75.0;   // m; 3 * sequence length
  double min_bank_std = 0.01;         // deg; flatter sequences carry no evidence
  WeightScore weight_score = WeightScore::kRmsOfCoefficients;
  bool loop_closure = true;
  bool log_events = false;
  int workers = 1;
  std::uint64_t seed = 1;

  int sequence_samples() const {
    return static_cast<int>(std::lround(sequence_length / sample_distance));
  }

  void validate() const {
    if (particles < 2) throw InvalidInput("slam: need at least two particles");
    if (!(cell_size > 0.0)) throw InvalidInput("slam: cell_size must be positive");
    if (!(distance_std >= 0.0) || !(heading_std >= 0.0)) throw InvalidInput("slam: negative motion noise");
    if (!(sample_distance > 0.0) || !(sequence_length >= 2.0 * sample_distance)) {
      throw InvalidInput("slam: sequence must hold at least two samples");
    }
    if (!(corr_threshold > 0.0 && corr_threshold < 1.0)) throw InvalidInput("slam: C_thr must be in (0,1)");
    if (window < 1 || min_matches < 1 || min_matches > window) {
      throw InvalidInput("slam: need 1 <= N_thr <= N_r");
    }
    if (!(resample_ratio > 0.0 && resample_ratio <= 1.0)) throw InvalidInput("slam: resample ratio in (0,1]");
    if (!(exclusion_distance >= 0.0)) throw InvalidInput("slam: negative exclusion distance");
    if (workers < 1) throw InvalidInput("slam: workers must be >= 1");
  }
};

struct Pose2D {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  Angle heading;
};

struct RollSample {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double bank = 0.0;                 // rad
  double cumulative_distance = 0.0;  // m
};

/// Fixed-capacity FIFO; index 0 is the oldest entry.
template <typename T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity = 1) : data_(capacity) {}

  void push(const T& v) {
    data_[(head_ + size_) % data_.size()] = v;
    if (size_ < data_.size()) {
      ++size_;
    } else {
      head_ = (head_ + 1) % data_.size();
    }
  }
  void clear() { head_ = size_ = 0; }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return data_.size(); }
  bool full() const { return size_ == data_.size(); }
  const T& operator[](std::size_t i) const { return data_[(head_ + i) % data_.size()]; }
  const T& back() const { return (*this)[size_ - 1]; }

 private:
  std::vector<T> data_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

/// Window entry: the sample plus the map bank stored under it when the
/// cell belongs to an earlier pass (frozen, so it stays valid).
struct WindowEntry {
  RollSample sample;
  std::optional<double> map_bank;
};

/// One hypothesis: pose, weight, own terrain map and matching history.
struct Particle {
  Pose2D pose;
  double weight = 1.0;
  TerrainGrid map;
  RingBuffer<WindowEntry> roll_window;
  RingBuffer<std::optional<double>> matches;  // last N_r coefficients
  int revisit_streak = 0;

  Particle() = default;
  Particle(const SlamConfig& cfg, const Pose2D& prior)
      : pose(prior),
        weight(1.0 / cfg.particles),
        map(cfg.cell_size),
        roll_window(static_cast<std::size_t>(cfg.sequence_samples())),
        matches(static_cast<std::size_t>(cfg.window)) {}
};

struct LoopClosureEvidence {
  std::vector<double> coefficients;  // those above C_thr
  int n_c = 0;
  double current_coefficient = 0.0;
};

}  // namespace wheelslam
