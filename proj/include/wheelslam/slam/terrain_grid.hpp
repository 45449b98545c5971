#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace wheelslam {

struct CellIndex {
  std::int32_t ix = 0;
  std::int32_t iy = 0;
  bool operator==(const CellIndex&) const = default;
  auto operator<=>(const CellIndex&) const = default;
};

struct TerrainCell {
  double bank = 0.0;                 // rad, running mean
  std::int32_t count = 0;
  double last_visit_distance = 0.0;  // m of travel at the last write
};

/// Sparse square-cell map from cell index to stored road bank angle.
/// Storage is a flat open-addressing table, so copying a grid is a single
/// contiguous copy.
class TerrainGrid {
 public:
  explicit TerrainGrid(double cell_size = 1.5) : cell_size_(cell_size) {}

  double cell_size() const { return cell_size_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  CellIndex index_of(const Eigen::Vector2d& p) const {
    return {static_cast<std::int32_t>(std::floor(p.x() / cell_size_)),
            static_cast<std::int32_t>(std::floor(p.y() / cell_size_))};
  }
  Eigen::Vector2d center_of(CellIndex c) const {
    return {(c.ix + 0.5) * cell_size_, (c.iy + 0.5) * cell_size_};
  }

  const TerrainCell* find(CellIndex c) const {
    if (slots_.empty()) return nullptr;
    std::size_t i = hash(c) & mask();
    while (slots_[i].used) {
      if (slots_[i].key == c) return &slots_[i].cell;
      i = (i + 1) & mask();
    }
    return nullptr;
  }

  /// Inserts a default cell if absent and returns it.
  TerrainCell& at(CellIndex c) {
    if ((size_ + 1) * 2 > slots_.size()) grow();
    std::size_t i = hash(c) & mask();
    while (slots_[i].used) {
      if (slots_[i].key == c) return slots_[i].cell;
      i = (i + 1) & mask();
    }
    slots_[i].used = true;
    slots_[i].key = c;
    slots_[i].cell = TerrainCell{};
    ++size_;
    return slots_[i].cell;
  }

  /// Running-mean write of a bank observation.
  void observe(CellIndex c, double bank, double travelled) {
    TerrainCell& cell = at(c);
    ++cell.count;
    cell.bank += (bank - cell.bank) / cell.count;
    cell.last_visit_distance = travelled;
  }

  /// Cells sorted by index.
  std::vector<std::pair<CellIndex, TerrainCell>> cells() const {
    std::vector<std::pair<CellIndex, TerrainCell>> out;
    out.reserve(size_);
    for (const auto& s : slots_) {
      if (s.used) out.emplace_back(s.key, s.cell);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

  bool operator==(const TerrainGrid& o) const {
    if (cell_size_ != o.cell_size_ || size_ != o.size_) return false;
    for (const auto& s : slots_) {
      if (!s.used) continue;
      const TerrainCell* c = o.find(s.key);
      if (!c || c->bank != s.cell.bank || c->count != s.cell.count ||
          c->last_visit_distance != s.cell.last_visit_distance) {
        return false;
      }
    }
    return true;
  }

 private:
  struct Slot {
    CellIndex key;
    TerrainCell cell;
    bool used = false;
  };

  static std::size_t hash(CellIndex c) {
    std::uint64_t h = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.ix)) << 32) |
                      static_cast<std::uint32_t>(c.iy);
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
  std::size_t mask() const { return slots_.size() - 1; }

  void grow() {
    std::vector<Slot> old = std::move(slots_);
    slots_.assign(old.empty() ? 64 : old.size() * 2, Slot{});
    size_ = 0;
    for (const auto& s : old) {
      if (s.used) at(s.key) = s.cell;
    }
  }

  double cell_size_;
  std::vector<Slot> slots_;
  std::size_t size_ = 0;
};

}  // namespace wheelslam
