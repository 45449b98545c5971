#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "wheelslam/core/angle.hpp"
#include "wheelslam/core/errors.hpp"
#include "wheelslam/ins/types.hpp"
#include "wheelslam/sim/trajectory.hpp"
#include "wheelslam/slam/terrain_grid.hpp"

namespace wheelslam::io {

inline const std::string kImuHeader = "t_s,gx_rads,gy_rads,gz_rads,ax_ms2,ay_ms2,az_ms2";
inline const std::string kTrajectoryHeader = "t_s,x_m,y_m,heading_deg";
inline const std::string kTruthHeader = "t_s,x_m,y_m,heading_deg,bank_deg,speed_ms";
inline const std::string kMapHeader = "ix,iy,center_x,center_y,bank_deg,count";

/// Shortest round-trip text when `digits` is 0, otherwise `digits`
/// significant digits. Integral values keep a trailing ".0".
inline std::string format_double(double v, int digits = 0) {
  if (!std::isfinite(v)) throw InvalidInput("format_double: non-finite value");
  char buf[64];
  std::to_chars_result r;
  if (digits > 0) {
    r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  } else {
    r = std::to_chars(buf, buf + sizeof buf, v);
  }
  std::string s(buf, r.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

/// Degrees rounded to 15 significant digits, so 2 deg stored in radians
/// prints as "2.0".
inline std::string format_deg(double rad) { return format_double(rad2deg(rad), 15); }

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::string where(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line) + ": ";
}

template <typename T>
T parse_number(std::string_view field, const std::string& path, std::size_t line) {
  field = trim(field);
  T v{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw IoError(where(path, line) + "malformed number '" + std::string(field) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw IoError(where(path, line) + "non-finite value");
  }
  return v;
}

/// Writes through a temporary file and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Splits a CSV document into rows of fields after checking the header.
/// Calls `row(fields, line_number)` for every non-empty data line.
template <typename Fn>
void for_each_row(const std::string& text, const std::string& header, std::size_t columns,
                  const std::string& path, Fn&& row) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++n;
    const std::string_view v = trim(line);
    if (v.empty()) continue;
    if (!have_header) {
      if (v != header) throw IoError(where(path, n) + "expected header '" + header + "'");
      have_header = true;
      continue;
    }
    const auto fields = split_fields(v);
    if (fields.size() != columns) {
      throw IoError(where(path, n) + "expected " + std::to_string(columns) + " fields, got " +
                    std::to_string(fields.size()));
    }
    row(fields, n);
  }
  if (!have_header) throw IoError(path + ": missing header");
}

// ---- IMU ----

inline std::string imu_csv(const std::vector<ImuSample>& samples) {
  std::string out = kImuHeader + "\n";
  for (const auto& s : samples) {
    out += format_double(s.t);
    for (int i = 0; i < 3; ++i) out += "," + format_double(s.gyro[i]);
    for (int i = 0; i < 3; ++i) out += "," + format_double(s.accel[i]);
    out += "\n";
  }
  return out;
}

inline std::vector<ImuSample> parse_imu_csv(const std::string& text, const std::string& path = "<imu>") {
  std::vector<ImuSample> out;
  for_each_row(text, kImuHeader, 7, path, [&](const auto& f, std::size_t line) {
    ImuSample s;
    s.t = parse_number<double>(f[0], path, line);
    for (int i = 0; i < 3; ++i) s.gyro[i] = parse_number<double>(f[1 + i], path, line);
    for (int i = 0; i < 3; ++i) s.accel[i] = parse_number<double>(f[4 + i], path, line);
    if (!out.empty() && !(s.t > out.back().t)) throw IoError(where(path, line) + "timestamp regression");
    out.push_back(s);
  });
  return out;
}

inline std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path) {
  return parse_imu_csv(read_file(path), path.string());
}

inline void write_imu_csv(const std::filesystem::path& path, const std::vector<ImuSample>& samples) {
  atomic_write(path, imu_csv(samples));
}

// ---- trajectories ----

struct TrajectoryPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // rad
};

inline std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj) {
  std::string out = kTrajectoryHeader + "\n";
  for (const auto& p : traj) {
    out += format_double(p.t) + "," + format_double(p.x) + "," + format_double(p.y) + "," +
           format_deg(p.heading) + "\n";
  }
  return out;
}

inline std::vector<TrajectoryPoint> parse_trajectory_csv(const std::string& text,
                                                         const std::string& path = "<trajectory>") {
  std::vector<TrajectoryPoint> out;
  for_each_row(text, kTrajectoryHeader, 4, path, [&](const auto& f, std::size_t line) {
    TrajectoryPoint p;
    p.t = parse_number<double>(f[0], path, line);
    p.x = parse_number<double>(f[1], path, line);
    p.y = parse_number<double>(f[2], path, line);
    p.heading = deg2rad(parse_number<double>(f[3], path, line));
    if (!out.empty() && !(p.t > out.back().t)) throw IoError(where(path, line) + "timestamp regression");
    out.push_back(p);
  });
  return out;
}

inline std::vector<TrajectoryPoint> read_trajectory_csv(const std::filesystem::path& path) {
  return parse_trajectory_csv(read_file(path), path.string());
}

struct TruthPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // rad
  double bank = 0.0;     // rad
  double speed = 0.0;    // m/s
};

inline std::vector<TruthPoint> truth_points(const sim::GroundTruth& truth) {
  std::vector<TruthPoint> out;
  out.reserve(truth.samples.size());
  for (const auto& s : truth.samples) {
    out.push_back({s.t, s.position.x(), s.position.y(), wrap_angle(s.heading), s.bank, s.speed});
  }
  return out;
}

inline std::string truth_csv(const std::vector<TruthPoint>& truth) {
  std::string out = kTruthHeader + "\n";
  for (const auto& p : truth) {
    out += format_double(p.t) + "," + format_double(p.x) + "," + format_double(p.y) + "," +
           format_deg(p.heading) + "," + format_deg(p.bank) + "," + format_double(p.speed) + "\n";
  }
  return out;
}

inline std::vector<TruthPoint> parse_truth_csv(const std::string& text, const std::string& path = "<truth>") {
  std::vector<TruthPoint> out;
  for_each_row(text, kTruthHeader, 6, path, [&](const auto& f, std::size_t line) {
    TruthPoint p;
    p.t = parse_number<double>(f[0], path, line);
    p.x = parse_number<double>(f[1], path, line);
    p.y = parse_number<double>(f[2], path, line);
    p.heading = deg2rad(parse_number<double>(f[3], path, line));
    p.bank = deg2rad(parse_number<double>(f[4], path, line));
    p.speed = parse_number<double>(f[5], path, line);
    if (!out.empty() && !(p.t > out.back().t)) throw IoError(where(path, line) + "timestamp regression");
    out.push_back(p);
  });
  return out;
}

inline std::vector<TruthPoint> read_truth_csv(const std::filesystem::path& path) {
  return parse_truth_csv(read_file(path), path.string());
}

// ---- terrain map ----

inline std::string map_csv(const TerrainGrid& grid) {
  if (grid.empty()) throw InvalidInput("export_map: empty grid");
  std::string out = kMapHeader + "\n";
  for (const auto& [c, cell] : grid.cells()) {
    const Eigen::Vector2d centre = grid.center_of(c);
    out += std::to_string(c.ix) + "," + std::to_string(c.iy) + "," + format_double(centre.x(), 15) + "," +
           format_double(centre.y(), 15) + "," + format_deg(cell.bank) + "," + std::to_string(cell.count) + "\n";
  }
  return out;
}

inline void export_map(const TerrainGrid& grid, const std::filesystem::path& path) {
  atomic_write(path, map_csv(grid));
}

/// Rebuilds a grid from its export. Visit distances are not exported and
/// come back as zero.
inline TerrainGrid parse_map_csv(const std::string& text, double cell_size, const std::string& path = "<map>") {
  TerrainGrid grid(cell_size);
  for_each_row(text, kMapHeader, 6, path, [&](const auto& f, std::size_t line) {
    const CellIndex c{parse_number<std::int32_t>(f[0], path, line), parse_number<std::int32_t>(f[1], path, line)};
    if (grid.find(c)) throw IoError(where(path, line) + "duplicate cell");
    const int count = parse_number<int>(f[5], path, line);
    if (count < 1) throw IoError(where(path, line) + "cell count must be positive");
    TerrainCell& cell = grid.at(c);
    cell.bank = deg2rad(parse_number<double>(f[4], path, line));
    cell.count = count;
  });
  return grid;
}

inline TerrainGrid import_map(const std::filesystem::path& path, double cell_size) {
  return parse_map_csv(read_file(path), cell_size, path.string());
}

}  // namespace wheelslam::io
