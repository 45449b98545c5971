#pragma once

#include <charconv>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wheelslam/core/errors.hpp"
#include "wheelslam/ins/config.hpp"
#include "wheelslam/io/csv.hpp"
#include "wheelslam/sim/noise.hpp"
#include "wheelslam/sim/scene.hpp"
#include "wheelslam/slam/types.hpp"

namespace wheelslam::io {

struct RunConfig {
  WheelInsConfig ins;
  SlamConfig slam;
  sim::SensorErrorSpec sensor = sim::SensorErrorSpec::icm20602();
  sim::TrajectorySpec trajectory = sim::benchmark_scene().trajectory;
  sim::BumpFieldSpec bumps;
  bool flat_terrain = false;

  double initial_x = 0.0;        // m
  double initial_y = 0.0;        // m
  double initial_heading = 0.0;  // deg, east = 0, counter-clockwise

  std::uint64_t seed = 1;
  int seeds = 20;                // compare: number of consecutive seeds
  std::string imu_path;          // run-ins / run-slam / export-map input
  std::string truth_path;        // evaluate reference
  std::string trajectory_path;   // evaluate input
  std::string out_dir = "out";

  RunConfig() { apply_seed(seed); }

  /// Seed fan-out: every random stream of a run is keyed by `seed`.
  void apply_seed(std::uint64_t s) {
    seed = s;
    sensor.seed = s;
    slam.seed = s;
  }

  void validate() const {
    ins.validate();
    slam.validate();
    sensor.validate();
    if (seeds < 1) throw InvalidInput("config: seeds must be >= 1");
    if (trajectory.waypoints.size() < 2) throw InvalidInput("config: need at least two waypoints");
  }
};

namespace detail {

inline double to_double(std::string_view v, const std::string& key) {
  double x{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty() || !std::isfinite(x)) {
    throw InvalidInput("config: bad number for '" + key + "': '" + std::string(v) + "'");
  }
  return x;
}

template <typename I>
I to_integer(std::string_view v, const std::string& key) {
  I x{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw InvalidInput("config: bad integer for '" + key + "': '" + std::string(v) + "'");
  }
  return x;
}

inline bool to_bool(std::string_view v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidInput("config: bad boolean for '" + key + "': '" + std::string(v) + "'");
}

inline std::vector<double> to_list(std::string_view v, const std::string& key) {
  std::vector<double> out;
  for (auto f : split_fields(v)) out.push_back(to_double(trim(f), key));
  return out;
}

inline std::string list_text(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
  return s;
}

struct Key {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <typename T>
Key number(std::string name, T RunConfig::*group, double T::*field) {
  return {name, [=](const RunConfig& c) { return format_double(c.*group.*field); },
          [=](RunConfig& c, std::string_view v) { c.*group.*field = to_double(v, name); }};
}

inline Key number(std::string name, double RunConfig::*field) {
  return {name, [=](const RunConfig& c) { return format_double(c.*field); },
          [=](RunConfig& c, std::string_view v) { c.*field = to_double(v, name); }};
}

template <typename T, typename I>
Key integer(std::string name, T RunConfig::*group, I T::*field) {
  return {name, [=](const RunConfig& c) { return std::to_string(c.*group.*field); },
          [=](RunConfig& c, std::string_view v) { c.*group.*field = to_integer<I>(v, name); }};
}

template <typename T>
Key boolean(std::string name, T RunConfig::*group, bool T::*field) {
  return {name, [=](const RunConfig& c) { return std::string(c.*group.*field ? "true" : "false"); },
          [=](RunConfig& c, std::string_view v) { c.*group.*field = to_bool(v, name); }};
}

inline Key text(std::string name, std::string RunConfig::*field) {
  return {name, [=](const RunConfig& c) { return c.*field; },
          [=](RunConfig& c, std::string_view v) { c.*field = std::string(v); }};
}

inline std::vector<Key> make_keys() {
  using C = RunConfig;
  std::vector<Key> k;
  k.push_back({"seed", [](const C& c) { return std::to_string(c.seed); },
               [](C& c, std::string_view v) { c.apply_seed(to_integer<std::uint64_t>(v, "seed")); }});
  k.push_back({"seeds", [](const C& c) { return std::to_string(c.seeds); },
               [](C& c, std::string_view v) { c.seeds = to_integer<int>(v, "seeds"); }});
  k.push_back(text("imu", &C::imu_path));
  k.push_back(text("truth", &C::truth_path));
  k.push_back(text("trajectory", &C::trajectory_path));
  k.push_back(text("out", &C::out_dir));
  k.push_back(number("initial_x", &C::initial_x));
  k.push_back(number("initial_y", &C::initial_y));
  k.push_back(number("initial_heading", &C::initial_heading));

  using W = WheelInsConfig;
  k.push_back(number("ins.wheel_radius", &C::ins, &W::wheel_radius));
  k.push_back({"ins.lever_arm",
               [](const C& c) { return list_text({c.ins.lever_arm.x(), c.ins.lever_arm.y(), c.ins.lever_arm.z()}); },
               [](C& c, std::string_view v) {
                 const auto xs = to_list(v, "ins.lever_arm");
                 if (xs.size() != 3) throw InvalidInput("config: ins.lever_arm needs three values");
                 c.ins.lever_arm = Vec3(xs[0], xs[1], xs[2]);
               }});
  k.push_back(number("ins.imu_rate", &C::ins, &W::imu_rate));
  k.push_back(number("ins.gyro_arw", &C::ins, &W::gyro_arw));
  k.push_back(number("ins.accel_vrw", &C::ins, &W::accel_vrw));
  k.push_back(number("ins.gyro_bias_instability", &C::ins, &W::gyro_bias_instability));
  k.push_back(number("ins.accel_bias_instability", &C::ins, &W::accel_bias_instability));
  k.push_back(number("ins.bias_correlation_time", &C::ins, &W::bias_correlation_time));
  k.push_back(number("ins.init_position_std", &C::ins, &W::init_position_std));
  k.push_back(number("ins.init_velocity_std", &C::ins, &W::init_velocity_std));
  k.push_back(number("ins.init_roll_pitch_std", &C::ins, &W::init_roll_pitch_std));
  k.push_back(number("ins.init_heading_std", &C::ins, &W::init_heading_std));
  k.push_back(number("ins.init_gyro_bias_std", &C::ins, &W::init_gyro_bias_std));
  k.push_back(number("ins.init_accel_bias_std", &C::ins, &W::init_accel_bias_std));
  k.push_back(number("ins.init_gyro_scale_std", &C::ins, &W::init_gyro_scale_std));
  k.push_back(number("ins.init_accel_scale_std", &C::ins, &W::init_accel_scale_std));
  k.push_back(number("ins.wheel_velocity_std", &C::ins, &W::wheel_velocity_std));
  k.push_back(number("ins.nhc_std", &C::ins, &W::nhc_std));
  k.push_back(number("ins.update_interval", &C::ins, &W::update_interval));
  k.push_back(number("ins.chi2_gate", &C::ins, &W::chi2_gate));
  k.push_back(number("ins.increment_distance", &C::ins, &W::increment_distance));
  k.push_back(number("ins.align_duration", &C::ins, &W::align_duration));
  k.push_back(number("ins.align_max_accel_var", &C::ins, &W::align_max_accel_var));
  k.push_back(number("ins.align_max_gyro_mean", &C::ins, &W::align_max_gyro_mean));

  using S = SlamConfig;
  k.push_back(integer("slam.particles", &C::slam, &S::particles));
  k.push_back(number("slam.cell_size", &C::slam, &S::cell_size));
  k.push_back(number("slam.distance_std", &C::slam, &S::distance_std));
  k.push_back(number("slam.heading_std", &C::slam, &S::heading_std));
  k.push_back(number("slam.sample_distance", &C::slam, &S::sample_distance));
  k.push_back(number("slam.sequence_length", &C::slam, &S::sequence_length));
  k.push_back(number("slam.corr_threshold", &C::slam, &S::corr_threshold));
  k.push_back(integer("slam.window", &C::slam, &S::window));
  k.push_back(integer("slam.min_matches", &C::slam, &S::min_matches));
  k.push_back(number("slam.resample_ratio", &C::slam, &S::resample_ratio));
  k.push_back(number("slam.exclusion_distance", &C::slam, &S::exclusion_distance));
  k.push_back(number("slam.min_bank_std", &C::slam, &S::min_bank_std));
  k.push_back({"slam.weight_score",
               [](const C& c) {
                 return std::string(c.slam.weight_score == WeightScore::kRmsOfCoefficients ? "rms_coefficients"
                                                                                          : "rms_residuals");
               },
               [](C& c, std::string_view v) {
                 if (v == "rms_coefficients") c.slam.weight_score = WeightScore::kRmsOfCoefficients;
                 else if (v == "rms_residuals") c.slam.weight_score = WeightScore::kRmsOfResiduals;
                 else throw InvalidInput("config: slam.weight_score is rms_coefficients or rms_residuals");
               }});
  k.push_back(boolean("slam.loop_closure", &C::slam, &S::loop_closure));
  k.push_back(integer("slam.workers", &C::slam, &S::workers));

  using E = sim::SensorErrorSpec;
  k.push_back(number("sensor.gyro_bias", &C::sensor, &E::gyro_bias));
  k.push_back(number("sensor.gyro_arw", &C::sensor, &E::gyro_arw));
  k.push_back(number("sensor.accel_bias", &C::sensor, &E::accel_bias));
  k.push_back(number("sensor.accel_vrw", &C::sensor, &E::accel_vrw));
  k.push_back(number("sensor.gyro_scale", &C::sensor, &E::gyro_scale));
  k.push_back(number("sensor.accel_scale", &C::sensor, &E::accel_scale));

  using T = sim::TrajectorySpec;
  k.push_back({"scene.waypoints",
               [](const C& c) {
                 std::string s;
                 for (std::size_t i = 0; i < c.trajectory.waypoints.size(); ++i) {
                   const auto& w = c.trajectory.waypoints[i];
                   s += (i ? "," : "") + format_double(w.x()) + "," + format_double(w.y());
                 }
                 return s;
               },
               [](C& c, std::string_view v) {
                 const auto xs = to_list(v, "scene.waypoints");
                 if (xs.size() % 2 != 0) throw InvalidInput("config: scene.waypoints needs x,y pairs");
                 c.trajectory.waypoints.clear();
                 for (std::size_t i = 0; i < xs.size(); i += 2) c.trajectory.waypoints.emplace_back(xs[i], xs[i + 1]);
               }});
  k.push_back(boolean("scene.closed", &C::trajectory, &T::closed));
  k.push_back(integer("scene.laps", &C::trajectory, &T::laps));
  k.push_back(number("scene.speed", &C::trajectory, &T::speed));
  k.push_back(number("scene.corner_radius", &C::trajectory, &T::corner_radius));
  k.push_back(number("scene.imu_rate", &C::trajectory, &T::imu_rate));
  k.push_back(number("scene.wheel_radius", &C::trajectory, &T::wheel_radius));
  k.push_back(number("scene.static_duration", &C::trajectory, &T::static_duration));
  k.push_back(number("scene.ramp_duration", &C::trajectory, &T::ramp_duration));
  k.push_back(number("scene.initial_spin", &C::trajectory, &T::initial_spin));
  k.push_back({"scene.flat", [](const C& c) { return std::string(c.flat_terrain ? "true" : "false"); },
               [](C& c, std::string_view v) { c.flat_terrain = to_bool(v, "scene.flat"); }});

  using B = sim::BumpFieldSpec;
  k.push_back(integer("bumps.count", &C::bumps, &B::count));
  k.push_back(number("bumps.min_amplitude", &C::bumps, &B::min_amplitude));
  k.push_back(number("bumps.max_amplitude", &C::bumps, &B::max_amplitude));
  k.push_back(number("bumps.min_length_scale", &C::bumps, &B::min_length_scale));
  k.push_back(number("bumps.max_length_scale", &C::bumps, &B::max_length_scale));
  k.push_back(number("bumps.lateral_spread", &C::bumps, &B::lateral_spread));
  k.push_back(integer("bumps.seed", &C::bumps, &B::seed));
  return k;
}

inline const std::vector<Key>& keys() {
  static const std::vector<Key> k = make_keys();
  return k;
}

}  // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : detail::keys()) out.push_back(k.name);
  return out;
}

/// Sets one key. Unknown keys are rejected.
inline void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& k : detail::keys()) {
    if (k.name == key) {
      k.set(cfg, trim(value));
      return;
    }
  }
  throw InvalidInput("config: unknown key '" + std::string(key) + "'");
}

inline std::string get_config_value(const RunConfig& cfg, std::string_view key) {
  for (const auto& k : detail::keys()) {
    if (k.name == key) return k.get(cfg);
  }
  throw InvalidInput("config: unknown key '" + std::string(key) + "'");
}

/// Applies `key = value` lines on top of `cfg`. Blank lines and `#`
/// comments are ignored; a key may appear only once per document.
inline void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source = "<config>") {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++n;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) throw InvalidInput(where(source, n) + "expected 'key = value'");
    const std::string key(trim(v.substr(0, eq)));
    if (auto [it, fresh] = seen.emplace(key, n); !fresh) {
      throw InvalidInput(where(source, n) + "duplicate key '" + key + "' (first on line " +
                         std::to_string(it->second) + ")");
    }
    try {
      set_config_value(cfg, key, v.substr(eq + 1));
    } catch (const InvalidInput& e) {
      throw InvalidInput(where(source, n) + e.what());
    }
  }
}

inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  RunConfig cfg;
  apply_config_text(cfg, text, source);
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.string());
}

/// Every key with its current value, in registry order.
inline std::string config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : detail::keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

inline sim::Scene make_scene(const RunConfig& cfg) {
  sim::Scene s;
  s.trajectory = cfg.trajectory;
  if (!cfg.flat_terrain) {
    const sim::Path path(s.trajectory.waypoints, s.trajectory.closed, s.trajectory.corner_radius);
    s.terrain = sim::bump_field_along(path, cfg.bumps);
  }
  return s;
}

}  // namespace wheelslam::io
