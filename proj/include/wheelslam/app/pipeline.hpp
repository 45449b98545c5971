#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wheelslam/ins/wheel_ins.hpp"
#include "wheelslam/io/config.hpp"
#include "wheelslam/io/csv.hpp"
#include "wheelslam/io/metrics.hpp"
#include "wheelslam/sim/imu_synth.hpp"
#include "wheelslam/sim/noise.hpp"
#include "wheelslam/sim/scene.hpp"
#include "wheelslam/slam/wheel_slam.hpp"
#include "wheelslam/version.hpp"

namespace wheelslam::app {

using io::RunConfig;
using io::TrajectoryPoint;
using io::TruthPoint;

struct Simulation {
  sim::GroundTruth truth;
  std::vector<ImuSample> ideal;
  std::vector<ImuSample> imu;  // with sensor errors
};

/// Truth and error-free IMU for the configured scene. Seed independent.
inline Simulation simulate_ideal(const RunConfig& cfg) {
  const sim::Scene scene = io::make_scene(cfg);
  Simulation s;
  s.truth = sim::generate_truth(scene.trajectory, scene.terrain);
  s.ideal = sim::synthesize_imu(s.truth, cfg.ins.lever_arm);
  return s;
}

inline std::vector<ImuSample> corrupt(const std::vector<ImuSample>& ideal, const RunConfig& cfg) {
  sim::SensorErrorSpec e = cfg.sensor;
  e.seed = cfg.seed;
  return sim::corrupt(ideal, e);
}

inline Simulation simulate(const RunConfig& cfg) {
  Simulation s = simulate_ideal(cfg);
  s.imu = corrupt(s.ideal, cfg);
  return s;
}

/// Start of the last lap, in seconds.
inline double final_lap_start(const sim::GroundTruth& truth, int laps) {
  const double s0 = truth.lap_length * (laps - 1);
  for (const auto& p : truth.samples) {
    if (p.distance >= s0) return p.t;
  }
  return truth.samples.back().t;
}

struct InsRun {
  std::vector<TrajectoryPoint> trajectory;  // one pose per increment, plus the aligned start
  std::vector<OdometryIncrement> increments;
  Pose2D start;
  WheelInsStats stats;
};

inline InsRun run_ins(std::span<const ImuSample> imu, const RunConfig& cfg, bool health_checks = false) {
  const Vec3 p0(cfg.initial_x, cfg.initial_y, 0.0);
  auto [ins, next] = WheelIns::from_static(imu, cfg.ins, p0, deg2rad(cfg.initial_heading));
  ins.set_health_checks(health_checks);
  InsRun run;
  run.start = Pose2D{ins.position2d(), Angle(ins.heading())};
  run.trajectory.push_back({ins.state().timestamp, run.start.p.x(), run.start.p.y(), run.start.heading.rad()});
  for (std::size_t k = next; k < imu.size(); ++k) {
    const auto inc = ins.step(imu[k]);
    if (!inc) continue;
    run.increments.push_back(*inc);
    const Eigen::Vector2d p = ins.position2d();
    run.trajectory.push_back({inc->timestamp, p.x(), p.y(), ins.heading()});
  }
  run.stats = ins.stats();
  return run;
}

struct SlamRun {
  std::vector<TrajectoryPoint> trajectory;
  std::vector<LoopClosureEvent> events;
  TerrainGrid map;  // highest-weight particle
  SlamStats stats;
};

inline SlamRun run_slam(const InsRun& ins, const RunConfig& cfg, bool log_events = false) {
  SlamConfig sc = cfg.slam;
  sc.seed = cfg.seed;
  sc.log_events = log_events;
  WheelSlam slam(sc, ins.start);
  SlamRun run;
  run.trajectory.reserve(ins.increments.size() + 1);
  run.trajectory.push_back(ins.trajectory.front());
  for (const auto& inc : ins.increments) {
    const Pose2D p = slam.step(inc);
    run.trajectory.push_back({inc.timestamp, p.p.x(), p.p.y(), p.heading.rad()});
  }
  run.events = slam.events();
  run.map = slam.best_particle().map;
  run.stats = slam.stats();
  return run;
}

inline std::string events_csv(const std::vector<LoopClosureEvent>& events) {
  std::string out = "step,particle,n_c,rms,current_coefficient,weight_before,weight_after\n";
  for (const auto& e : events) {
    out += std::to_string(e.step) + "," + std::to_string(e.particle) + "," + std::to_string(e.n_c) + "," +
           io::format_double(e.rms) + "," + io::format_double(e.current_coefficient) + "," +
           io::format_double(e.weight_before) + "," + io::format_double(e.weight_after) + "\n";
  }
  return out;
}

struct SeedResult {
  std::uint64_t seed = 0;
  io::Metrics ins;
  io::Metrics slam;
  double ins_final_lap = 0.0;   // m, horizontal RMSE over the last lap
  double slam_final_lap = 0.0;
  double position_improvement = 0.0;  // %
  double heading_improvement = 0.0;   // %
  long weight_updates = 0;
  long resamples = 0;
};

/// Wheel-INS and Wheel-SLAM on one seed's IMU stream against shared truth.
inline SeedResult run_seed(const Simulation& sim, const std::vector<TruthPoint>& truth, RunConfig cfg,
                           std::uint64_t seed) {
  cfg.apply_seed(seed);
  const std::vector<ImuSample> imu = corrupt(sim.ideal, cfg);
  const InsRun ins = run_ins(imu, cfg);
  const SlamRun slam = run_slam(ins, cfg);
  SeedResult r;
  r.seed = seed;
  r.ins = io::evaluate(ins.trajectory, truth);
  r.slam = io::evaluate(slam.trajectory, truth);
  const double t_last = final_lap_start(sim.truth, cfg.trajectory.laps);
  r.ins_final_lap = io::evaluate(ins.trajectory, truth, t_last).position_rmse;
  r.slam_final_lap = io::evaluate(slam.trajectory, truth, t_last).position_rmse;
  r.position_improvement = io::improvement(r.ins.position_rmse, r.slam.position_rmse);
  r.heading_improvement = io::improvement(r.ins.heading_rmse, r.slam.heading_rmse);
  r.weight_updates = slam.stats.weight_updates;
  r.resamples = slam.stats.resamples;
  return r;
}

struct Comparison {
  std::vector<SeedResult> runs;
  io::Summary position_improvement;
  io::Summary heading_improvement;
  io::Summary ins_rmse;
  io::Summary slam_rmse;
  double win_fraction = 0.0;            // whole-run position RMSE
  double final_lap_win_fraction = 0.0;  // last-lap position RMSE
};

/// Paired Wheel-INS / Wheel-SLAM runs over `cfg.seeds` consecutive seeds
/// starting at `cfg.seed`. Seeds run on `workers` threads.
inline Comparison compare(const RunConfig& cfg, int workers = 1) {
  const Simulation sim = simulate_ideal(cfg);
  const std::vector<TruthPoint> truth = io::truth_points(sim.truth);
  Comparison c;
  c.runs.resize(static_cast<std::size_t>(cfg.seeds));
  RunConfig per_run = cfg;
  if (workers > 1) per_run.slam.workers = 1;
  parallel_for(c.runs.size(), workers, [&](std::size_t i) {
    c.runs[i] = run_seed(sim, truth, per_run, cfg.seed + i);
  });
  std::vector<double> pi, hi, ri, rs;
  int wins = 0, lap_wins = 0;
  for (const auto& r : c.runs) {
    pi.push_back(r.position_improvement);
    hi.push_back(r.heading_improvement);
    ri.push_back(r.ins.position_rmse);
    rs.push_back(r.slam.position_rmse);
    wins += r.slam.position_rmse < r.ins.position_rmse;
    lap_wins += r.slam_final_lap < r.ins_final_lap;
  }
  c.position_improvement = io::summarize(pi);
  c.heading_improvement = io::summarize(hi);
  c.ins_rmse = io::summarize(ri);
  c.slam_rmse = io::summarize(rs);
  c.win_fraction = static_cast<double>(wins) / c.runs.size();
  c.final_lap_win_fraction = static_cast<double>(lap_wins) / c.runs.size();
  return c;
}

inline nlohmann::ordered_json to_json(const Comparison& c) {
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& r : c.runs) {
    runs.push_back({{"seed", r.seed},
                    {"ins", io::to_json(r.ins)},
                    {"slam", io::to_json(r.slam)},
                    {"ins_final_lap_rmse_m", r.ins_final_lap},
                    {"slam_final_lap_rmse_m", r.slam_final_lap},
                    {"position_improvement_pct", r.position_improvement},
                    {"heading_improvement_pct", r.heading_improvement},
                    {"weight_updates", r.weight_updates},
                    {"resamples", r.resamples}});
  }
  return {{"seeds", c.runs.size()},
          {"position_improvement_pct", io::to_json(c.position_improvement)},
          {"heading_improvement_pct", io::to_json(c.heading_improvement)},
          {"ins_position_rmse_m", io::to_json(c.ins_rmse)},
          {"slam_position_rmse_m", io::to_json(c.slam_rmse)},
          {"win_fraction", c.win_fraction},
          {"final_lap_win_fraction", c.final_lap_win_fraction},
          {"runs", runs}};
}

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Collects files written by a command and records them, with the full
/// configuration, in `<command>.manifest.json`.
class OutputDir {
 public:
  OutputDir(std::filesystem::path dir, std::string command, const RunConfig& cfg)
      : dir_(std::move(dir)), command_(std::move(command)), config_(io::config_text(cfg)), seed_(cfg.seed) {}

  std::filesystem::path write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    io::atomic_write(path, content);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(content)));
    files_.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a64", hex}});
    return path;
  }

  void finish() {
    nlohmann::ordered_json m{{"tool", "wheelslam"},
                             {"version", kVersion},
                             {"command", command_},
                             {"seed", seed_},
                             {"config", config_},
                             {"outputs", files_}};
    io::atomic_write(dir_ / (command_ + ".manifest.json"), m.dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
  std::string command_;
  std::string config_;
  std::uint64_t seed_;
  nlohmann::ordered_json files_ = nlohmann::ordered_json::array();
};

}  // namespace wheelslam::app
