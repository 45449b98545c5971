#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wheelslam/app/pipeline.hpp"

namespace fs = std::filesystem;
using namespace wheelslam;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> particles;
  std::optional<int> workers;
  std::optional<int> seeds;
  bool no_loop_closure = false;
  std::vector<std::string> overrides;  // key=value
  std::string imu, truth, trajectory;
};

io::RunConfig resolve(const Options& o) {
  io::RunConfig cfg;
  if (!o.config.empty()) cfg = io::load_config(o.config);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidInput("--set expects key=value, got '" + kv + "'");
    io::set_config_value(cfg, io::trim(std::string_view(kv).substr(0, eq)), std::string_view(kv).substr(eq + 1));
  }
  if (o.seed) cfg.apply_seed(*o.seed);
  if (o.out) cfg.out_dir = *o.out;
  if (o.particles) cfg.slam.particles = *o.particles;
  if (o.workers) cfg.slam.workers = *o.workers;
  if (o.seeds) cfg.seeds = *o.seeds;
  if (o.no_loop_closure) cfg.slam.loop_closure = false;
  if (!o.imu.empty()) cfg.imu_path = o.imu;
  if (!o.truth.empty()) cfg.truth_path = o.truth;
  if (!o.trajectory.empty()) cfg.trajectory_path = o.trajectory;
  cfg.validate();
  return cfg;
}

fs::path input_or(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

void cmd_simulate(const io::RunConfig& cfg) {
  const auto s = app::simulate(cfg);
  app::OutputDir out(cfg.out_dir, "simulate", cfg);
  out.write("truth.csv", io::truth_csv(io::truth_points(s.truth)));
  out.write("imu.csv", io::imu_csv(s.imu));
  out.finish();
  std::printf("simulated %.1f s, %.1f m, %zu IMU samples -> %s\n", s.truth.samples.back().t,
              s.truth.samples.back().distance, s.imu.size(), cfg.out_dir.c_str());
}

void cmd_run_ins(const io::RunConfig& cfg) {
  const auto imu = io::read_imu_csv(input_or(cfg.imu_path, fs::path(cfg.out_dir) / "imu.csv"));
  const auto run = app::run_ins(imu, cfg);
  app::OutputDir out(cfg.out_dir, "run-ins", cfg);
  out.write("ins_trajectory.csv", io::trajectory_csv(run.trajectory));
  out.finish();
  std::printf("wheel-ins: %zu increments, %ld updates accepted, %ld rejected\n", run.increments.size(),
              run.stats.updates_accepted, run.stats.updates_rejected);
}

void cmd_run_slam(const io::RunConfig& cfg, bool map_only) {
  const auto imu = io::read_imu_csv(input_or(cfg.imu_path, fs::path(cfg.out_dir) / "imu.csv"));
  const auto ins = app::run_ins(imu, cfg);
  const auto slam = app::run_slam(ins, cfg, !map_only);
  app::OutputDir out(cfg.out_dir, map_only ? "export-map" : "run-slam", cfg);
  if (!map_only) {
    out.write("slam_trajectory.csv", io::trajectory_csv(slam.trajectory));
    out.write("loop_events.csv", app::events_csv(slam.events));
  }
  out.write("map.csv", io::map_csv(slam.map));
  out.finish();
  std::printf("wheel-slam: %ld steps, %ld weight updates, %ld resamples, %zu map cells\n", slam.stats.steps,
              slam.stats.weight_updates, slam.stats.resamples, slam.map.size());
}

void cmd_evaluate(const io::RunConfig& cfg) {
  const auto traj = io::read_trajectory_csv(input_or(cfg.trajectory_path, fs::path(cfg.out_dir) / "slam_trajectory.csv"));
  const auto truth = io::read_truth_csv(input_or(cfg.truth_path, fs::path(cfg.out_dir) / "truth.csv"));
  const auto m = io::evaluate(traj, truth);
  app::OutputDir out(cfg.out_dir, "evaluate", cfg);
  out.write("metrics.json", io::to_json(m).dump(2) + "\n");
  out.write("errors.csv", io::error_series_csv(m));
  out.finish();
  std::printf("%-28s %12s\n", "metric", "value");
  std::printf("%-28s %12zu\n", "epochs", m.series.size());
  std::printf("%-28s %12.4f\n", "horizontal RMSE (m)", m.position_rmse);
  std::printf("%-28s %12.4f\n", "heading RMSE (deg)", m.heading_rmse);
}

void cmd_compare(const io::RunConfig& cfg) {
  const auto c = app::compare(cfg, cfg.slam.workers);
  app::OutputDir out(cfg.out_dir, "compare", cfg);
  out.write("compare.json", app::to_json(c).dump(2) + "\n");
  std::string table = "seed,ins_rmse_m,slam_rmse_m,ins_heading_deg,slam_heading_deg,position_improvement_pct,"
                      "heading_improvement_pct\n";
  for (const auto& r : c.runs) {
    table += std::to_string(r.seed) + "," + io::format_double(r.ins.position_rmse) + "," +
             io::format_double(r.slam.position_rmse) + "," + io::format_double(r.ins.heading_rmse) + "," +
             io::format_double(r.slam.heading_rmse) + "," + io::format_double(r.position_improvement) + "," +
             io::format_double(r.heading_improvement) + "\n";
  }
  out.write("compare.csv", table);
  out.finish();
  std::printf("%6s %10s %10s %10s %10s\n", "seed", "ins [m]", "slam [m]", "pos [%]", "head [%]");
  for (const auto& r : c.runs) {
    std::printf("%6llu %10.3f %10.3f %10.1f %10.1f\n", static_cast<unsigned long long>(r.seed),
                r.ins.position_rmse, r.slam.position_rmse, r.position_improvement, r.heading_improvement);
  }
  std::printf("position improvement: median %.1f%% (q1 %.1f%%, q3 %.1f%%)\n", c.position_improvement.median,
              c.position_improvement.q1, c.position_improvement.q3);
  std::printf("heading improvement:  median %.1f%% (q1 %.1f%%, q3 %.1f%%)\n", c.heading_improvement.median,
              c.heading_improvement.q1, c.heading_improvement.q3);
  std::printf("wheel-slam better in %.0f%% of runs\n", 100.0 * c.win_fraction);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Wheel-IMU inertial navigation and terrain-matching SLAM"};
  cli.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--particles", o.particles, "number of particles");
    sub->add_flag("--no-loop-closure", o.no_loop_closure, "disable loop-closure weight updates");
    sub->add_option("--workers", o.workers, "worker threads");
    sub->add_option("--set", o.overrides, "override a configuration key (key=value)");
  };

  auto* simulate = cli.add_subcommand("simulate", "write truth and IMU CSVs for the configured scene");
  auto* run_ins = cli.add_subcommand("run-ins", "run Wheel-INS on an IMU CSV");
  auto* run_slam = cli.add_subcommand("run-slam", "run Wheel-SLAM on an IMU CSV");
  auto* evaluate = cli.add_subcommand("evaluate", "score a trajectory CSV against truth");
  auto* compare = cli.add_subcommand("compare", "paired Wheel-INS / Wheel-SLAM runs over many seeds");
  auto* export_map = cli.add_subcommand("export-map", "run Wheel-SLAM and export the terrain map only");
  for (auto* sub : {simulate, run_ins, run_slam, evaluate, compare, export_map}) common(sub);
  for (auto* sub : {run_ins, run_slam, export_map}) sub->add_option("--imu", o.imu, "IMU CSV (default OUT/imu.csv)");
  evaluate->add_option("--trajectory", o.trajectory, "trajectory CSV (default OUT/slam_trajectory.csv)");
  evaluate->add_option("--truth", o.truth, "truth CSV (default OUT/truth.csv)");
  compare->add_option("--seeds", o.seeds, "number of consecutive seeds");

  CLI11_PARSE(cli, argc, argv);

  try {
    const io::RunConfig cfg = resolve(o);
    if (simulate->parsed()) cmd_simulate(cfg);
    else if (run_ins->parsed()) cmd_run_ins(cfg);
    else if (run_slam->parsed()) cmd_run_slam(cfg, false);
    else if (evaluate->parsed()) cmd_evaluate(cfg);
    else if (compare->parsed()) cmd_compare(cfg);
    else if (export_map->parsed()) cmd_run_slam(cfg, true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
