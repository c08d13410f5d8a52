// amod: offline fleet sizing, controller simulation, sweeps and benchmarks.
//
// Every subcommand reads the same flat key = value config; flags named after
// config keys override the file.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "amod/amod.hpp"

namespace {

using amod::io::Experiment;
using amod::io::KeyValueConfig;

struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "key = value config file");
  for (const auto& key : amod::io::known_config_keys()) {
    cmd->add_option("--" + key, o.values[key], "config key " + key);
  }
}

KeyValueConfig load(CLI::App* cmd, const Overrides& o) {
  KeyValueConfig kv;
  if (!o.config_path.empty()) kv.load(o.config_path);
  for (const auto& [key, value] : o.values) {
    if (cmd->count("--" + key) > 0) kv.set(key, value);
  }
  return kv;
}

void write_plan(const Experiment& e) {
  std::filesystem::create_directories(e.config.output);
  const auto path = std::filesystem::path(e.config.output) / "plan.csv";
  std::ofstream os(path);
  if (!os) throw amod::InputError("cannot write " + path.string());
  amod::write_plan_csv(os, e.offline_plan, e.offline.regions);
}

int fleet_size(const Experiment& e) {
  write_plan(e);
  std::cout << e.offline_plan.fleet_size_m << '\n';
  return 0;
}

int solve_offline(const Experiment& e) {
  write_plan(e);
  const auto& p = e.offline_plan;
  std::cout << "fleet_size " << p.fleet_size_m << '\n'
            << "objective " << p.objective << '\n'
            << "plan " << (std::filesystem::path(e.config.output) / "plan.csv").string() << '\n';
  return 0;
}

int report(const amod::io::ExperimentReport& r, const std::string& file, const Experiment& e) {
  for (const auto& run : r.runs) {
    const auto w = amod::sim::summarize_waits(run.log.waits_s);
    std::cout << run.controller;
    if (file == "sweep.csv") std::cout << " t_forward=" << run.t_forward;
    std::cout << " mean_wait_s=" << w.mean << " median_wait_s=" << w.median << " p95_wait_s=" << w.p95;
    if (!run.solves.empty()) {
      const auto t = amod::io::solve_times(run.solves);
      std::cout << " solve_median_s=" << t.median << " solve_max_s=" << t.max;
    }
    std::cout << '\n';
  }
  std::cout << "wrote " << (std::filesystem::path(e.config.output) / file).string() << '\n';
  if (r.fallbacks > 0) {
    std::cerr << "warning: " << r.fallbacks << " solves ran out of budget without an incumbent\n";
    return 2;
  }
  return 0;
}

int gen_synth(const amod::io::ExperimentConfig& cfg) {
  const auto city = amod::io::generate_synthetic(cfg.synthetic);
  std::filesystem::create_directories(cfg.output);
  const auto dir = std::filesystem::path(cfg.output);
  amod::io::save_trips((dir / "trips.csv").string(), city.trips, city.scenario.regions);
  // Oracle forecasts in file form, one block per epoch.
  std::map<amod::Step, amod::Forecast> blocks;
  const auto epochs = static_cast<amod::Step>(
      std::ceil((city.scenario.grid.horizon * cfg.delta_t_s + cfg.drain_s) / cfg.delta_t_s - 1e-9));
  for (amod::Step t0 = 0; t0 < epochs; ++t0) {
    blocks[t0] = amod::truth_window(city.scenario.demand, city.scenario.region_count(), t0, cfg.t_forward);
  }
  std::ofstream fc(dir / "forecast_oracle.csv");
  amod::write_forecast_csv(fc, blocks, city.scenario.regions);
  std::cout << city.trips.trips.size() << " trips over " << city.scenario.region_count() << " regions\n"
            << "wrote " << (dir / "trips.csv").string() << " and " << (dir / "forecast_oracle.csv").string() << '\n';
  return 0;
}

int validate(const amod::io::ExperimentConfig& cfg) {
  const auto e = amod::io::prepare(cfg);
  const auto problems = amod::validate(e.mpc);
  for (const auto& p : problems) std::cerr << "invalid: " << p << '\n';
  if (!problems.empty()) return 1;
  std::cout << "ok: " << e.mpc.region_count() << " regions, " << e.trips.trips.size() << " trips";
  if (e.trips.dropped > 0) std::cout << " (" << e.trips.dropped << " dropped)";
  std::cout << ", offline fleet " << e.offline_plan.fleet_size_m << '\n';
  if (!e.notes.empty()) std::cout << e.notes << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fleet rebalancing for mobility-on-demand: planning, simulation and benchmarks"};
  app.require_subcommand(1);
  std::map<std::string, Overrides> overrides;
  std::map<std::string, CLI::App*> commands;
  const std::pair<const char*, const char*> commands_help[] = {
      {"fleet-size", "minimum fleet serving the demand without waiting; writes plan.csv"},
      {"solve-offline", "optimal offline rebalancing plan; writes plan.csv"},
      {"simulate", "run the configured controllers; writes summary.csv, series and solves"},
      {"sweep", "mean wait over forecast horizons; writes sweep.csv"},
      {"bench", "solver timing over consecutive epochs; writes bench.csv"},
      {"gen-synth", "write a synthetic trip log and its oracle forecast file"},
      {"validate", "load and check the scenario without running anything"},
  };
  for (const auto& [name, help] : commands_help) {
    commands[name] = app.add_subcommand(name, help);
    add_config_flags(commands[name], overrides[name]);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [name, cmd] : commands) {
      if (!cmd->parsed()) continue;
      const auto cfg = amod::io::experiment_config(load(cmd, overrides[name]));
      if (name == "gen-synth") return gen_synth(cfg);
      if (name == "validate") return validate(cfg);
      const auto e = amod::io::prepare(cfg);
      if (name == "fleet-size") return fleet_size(e);
      if (name == "solve-offline") return solve_offline(e);
      if (name == "simulate") return report(amod::io::run_experiment(e), "summary.csv", e);
      if (name == "sweep") return report(amod::io::run_sweep(e), "sweep.csv", e);
      if (name == "bench") return report(amod::io::run_bench(e), "bench.csv", e);
    }
  } catch (const amod::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
