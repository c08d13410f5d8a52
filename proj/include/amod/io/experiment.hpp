#pragma once

// Experiment harness: scenario preparation, controller runs, sweeps,
// solver benchmarks and report files.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/core/scenario.hpp"
#include "amod/core/trips.hpp"
#include "amod/forecast/forecast.hpp"
#include "amod/io/config.hpp"
#include "amod/io/synthetic.hpp"
#include "amod/io/trips.hpp"
#include "amod/mpc/mpc.hpp"
#include "amod/offline/planner.hpp"
#include "amod/sim/controllers.hpp"
#include "amod/sim/simulator.hpp"
#include "amod/sim/state.hpp"

namespace amod::io {

struct ExperimentConfig {
  // Scenario source: a trip log, or the synthetic generator when empty.
  std::string trips;
  std::vector<std::string> region_ids;  // optional filter for trip logs
  SyntheticParams synthetic;
  double delta_t_s = 300.0;
  double tick_s = 6.0;
  int day_steps = 288;

  std::int64_t fleet = 0;        // 0: offline minimum times (1 + fleet_margin)
  double fleet_margin = 0.15;
  std::string initial = "uniform";  // uniform | offline
  std::vector<std::string> controllers{"mpc-oracle", "mpc-historical", "tv-reactive", "reactive"};

  int horizon = 50;
  int t_forward = 24;
  int t_back = 0;
  int period = 0;                // 0: day_steps
  int training_days = 15;
  std::string forecast_file;
  ForecastRounding rounding = ForecastRounding::kCumulative;

  CostParams mpc_costs{0.0, 1.0, 1e4, std::nullopt};

  std::int64_t node_limit = 100000;
  double time_limit_s = 120.0;
  double drain_s = 3600.0;
  std::uint64_t seed = 1;
  int threads = 0;               // 0: hardware concurrency

  std::vector<int> sweep_t_forward{3, 6, 12, 24, 48};
  std::string sweep_controller = "mpc-oracle";
  int bench_epochs = 20;
  double bench_start_h = 7.0;

  std::string output = "out";
};

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "trips", "regions", "delta_t", "tick", "day_steps", "fleet", "fleet_margin", "initial", "controllers",
      "horizon", "t_forward", "t_back", "period", "training_days", "forecast_file", "forecast_rounding", "idle_cost", "move_cost",
      "drop_cost", "wait_cost", "node_limit", "time_limit", "drain", "seed", "threads", "sweep_t_forward",
      "sweep_controller", "bench_epochs", "bench_start_h", "output", "synth.regions", "synth.centre_regions",
      "synth.trips_per_day", "synth.seed", "synth.day_steps", "synth.align", "synth.asymmetry",
      "synth.peak_share", "synth.peak_width_h", "synth.morning_peak_h", "synth.evening_peak_h", "synth.area_m",
      "synth.speed_m_s", "synth.base_travel_s"};
  return keys;
}

inline ExperimentConfig experiment_config(const KeyValueConfig& kv) {
  kv.check_known(known_config_keys());
  ExperimentConfig c;
  c.trips = kv.get("trips", "");
  c.region_ids = kv.get_list("regions", "");
  c.delta_t_s = kv.get_double("delta_t", c.delta_t_s);
  c.tick_s = kv.get_double("tick", c.tick_s);
  c.day_steps = static_cast<int>(kv.get_int("day_steps", c.day_steps));
  c.fleet = kv.get_int("fleet", c.fleet);
  c.fleet_margin = kv.get_double("fleet_margin", c.fleet_margin);
  c.initial = kv.get("initial", c.initial);
  if (kv.has("controllers")) c.controllers = kv.get_list("controllers", "");
  c.horizon = static_cast<int>(kv.get_int("horizon", c.horizon));
  c.t_forward = static_cast<int>(kv.get_int("t_forward", c.t_forward));
  c.t_back = static_cast<int>(kv.get_int("t_back", c.t_back));
  c.period = static_cast<int>(kv.get_int("period", c.period));
  c.training_days = static_cast<int>(kv.get_int("training_days", c.training_days));
  c.forecast_file = kv.get("forecast_file", "");
  c.rounding = parse_forecast_rounding(kv.get("forecast_rounding", "cumulative"));
  c.mpc_costs.idle_per_step = kv.get_double("idle_cost", c.mpc_costs.idle_per_step);
  c.mpc_costs.move_per_step = kv.get_double("move_cost", c.mpc_costs.move_per_step);
  c.mpc_costs.drop = kv.get_double("drop_cost", c.mpc_costs.drop);
  if (kv.has("wait_cost")) c.mpc_costs.wait_per_step = kv.get_double("wait_cost", 0.0);
  c.node_limit = kv.get_int("node_limit", c.node_limit);
  c.time_limit_s = kv.get_double("time_limit", c.time_limit_s);
  c.drain_s = kv.get_double("drain", c.drain_s);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
  c.threads = static_cast<int>(kv.get_int("threads", c.threads));
  if (kv.has("sweep_t_forward")) {
    c.sweep_t_forward.clear();
    for (const auto& s : kv.get_list("sweep_t_forward", "")) c.sweep_t_forward.push_back(static_cast<int>(parse_int(s, "sweep_t_forward")));
  }
  c.sweep_controller = kv.get("sweep_controller", c.sweep_controller);
  c.bench_epochs = static_cast<int>(kv.get_int("bench_epochs", c.bench_epochs));
  c.bench_start_h = kv.get_double("bench_start_h", c.bench_start_h);
  c.output = kv.get("output", c.output);

  auto& s = c.synthetic;
  s.regions = static_cast<int>(kv.get_int("synth.regions", s.regions));
  s.centre_regions = static_cast<int>(kv.get_int("synth.centre_regions", s.centre_regions));
  s.trips_per_day = kv.get_double("synth.trips_per_day", s.trips_per_day);
  s.seed = static_cast<std::uint64_t>(kv.get_int("synth.seed", static_cast<long long>(s.seed)));
  s.day_steps = static_cast<int>(kv.get_int("synth.day_steps", c.day_steps));
  s.align_to_interval = kv.get_bool("synth.align", s.align_to_interval);
  s.asymmetry = kv.get_double("synth.asymmetry", s.asymmetry);
  s.peak_share = kv.get_double("synth.peak_share", s.peak_share);
  s.peak_width_h = kv.get_double("synth.peak_width_h", s.peak_width_h);
  s.morning_peak_h = kv.get_double("synth.morning_peak_h", s.morning_peak_h);
  s.evening_peak_h = kv.get_double("synth.evening_peak_h", s.evening_peak_h);
  s.area_m = kv.get_double("synth.area_m", s.area_m);
  s.speed_m_s = kv.get_double("synth.speed_m_s", s.speed_m_s);
  s.base_travel_s = kv.get_double("synth.base_travel_s", s.base_travel_s);
  s.delta_t_s = c.delta_t_s;
  s.tick_s = c.tick_s;
  if (c.trips.empty()) c.day_steps = s.day_steps;

  if (c.horizon < 1) throw InputError("horizon must be at least 1");
  if (c.t_forward < 1 || c.t_forward > c.horizon) throw InputError("t_forward must lie in [1, horizon]");
  if (c.fleet < 0) throw InputError("fleet must be nonnegative");
  if (c.initial != "offline" && c.initial != "uniform") throw InputError("initial must be offline or uniform");
  if (!c.trips.empty() && !std::filesystem::exists(c.trips)) throw InputError("trip log " + c.trips + " does not exist");
  if (!c.forecast_file.empty() && !std::filesystem::exists(c.forecast_file)) {
    throw InputError("forecast file " + c.forecast_file + " does not exist");
  }
  return c;
}

// Flat key = value dump that experiment_config reads back unchanged.
inline std::string config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto join = [](const auto& items) {
    std::ostringstream s;
    for (std::size_t k = 0; k < items.size(); ++k) s << (k ? "," : "") << items[k];
    return s.str();
  };
  if (!c.trips.empty()) os << "trips = " << c.trips << '\n';
  if (!c.region_ids.empty()) os << "regions = " << join(c.region_ids) << '\n';
  os << "delta_t = " << c.delta_t_s << "\ntick = " << c.tick_s << "\nday_steps = " << c.day_steps << '\n';
  os << "fleet = " << c.fleet << "\nfleet_margin = " << c.fleet_margin << "\ninitial = " << c.initial << '\n';
  os << "controllers = " << join(c.controllers) << '\n';
  os << "horizon = " << c.horizon << "\nt_forward = " << c.t_forward << "\nt_back = " << c.t_back << '\n';
  os << "period = " << c.period << "\ntraining_days = " << c.training_days << '\n';
  if (!c.forecast_file.empty()) os << "forecast_file = " << c.forecast_file << '\n';
  os << "forecast_rounding = " << (c.rounding == ForecastRounding::kPerCell ? "per-cell" : "cumulative") << '\n';
  os << "idle_cost = " << c.mpc_costs.idle_per_step << "\nmove_cost = " << c.mpc_costs.move_per_step
     << "\ndrop_cost = " << c.mpc_costs.drop << '\n';
  if (c.mpc_costs.wait_per_step) os << "wait_cost = " << *c.mpc_costs.wait_per_step << '\n';
  os << "node_limit = " << c.node_limit << "\ntime_limit = " << c.time_limit_s << "\ndrain = " << c.drain_s << '\n';
  os << "seed = " << c.seed << "\nthreads = " << c.threads << '\n';
  os << "sweep_t_forward = " << join(c.sweep_t_forward) << "\nsweep_controller = " << c.sweep_controller << '\n';
  os << "bench_epochs = " << c.bench_epochs << "\nbench_start_h = " << c.bench_start_h << '\n';
  os << "output = " << c.output << '\n';
  if (c.trips.empty()) {
    const auto& s = c.synthetic;
    os << "synth.regions = " << s.regions << "\nsynth.centre_regions = " << s.centre_regions
       << "\nsynth.trips_per_day = " << s.trips_per_day << "\nsynth.seed = " << s.seed
       << "\nsynth.day_steps = " << s.day_steps << "\nsynth.align = " << (s.align_to_interval ? "true" : "false")
       << "\nsynth.asymmetry = " << s.asymmetry << "\nsynth.peak_share = " << s.peak_share
       << "\nsynth.peak_width_h = " << s.peak_width_h << "\nsynth.morning_peak_h = " << s.morning_peak_h
       << "\nsynth.evening_peak_h = " << s.evening_peak_h << "\nsynth.area_m = " << s.area_m
       << "\nsynth.speed_m_s = " << s.speed_m_s << "\nsynth.base_travel_s = " << s.base_travel_s << '\n';
  }
  return os.str();
}

// Everything derived from the config before any controller runs.
struct Experiment {
  ExperimentConfig config;
  Scenario offline;             // ownership costs, used for fleet sizing
  Scenario mpc;                 // controller costs
  TripLog trips;
  DemandSet training;           // historical-average input, absolute steps
  int training_days = 0;
  RebalancingPlan offline_plan;
  std::int64_t fleet = 0;
  std::vector<std::int64_t> initial;
  std::string notes;            // data preparation remarks
};

inline Scenario with_costs(Scenario s, const CostParams& params, int planning_horizon) {
  s.costs = CostModel::proportional(s.travel, params, planning_horizon);
  return s;
}

inline Experiment prepare(const ExperimentConfig& cfg) {
  Experiment e;
  e.config = cfg;
  Scenario base;
  std::ostringstream notes;
  if (cfg.trips.empty()) {
    SyntheticCity city = generate_synthetic(cfg.synthetic);
    base = std::move(city.scenario);
    e.trips = std::move(city.trips);
    e.training_days = cfg.training_days;
    if (cfg.training_days > 0) e.training = training_demand(cfg.synthetic, generate_city(cfg.synthetic), cfg.training_days);
  } else {
    RegionSet regions = cfg.region_ids.empty() ? regions_in_log(cfg.trips) : RegionSet(cfg.region_ids);
    if (regions.size() < 1 || !regions.unique()) throw InputError("region set must be nonempty and unique");
    e.trips = load_trips(cfg.trips, regions);
    if (e.trips.dropped > 0) notes << "dropped " << e.trips.dropped << " trips outside the region set; ";
    base.regions = std::move(regions);
    base.grid = TimeGrid{cfg.delta_t_s, cfg.day_steps, cfg.tick_s};
    auto est = build_travel_matrix(e.trips, base.regions.size(), base.grid);
    if (est.composed_pairs + est.filled_pairs > 0) {
      notes << "travel pairs observed " << est.observed_pairs << ", composed " << est.composed_pairs
            << ", filled with the mean " << est.filled_pairs << "; ";
    }
    base.travel = std::move(est.matrix);
    base.demand = demand_from_trips(e.trips, base.grid);
    // Training on the replayed day itself.
    e.training = base.demand;
    e.training_days = 1;
  }
  e.offline = with_costs(base, CostParams{1.0, 1.0, 1e4, std::nullopt}, base.grid.horizon);
  e.mpc = with_costs(base, cfg.mpc_costs, cfg.horizon);
  if (auto problems = validate(e.offline); !problems.empty()) throw InputError("scenario: " + problems.front());

  e.offline_plan = solve_offline(e.offline);
  e.fleet = cfg.fleet > 0 ? cfg.fleet
                          : static_cast<std::int64_t>(std::ceil(static_cast<double>(e.offline_plan.fleet_size_m) *
                                                                (1.0 + cfg.fleet_margin) - 1e-9));
  e.initial = cfg.initial == "offline" && e.fleet >= e.offline_plan.fleet_size_m
                  ? sim::offline_distribution(e.offline_plan, e.fleet, cfg.seed)
                  : sim::uniform_distribution(e.fleet, base.regions.size(), cfg.seed);
  e.notes = notes.str();
  return e;
}

inline std::unique_ptr<sim::Controller> make_controller(const Experiment& e, const std::string& name, int t_forward) {
  const auto& cfg = e.config;
  MpcSettings settings{cfg.horizon, true};
  opt::MilpLimits limits;
  limits.node_limit = cfg.node_limit;
  limits.time_limit_s = cfg.time_limit_s;
  ForecastSources sources;
  sources.regions = e.mpc.region_count();
  sources.region_set = &e.mpc.regions;
  sources.truth = &e.mpc.demand;
  sources.training = &e.training;
  sources.training_days = std::max(e.training_days, 1);
  ForecasterOptions opts;
  opts.t_forward = t_forward;
  opts.t_back = cfg.t_back;
  opts.period = cfg.period > 0 ? cfg.period : cfg.day_steps;
  opts.forecast_file = cfg.forecast_file;
  opts.rounding = cfg.rounding;
  if (name == "reactive") return std::make_unique<sim::ReactiveController>(e.mpc);
  if (name == "none") return std::make_unique<sim::IdleController>();
  if (name == "mpc-oracle") {
    opts.kind = ForecasterKind::kOracle;
  } else if (name == "mpc-historical") {
    opts.kind = ForecasterKind::kHistoricalAverage;
  } else if (name == "mpc-file") {
    opts.kind = ForecasterKind::kFile;
  } else if (name == "tv-reactive") {
    opts.kind = ForecasterKind::kZero;
  } else {
    throw InputError("unknown controller '" + name + "'");
  }
  return std::make_unique<sim::MpcController>(e.mpc, make_forecaster(opts, sources), settings, limits, name);
}

inline sim::SimConfig sim_config(const Experiment& e) {
  sim::SimConfig sc;
  sc.tick_s = e.config.tick_s;
  sc.epoch_s = e.config.delta_t_s;
  sc.drain_s = e.config.drain_s;
  sc.initial = e.initial;
  sc.seed = e.config.seed;
  return sc;
}

struct RunResult {
  std::string controller;
  int t_forward = 0;
  sim::MetricsLog log;
  std::vector<sim::SolveRecord> solves;
};

inline RunResult run_controller(const Experiment& e, const std::string& name, int t_forward,
                                std::optional<sim::SimConfig> override_config = std::nullopt) {
  auto controller = make_controller(e, name, t_forward);
  sim::Simulator simulator(e.mpc, e.trips, override_config ? *override_config : sim_config(e));
  RunResult r;
  r.controller = name;
  r.t_forward = t_forward;
  r.log = simulator.run(*controller);
  r.solves = controller->solves();
  return r;
}

// Runs jobs on up to `threads` workers; results keep the job order.
template <typename Job>
auto run_parallel(const std::vector<Job>& jobs, int threads) {
  using Result = decltype(jobs.front()());
  std::vector<Result> results(jobs.size());
  const auto workers = static_cast<std::size_t>(
      threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency()));
  for (std::size_t begin = 0; begin < jobs.size(); begin += workers) {
    std::vector<std::future<Result>> batch;
    const auto end = std::min(jobs.size(), begin + workers);
    for (std::size_t k = begin; k < end; ++k) batch.push_back(std::async(std::launch::async, jobs[k]));
    for (std::size_t k = begin; k < end; ++k) results[k] = batch[k - begin].get();
  }
  return results;
}

inline constexpr const char* kSummaryHeader =
    "controller,mean_wait_s,median_wait_s,p95_wait_s,total_reb_tasks,total_reb_vehicle_steps";

inline void write_summary_row(std::ostream& os, const std::string& name, const sim::MetricsLog& log) {
  const auto w = sim::summarize_waits(log.waits_s);
  os << name << ',' << std::setprecision(10) << w.mean << ',' << w.median << ',' << w.p95 << ','
     << log.total_reb_tasks << ',' << log.total_reb_vehicle_steps << '\n';
}

inline void write_series(const std::string& path, const sim::MetricsLog& log, double tick_s) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path);
  os << "tick,time_s,waiting,serving,rebalancing,idle,tasks_issued,arrived,delivered\n";
  for (std::size_t k = 0; k < log.ticks(); ++k) {
    const auto tick = log.first_tick + static_cast<sim::Tick>(k);
    os << tick << ',' << static_cast<double>(tick) * tick_s << ',' << log.waiting[k] << ',' << log.serving[k] << ','
       << log.rebalancing[k] << ',' << log.idle[k] << ',' << log.tasks_issued[k] << ',' << log.arrived[k] << ','
       << log.delivered[k] << '\n';
  }
}

inline void write_solves(const std::string& path, const std::vector<sim::SolveRecord>& solves) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path);
  os << "epoch,seconds,nodes,iterations,optimal,fallback\n";
  for (const auto& s : solves) {
    os << s.epoch << ',' << std::setprecision(6) << s.seconds << ',' << s.nodes << ',' << s.iterations << ','
       << (s.optimal ? 1 : 0) << ',' << (s.fallback ? 1 : 0) << '\n';
  }
}

struct SolveTimes {
  double mean = 0.0, median = 0.0, max = 0.0;
  std::int64_t fallbacks = 0;
};

inline SolveTimes solve_times(const std::vector<sim::SolveRecord>& solves) {
  SolveTimes t;
  std::vector<double> s;
  for (const auto& r : solves) {
    s.push_back(r.seconds);
    if (r.fallback) ++t.fallbacks;
  }
  if (s.empty()) return t;
  const auto w = sim::summarize_waits(s);
  t.mean = w.mean;
  t.median = w.median;
  t.max = *std::max_element(s.begin(), s.end());
  return t;
}

struct ExperimentReport {
  std::vector<RunResult> runs;
  std::int64_t fallbacks = 0;
};

inline void write_manifest(const Experiment& e, const std::string& command, const std::vector<RunResult>& runs) {
  const auto path = std::filesystem::path(e.config.output) / "manifest.txt";
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << "# regenerate with: amod " << command << " --config manifest.txt\n";
  os << config_text(e.config);
  os << "info.command = " << command << '\n';
  os << "info.regions = " << e.mpc.region_count() << '\n';
  os << "info.trips = " << e.trips.trips.size() << '\n';
  os << "info.trips_dropped = " << e.trips.dropped << '\n';
  os << "info.offline_fleet = " << e.offline_plan.fleet_size_m << '\n';
  os << "info.fleet = " << e.fleet << '\n';
  if (!e.notes.empty()) os << "info.notes = " << e.notes << '\n';
  for (const auto& r : runs) {
    const auto t = solve_times(r.solves);
    const std::string key = "info." + r.controller + (runs.size() > 1 && r.t_forward != e.config.t_forward
                                                          ? "@" + std::to_string(r.t_forward)
                                                          : "");
    os << key << ".solves = " << r.solves.size() << '\n';
    os << std::setprecision(6) << key << ".solve_mean_s = " << t.mean << '\n';
    os << key << ".solve_median_s = " << t.median << '\n';
    os << key << ".solve_max_s = " << t.max << '\n';
    os << key << ".fallbacks = " << t.fallbacks << '\n';
    os << key << ".unserved_at_end = " << r.log.unserved_at_end << '\n';
  }
}

// Controllers side by side: summary.csv, per-controller series and solves.
inline ExperimentReport run_experiment(const Experiment& e) {
  std::filesystem::create_directories(e.config.output);
  std::vector<std::function<RunResult()>> jobs;
  for (const auto& name : e.config.controllers) {
    jobs.emplace_back([&e, name] { return run_controller(e, name, e.config.t_forward); });
  }
  ExperimentReport report;
  report.runs = run_parallel(jobs, e.config.threads);
  const auto dir = std::filesystem::path(e.config.output);
  std::ofstream summary(dir / "summary.csv");
  summary << kSummaryHeader << '\n';
  for (const auto& r : report.runs) {
    write_summary_row(summary, r.controller, r.log);
    write_series((dir / ("series_" + r.controller + ".csv")).string(), r.log, e.config.tick_s);
    write_solves((dir / ("solves_" + r.controller + ".csv")).string(), r.solves);
    report.fallbacks += r.log.solve_fallbacks;
  }
  write_manifest(e, "simulate", report.runs);
  return report;
}

// Mean wait per forecast horizon for one controller: sweep.csv.
inline ExperimentReport run_sweep(const Experiment& e) {
  std::filesystem::create_directories(e.config.output);
  std::vector<std::function<RunResult()>> jobs;
  for (int tf : e.config.sweep_t_forward) {
    if (tf < 1 || tf > e.config.horizon) throw InputError("sweep t_forward values must lie in [1, horizon]");
    jobs.emplace_back([&e, tf] { return run_controller(e, e.config.sweep_controller, tf); });
  }
  ExperimentReport report;
  report.runs = run_parallel(jobs, e.config.threads);
  std::ofstream os(std::filesystem::path(e.config.output) / "sweep.csv");
  os << "t_forward," << kSummaryHeader << '\n';
  for (const auto& r : report.runs) {
    os << r.t_forward << ',';
    write_summary_row(os, r.controller, r.log);
    report.fallbacks += r.log.solve_fallbacks;
  }
  write_manifest(e, "sweep", report.runs);
  return report;
}

// Solver timing over consecutive control epochs: bench.csv.
inline ExperimentReport run_bench(const Experiment& e) {
  std::filesystem::create_directories(e.config.output);
  auto sc = sim_config(e);
  sc.start_s = std::floor(e.config.bench_start_h * 3600.0 / e.config.delta_t_s) * e.config.delta_t_s;
  sc.end_s = sc.start_s + e.config.bench_epochs * e.config.delta_t_s;
  ExperimentReport report;
  report.runs.push_back(run_controller(e, "mpc-oracle", e.config.t_forward, sc));
  const auto& r = report.runs.front();
  write_solves((std::filesystem::path(e.config.output) / "bench.csv").string(), r.solves);
  report.fallbacks = r.log.solve_fallbacks;
  write_manifest(e, "bench", report.runs);
  return report;
}

}  // namespace amod::io
