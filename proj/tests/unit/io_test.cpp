#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "amod/io/config.hpp"
#include "amod/io/experiment.hpp"
#include "amod/io/synthetic.hpp"
#include "amod/io/trips.hpp"

using namespace amod;
using namespace amod::io;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("amod_io_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Trips, ReadSortsAndDropsUnknownRegions) {
  std::istringstream in(
      "request_time,origin,destination,duration_s\n"
      "600,b,a,120\n"
      "30,a,b,300.5\n"
      "40,a,zz,60\n"
      "\n");
  const auto log = read_trips(in, RegionSet({"a", "b"}));
  ASSERT_EQ(log.trips.size(), 2u);
  EXPECT_EQ(log.dropped, 1u);
  EXPECT_EQ(log.trips[0], (Trip{30.0, 0, 1, 300.5}));
  EXPECT_EQ(log.trips[1], (Trip{600.0, 1, 0, 120.0}));
}

TEST(Trips, RejectsMalformedRows) {
  const RegionSet regions({"a", "b"});
  auto parse = [&](const std::string& body) {
    std::istringstream in("request_time,origin,destination,duration_s\n" + body);
    return read_trips(in, regions);
  };
  EXPECT_THROW(parse("-5,a,b,10\n"), InputError);
  EXPECT_THROW(parse("5,a,b,0\n"), InputError);
  EXPECT_THROW(parse("5,a,b\n"), InputError);
  EXPECT_THROW(parse("x,a,b,10\n"), InputError);
  std::istringstream bad_header("time,o,d\n");
  EXPECT_THROW(read_trips(bad_header, regions), InputError);
}

TEST(Trips, WriteReadRoundTrip) {
  const RegionSet regions({"p", "q", "r"});
  TripLog log;
  log.trips = {{0.0, 0, 2, 90.0}, {60.0, 2, 1, 400.0}, {61.0, 1, 1, 30.0}};
  std::stringstream ss;
  write_trips(ss, log, regions);
  EXPECT_EQ(read_trips(ss, regions).trips, log.trips);
}

TEST(TravelMatrix, MeanThenCeil) {
  const TimeGrid grid{300.0, 288, 6.0};
  TripLog log;
  log.trips = {{0.0, 0, 1, 300.0}, {0.0, 0, 1, 900.0}, {0.0, 1, 0, 200.0}};
  const auto est = build_travel_matrix(log, 2, grid);
  EXPECT_EQ(est.matrix(0, 1, 1), 2);
  EXPECT_EQ(est.matrix(1, 0, 1), 1);
  EXPECT_EQ(est.matrix(0, 0, 1), 1);
  EXPECT_EQ(est.observed_pairs, 2);
  EXPECT_DOUBLE_EQ(est.matrix.seconds(0, 1, 300.0), 600.0);
}

TEST(TravelMatrix, GapsComposedThenFilled) {
  const TimeGrid grid{300.0, 288, 6.0};
  TripLog log;
  log.trips = {{0.0, 0, 1, 300.0}, {0.0, 1, 2, 600.0}};
  const auto est = build_travel_matrix(log, 4, grid);
  EXPECT_EQ(est.matrix(0, 2, 1), 3);
  EXPECT_EQ(est.composed_pairs, 1);
  // global mean 450 s
  EXPECT_EQ(est.matrix(2, 0, 1), 2);
  EXPECT_EQ(est.matrix(3, 1, 1), 2);
  EXPECT_EQ(est.observed_pairs + est.composed_pairs + est.filled_pairs, 12);
}

TEST(Synthetic, ZeroIntensityGivesNoTrips) {
  SyntheticParams params;
  params.trips_per_day = 0.0;
  EXPECT_TRUE(generate_synthetic(params).trips.trips.empty());
}

TEST(Synthetic, ExpectedVolumeAndDeterminism) {
  SyntheticParams params;
  params.regions = 6;
  params.trips_per_day = 2000.0;
  const auto a = generate_synthetic(params);
  const auto b = generate_synthetic(params);
  EXPECT_EQ(a.trips.trips, b.trips.trips);
  const auto n = static_cast<double>(a.trips.trips.size());
  EXPECT_NEAR(n, 2000.0, 5.0 * std::sqrt(2000.0));
  EXPECT_EQ(a.scenario.demand.total(), static_cast<long long>(a.trips.trips.size()));
  EXPECT_TRUE(validate(a.scenario).empty());
  params.seed = 2;
  EXPECT_NE(generate_synthetic(params).trips.trips, a.trips.trips);
}

TEST(Synthetic, SymmetricWithoutAsymmetry) {
  SyntheticParams params;
  params.regions = 4;
  params.asymmetry = 0.5;
  const auto city = generate_city(params);
  const auto rate = intensity(params, city.is_centre);
  const int n = params.regions;
  for (int t = 0; t < params.day_steps; t += 7) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        EXPECT_NEAR(rate[(static_cast<std::size_t>(t) * n + i) * n + j],
                    rate[(static_cast<std::size_t>(t) * n + j) * n + i], 1e-12);
      }
    }
  }
}

TEST(Synthetic, AlignedRequestsSitOnIntervalStarts) {
  SyntheticParams params;
  params.regions = 3;
  params.trips_per_day = 300.0;
  params.align_to_interval = true;
  for (const auto& t : generate_synthetic(params).trips.trips) {
    EXPECT_DOUBLE_EQ(std::fmod(t.request_time, params.delta_t_s), 0.0);
  }
}

TEST(Synthetic, InvalidParametersRejected) {
  SyntheticParams params;
  params.peak_share = 1.5;
  EXPECT_THROW(generate_city(params), InputError);
}

TEST(Config, ParseCommentsAndOverrides) {
  KeyValueConfig kv;
  std::istringstream in("# comment\nhorizon = 30  # trailing\n\nt_forward=12\ncontrollers = reactive, mpc-oracle\n");
  kv.parse(in);
  kv.set("horizon", "40");
  const auto c = experiment_config(kv);
  EXPECT_EQ(c.horizon, 40);
  EXPECT_EQ(c.t_forward, 12);
  EXPECT_EQ(c.controllers, (std::vector<std::string>{"reactive", "mpc-oracle"}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto build = [](const std::string& text) {
    KeyValueConfig kv;
    std::istringstream in(text);
    kv.parse(in);
    return experiment_config(kv);
  };
  EXPECT_THROW(build("horizon_steps = 4\n"), InputError);
  EXPECT_THROW(build("horizon = ten\n"), InputError);
  EXPECT_THROW(build("horizon = 10\nt_forward = 11\n"), InputError);
  EXPECT_THROW(build("initial = random\n"), InputError);
  EXPECT_THROW(build("just a line\n"), InputError);
  EXPECT_THROW(build("synth.align = maybe\n"), InputError);
  EXPECT_NO_THROW(build("info.anything = 1\n"));
}

TEST(Config, TextRoundTrip) {
  KeyValueConfig kv;
  std::istringstream in("horizon = 20\nt_forward = 6\nwait_cost = 2.5\nsynth.regions = 7\nforecast_rounding = per-cell\n");
  kv.parse(in);
  const auto c = experiment_config(kv);
  KeyValueConfig again;
  std::istringstream text(config_text(c));
  again.parse(text);
  const auto d = experiment_config(again);
  EXPECT_EQ(config_text(d), config_text(c));
  EXPECT_EQ(d.synthetic.regions, 7);
  EXPECT_EQ(d.rounding, ForecastRounding::kPerCell);
  ASSERT_TRUE(d.mpc_costs.wait_per_step.has_value());
  EXPECT_DOUBLE_EQ(*d.mpc_costs.wait_per_step, 2.5);
}

TEST(Experiment, TinyRunWritesOutputs) {
  const auto dir = scratch("run");
  KeyValueConfig kv;
  std::istringstream in(
      "synth.regions = 3\nsynth.centre_regions = 1\nsynth.trips_per_day = 150\nsynth.day_steps = 24\n"
      "horizon = 8\nt_forward = 4\ntraining_days = 2\ndrain = 600\nthreads = 1\n"
      "controllers = mpc-oracle, mpc-historical, reactive\nsweep_t_forward = 2,4\n");
  kv.parse(in);
  kv.set("output", dir.string());
  const auto e = prepare(experiment_config(kv));
  EXPECT_GE(e.fleet, e.offline_plan.fleet_size_m);
  const auto report = run_experiment(e);
  EXPECT_EQ(report.runs.size(), 3u);
  EXPECT_EQ(report.fallbacks, 0);
  const auto summary = slurp(dir / "summary.csv");
  EXPECT_EQ(summary.rfind(std::string(kSummaryHeader) + "\n", 0), 0u);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 4);
  EXPECT_TRUE(std::filesystem::exists(dir / "series_reactive.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "solves_mpc-oracle.csv"));

  KeyValueConfig manifest;
  manifest.load((dir / "manifest.txt").string());
  EXPECT_EQ(config_text(experiment_config(manifest)), config_text(e.config));

  run_sweep(e);
  const auto sweep = slurp(dir / "sweep.csv");
  EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 3);
}

TEST(Experiment, UnknownControllerRejected) {
  KeyValueConfig kv;
  std::istringstream in("synth.regions = 2\nsynth.trips_per_day = 20\nsynth.day_steps = 12\nhorizon = 4\nt_forward = 2\n");
  kv.parse(in);
  const auto e = prepare(experiment_config(kv));
  EXPECT_THROW(make_controller(e, "clairvoyant", 2), InputError);
}
