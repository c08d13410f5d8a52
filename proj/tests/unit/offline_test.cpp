#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "amod/offline/planner.hpp"
#include "amod/opt/simplex.hpp"
#include "oracles/offline_dp.hpp"
#include "support/random_instances.hpp"

using namespace amod;

namespace {

Scenario line(int regions, int horizon, int tau) {
  Scenario s;
  s.regions = RegionSet::numbered(regions);
  s.grid = TimeGrid{300.0, horizon, 6.0};
  s.travel = TravelTimeMatrix::uniform(regions, tau);
  s.costs = CostModel::proportional(s.travel, CostParams{}, horizon);
  return s;
}

}  // namespace

TEST(TimeExpandedNetwork, Counts) {
  auto s = line(3, 5, 2);
  s.demand.add(0, 1, 2, 3);
  s.demand.add(2, 0, 4);
  const auto g = build_time_expanded_network(s);
  EXPECT_EQ(g.net.node_count(), 3 * 5 + 2);
  int movement = 0, passenger = 0;
  for (const auto& a : g.info) {
    movement += a.kind == TimeExpandedNetwork::ArcInfo::kRebalance;
    passenger += a.kind == TimeExpandedNetwork::ArcInfo::kPassenger;
  }
  EXPECT_EQ(movement, 3 * 3 * 5);
  EXPECT_EQ(passenger, 2);
}

TEST(Offline, ZeroDemandNeedsNoVehicles) {
  const auto plan = solve_offline(line(3, 6, 2));
  EXPECT_EQ(plan.fleet_size_m, 0);
  EXPECT_DOUBLE_EQ(plan.objective, 0.0);
  EXPECT_TRUE(plan.x_p.empty());
  EXPECT_TRUE(plan.x_r.empty());
}

TEST(Offline, SingleTripOneVehicle) {
  auto s = line(2, 4, 1);
  s.demand.add(0, 1, 3);
  const auto plan = solve_offline(s);
  EXPECT_EQ(plan.fleet_size_m, 1);
  EXPECT_EQ(plan.seed[0], 1);
  EXPECT_EQ(plan.x_p.size(), 1u);
  EXPECT_EQ(conservation_residual(s, plan), 0);
  // idles at region 0 for steps 1 and 2, then leaves region 1 at step 4
  EXPECT_DOUBLE_EQ(plan.objective, 3.0);
}

TEST(Offline, ChainedTripsShareOneVehicle) {
  auto s = line(2, 4, 1);
  s.demand.add(0, 1, 1);
  s.demand.add(1, 0, 2);
  s.demand.add(0, 1, 3);
  EXPECT_EQ(solve_offline(s).fleet_size_m, 1);
}

TEST(Offline, IdenticalTripsNeedOneVehicleEach) {
  for (int k = 1; k <= 5; ++k) {
    auto s = line(3, 4, 2);
    s.demand.add(0, 2, 2, k);
    EXPECT_EQ(solve_offline(s).fleet_size_m, k);
  }
}

TEST(Offline, ArrivalsPastHorizonLeave) {
  auto s = line(2, 3, 3);
  s.demand.add(0, 1, 2);
  const auto plan = solve_offline(s);
  EXPECT_EQ(plan.fleet_size_m, 1);
  EXPECT_EQ(conservation_residual(s, plan), 0);
}

TEST(Offline, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(2024);
  testing_support::OfflineShape shape;
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = testing_support::random_offline(rng, shape);
    const auto plan = solve_offline(s);
    const auto best = oracle::solve_offline_exhaustive(s);
    EXPECT_NEAR(plan.objective, best.cost, 1e-9) << "trial " << trial;
    EXPECT_EQ(plan.fleet_size_m, best.fleet) << "trial " << trial;
    EXPECT_EQ(conservation_residual(s, plan), 0);
  }
}

TEST(Offline, FleetMonotoneInDemand) {
  std::mt19937_64 rng(99);
  testing_support::OfflineShape shape;
  shape.random_costs = false;
  for (int trial = 0; trial < 30; ++trial) {
    auto s = testing_support::random_offline(rng, shape);
    const auto before = fleet_size(s);
    const int n = s.region_count();
    s.demand.add(testing_support::uniform(rng, 0, n - 1), testing_support::uniform(rng, 0, n - 1),
                 testing_support::uniform(rng, 1, s.grid.horizon));
    EXPECT_GE(fleet_size(s), before) << "trial " << trial;
  }
}

TEST(Offline, ObjectiveEqualsRecomputedCost) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = testing_support::random_offline(rng, {6, 12, 20, 3, true});
    const auto plan = solve_offline(s);
    double cost = 0.0;
    for (const auto& f : plan.x_r) cost += s.costs.rebalance(f.origin, f.destination, f.t) * f.count;
    EXPECT_DOUBLE_EQ(plan.objective, cost);
    std::int64_t served = 0;
    for (const auto& f : plan.x_p) served += f.count;
    EXPECT_EQ(served, s.demand.total());
  }
}

TEST(Offline, RelaxationAgreesWithFlowSolution) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 15; ++trial) {
    const auto s = testing_support::random_offline(rng, {4, 8, 6, 3, true});
    const auto res = opt::solve_lp(offline_lp_relaxation(s));
    ASSERT_EQ(res.status, opt::SolveStatus::kOptimal);
    EXPECT_NEAR(res.objective, solve_offline(s).objective, 1e-7);
  }
}

TEST(Offline, PlanCsv) {
  Scenario s;
  s.regions = RegionSet({"n", "s"});
  s.grid = TimeGrid{300.0, 3, 6.0};
  s.travel = TravelTimeMatrix::uniform(2, 2);
  s.costs = CostModel::proportional(s.travel, CostParams{}, 3);
  s.demand.add(0, 1, 2);
  std::ostringstream os;
  write_plan_csv(os, solve_offline(s), s.regions);
  EXPECT_EQ(os.str(),
            "origin,destination,t,kind,count\n"
            "n,n,1,seed,1\n"
            "n,s,2,passenger,1\n"
            "n,n,1,idle,1\n");
}

TEST(Offline, InvalidScenarioThrows) {
  auto s = line(2, 3, 1);
  s.demand.add(0, 4, 1);
  EXPECT_THROW(solve_offline(s), InputError);
}
