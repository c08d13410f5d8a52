#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "amod/mpc/mpc.hpp"
#include "oracles/mpc_enum.hpp"
#include "support/random_instances.hpp"

using namespace amod;

namespace {

Scenario city(int n, int tau, CostParams params, int horizon) {
  Scenario s;
  s.regions = RegionSet::numbered(n);
  s.grid = TimeGrid{300.0, 100, 6.0};
  s.travel = TravelTimeMatrix::uniform(n, tau);
  s.costs = CostModel::proportional(s.travel, params, horizon);
  return s;
}

CostParams mpc_costs() { return CostParams{0.0, 1.0, 1e4, std::nullopt}; }

std::int64_t sum(const std::vector<PlanFlow>& flows) {
  std::int64_t total = 0;
  for (const auto& f : flows) total += f.count;
  return total;
}

}  // namespace

TEST(Mpc, EmptySystemCostsNothing) {
  const auto s = city(3, 2, mpc_costs(), 5);
  const StateObservation obs(3, 5, 0);
  const Forecast fc{3, 3, "zero", {}};
  const auto plan = solve_mpc(build_mpc_problem(obs, fc, s, {5, true}));
  EXPECT_EQ(plan.status, opt::SolveStatus::kOptimal);
  EXPECT_DOUBLE_EQ(plan.objective, 0.0);
  EXPECT_TRUE(first_step_tasks(plan).empty());
}

TEST(Mpc, OutstandingCustomerPickedUpAfterRebalance) {
  const int horizon = 5;
  const auto s = city(2, 1, mpc_costs(), horizon);
  StateObservation obs(2, horizon, 0);
  obs.idle_a = {0, 1};
  obs.outstanding[{0, 1}] = 1;
  const auto plan = solve_mpc(build_mpc_problem(obs, Forecast{2, 1, "zero", {}}, s, {horizon, true}));
  ASSERT_EQ(plan.waits_w.size(), 1u);
  EXPECT_EQ(plan.waits_w[0].t, 2);
  EXPECT_TRUE(plan.drops_d.empty());
  // one move plus a two-step wait at drop / T per step
  EXPECT_NEAR(plan.objective, 1.0 + 2.0 * 1e4 / horizon, 1e-9);
  const auto tasks = first_step_tasks(plan, 7);
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(tasks[0], (RebalanceTask{1, 0, 7, 1}));
}

TEST(Mpc, ShortageDropsTheExcess) {
  const auto s = city(2, 2, CostParams{0.0, 5.0, 1.0, std::nullopt}, 4);
  StateObservation obs(2, 4, 0);
  obs.idle_a = {3, 0};
  Forecast fc{2, 1, "test", {}};
  fc.lambda_hat.add(0, 1, 1, 5);
  const auto plan = solve_mpc(build_mpc_problem(obs, fc, s, {4, true}));
  EXPECT_EQ(sum(plan.drops_d), 2);
  EXPECT_EQ(sum(plan.x_p), 3);
}

TEST(Mpc, ServiceableForecastIsServed) {
  const auto s = city(3, 1, mpc_costs(), 6);
  StateObservation obs(3, 6, 10);
  obs.idle_a = {1, 1, 1};
  Forecast fc{3, 4, "test", {}};
  fc.lambda_hat.add(0, 1, 1);
  fc.lambda_hat.add(2, 0, 3);
  fc.lambda_hat.add(1, 2, 4);
  const auto plan = solve_mpc(build_mpc_problem(obs, fc, s, {6, true}));
  EXPECT_TRUE(plan.drops_d.empty());
  EXPECT_TRUE(plan.waits_w.empty());
  EXPECT_EQ(sum(plan.x_p), 3);
}

TEST(Mpc, ObjectiveMatchesRecomputedCost) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = testing_support::random_mpc(rng, 3, 5, 4);
    const auto plan = solve_mpc(build_mpc_problem(m.obs, m.forecast, m.scenario, {m.horizon, true}));
    EXPECT_NEAR(plan.objective, mpc_plan_cost(plan, m.scenario, m.obs.epoch_t0), 1e-7);
  }
}

TEST(Mpc, MatchesEnumeration) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = testing_support::random_mpc(rng, 3, 4, 4);
    const auto plan = solve_mpc(build_mpc_problem(m.obs, m.forecast, m.scenario, {m.horizon, true}));
    const double best = oracle::solve_mpc_exhaustive(m.obs, m.forecast, m.scenario, m.horizon);
    EXPECT_NEAR(plan.objective, best, 1e-7 * (1.0 + best)) << "trial " << trial;
  }
}

TEST(Mpc, PrunedAndFullModelsAgree) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    const auto m = testing_support::random_mpc(rng, 3, 5, 5);
    const auto pruned = solve_mpc(build_mpc_problem(m.obs, m.forecast, m.scenario, {m.horizon, true}));
    const auto full = solve_mpc(build_mpc_problem(m.obs, m.forecast, m.scenario, {m.horizon, false}));
    EXPECT_NEAR(pruned.objective, full.objective, 1e-7) << "trial " << trial;
  }
}

TEST(Mpc, FullModelVariableCount) {
  const int n = 66, horizon = 50;
  Scenario s;
  s.regions = RegionSet::numbered(n);
  s.grid = TimeGrid{300.0, 288, 6.0};
  s.travel = TravelTimeMatrix::uniform(n, 3);
  s.costs = CostModel::proportional(s.travel, mpc_costs(), horizon);
  const StateObservation obs(n, horizon, 0);
  const auto p = build_mpc_problem(obs, Forecast{n, 24, "zero", {}}, s, {horizon, false});
  EXPECT_EQ(p.milp.lp.columns(), 871200);
  EXPECT_EQ(p.conservation_rows, n * horizon);
}

TEST(Mpc, CostScalingKeepsDecisions) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 15; ++trial) {
    auto m = testing_support::random_mpc(rng, 3, 4, 4);
    const auto base = solve_mpc(build_mpc_problem(m.obs, m.forecast, m.scenario, {m.horizon, true}));
    auto scaled = m.scenario;
    const auto& c = m.scenario.costs;
    scaled.costs = CostModel(c.regions(), c.layers(), c.raw_rebalance(), c.raw_drop(), c.raw_wait_rate());
    for (int layer = 1; layer <= c.layers(); ++layer) {
      for (int i = 0; i < c.regions(); ++i) {
        for (int j = 0; j < c.regions(); ++j) {
          scaled.costs.set_rebalance(i, j, layer, 3.0 * c.rebalance(i, j, layer));
          scaled.costs.set_drop(i, j, layer, 3.0 * c.drop(i, j, layer));
          scaled.costs.set_wait_rate(i, j, layer, 3.0 * c.wait_rate(i, j, layer));
        }
      }
    }
    const auto big = solve_mpc(build_mpc_problem(m.obs, m.forecast, scaled, {m.horizon, true}));
    EXPECT_NEAR(big.objective, 3.0 * base.objective, 1e-6 * (1.0 + base.objective)) << "trial " << trial;
  }
}

TEST(Mpc, NoOpposingMovesUnderTriangleInequality) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    auto m = testing_support::random_mpc(rng, 3, 5, 5);
    m.scenario.travel = TravelTimeMatrix::uniform(m.scenario.region_count(), 1);
    m.scenario.costs = CostModel::proportional(m.scenario.travel, mpc_costs(), m.horizon);
    const auto plan = solve_mpc(build_mpc_problem(m.obs, m.forecast, m.scenario, {m.horizon, true}));
    const auto tasks = first_step_tasks(plan);
    for (const auto& a : tasks) {
      for (const auto& b : tasks) EXPECT_FALSE(a.origin == b.destination && a.destination == b.origin);
    }
  }
}

TEST(Mpc, FirstStepTasksSkipIdleAndLaterSteps) {
  MpcPlan plan;
  plan.x_r = {{0, 0, 1, 4}, {2, 1, 1, 2}, {0, 1, 1, 1}, {0, 1, 2, 5}};
  const auto tasks = first_step_tasks(plan, 3);
  ASSERT_EQ(tasks.size(), 2u);
  EXPECT_EQ(tasks[0], (RebalanceTask{0, 1, 3, 1}));
  EXPECT_EQ(tasks[1], (RebalanceTask{2, 1, 3, 2}));
}

TEST(Mpc, RejectsForecastBeyondHorizon) {
  const auto s = city(2, 1, mpc_costs(), 3);
  const StateObservation obs(2, 3, 0);
  EXPECT_THROW(build_mpc_problem(obs, Forecast{2, 4, "zero", {}}, s, {3, true}), ModelError);
}

TEST(Mpc, PlanCsvHasKinds) {
  MpcPlan plan;
  plan.x_p = {{0, 1, 1, 1}};
  plan.x_r = {{1, 1, 1, 2}, {1, 0, 2, 1}};
  plan.drops_d = {{0, 1, 3, 1}};
  std::ostringstream os;
  write_mpc_plan_csv(os, plan, RegionSet({"a", "b"}));
  EXPECT_EQ(os.str(),
            "origin,destination,t,kind,count\n"
            "a,b,1,passenger,1\n"
            "b,b,1,idle,2\n"
            "b,a,2,rebalance,1\n"
            "a,b,3,drop,1\n");
}
