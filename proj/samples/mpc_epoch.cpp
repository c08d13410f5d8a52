// One control epoch: two idle vehicles in region 1, a customer already
// waiting in region 2 and two more predicted there. Prints the plan and the
// tasks a controller would issue now.

#include <iostream>

#include "amod/amod.hpp"

int main() {
  amod::Scenario s;
  s.regions = amod::RegionSet::numbered(2);
  s.grid = amod::TimeGrid{300.0, 6, 6.0};
  s.travel = amod::TravelTimeMatrix(2, {1, 2, 2, 1});
  s.costs = amod::CostModel::proportional(s.travel, amod::CostParams{0.0, 1.0, 1e4, std::nullopt}, 6);

  amod::StateObservation obs(2, 6, 0);
  obs.idle_a = {2, 0};
  obs.outstanding[{1, 0}] = 1;

  amod::Forecast fc{2, 6, "hand", {}};
  fc.lambda_hat.add(1, 0, 3, 2);

  const auto problem = amod::build_mpc_problem(obs, fc, s, amod::MpcSettings{6, true});
  const auto plan = amod::solve_mpc(problem);
  std::cout << "objective " << plan.objective << " after " << plan.stats.nodes << " nodes\n";
  amod::write_mpc_plan_csv(std::cout, plan, s.regions);
  std::cout << "\nissue now:\n";
  for (const auto& task : amod::first_step_tasks(plan)) {
    std::cout << "  " << task.count << " x " << s.regions.id(task.origin) << " -> " << s.regions.id(task.destination) << '\n';
  }
}
