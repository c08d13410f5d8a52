// Three regions on a line, a morning rush toward region 1 and an evening
// rush back out. Prints the minimum fleet and where it should start.

#include <iostream>

#include "amod/amod.hpp"

int main() {
  amod::Scenario s;
  s.regions = amod::RegionSet({"north", "centre", "south"});
  s.grid = amod::TimeGrid{300.0, 12, 6.0};
  // tau in intervals, row-major origin x destination.
  s.travel = amod::TravelTimeMatrix(3, {1, 2, 3,
                                        2, 1, 2,
                                        3, 2, 1});
  s.demand.add(0, 1, 1, 3);
  s.demand.add(2, 1, 2, 2);
  s.demand.add(1, 0, 8, 2);
  s.demand.add(1, 2, 9, 3);
  s.costs = amod::CostModel::proportional(s.travel, amod::CostParams{}, s.grid.horizon);

  const auto plan = amod::solve_offline(s);
  std::cout << "minimum fleet: " << plan.fleet_size_m << "\nobjective: " << plan.objective << "\nstart:";
  for (int i = 0; i < s.region_count(); ++i) std::cout << ' ' << s.regions.id(i) << '=' << plan.seed[static_cast<std::size_t>(i)];
  std::cout << "\n\n";
  amod::write_plan_csv(std::cout, plan, s.regions);
}
