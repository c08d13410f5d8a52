#pragma once

#include "amod/core/errors.hpp"
#include "amod/core/scenario.hpp"
#include "amod/core/time_grid.hpp"
#include "amod/core/trips.hpp"
#include "amod/forecast/forecast.hpp"
#include "amod/io/config.hpp"
#include "amod/io/csv.hpp"
#include "amod/io/experiment.hpp"
#include "amod/io/synthetic.hpp"
#include "amod/io/trips.hpp"
#include "amod/mpc/mpc.hpp"
#include "amod/offline/planner.hpp"
#include "amod/opt/branch_and_bound.hpp"
#include "amod/opt/network_simplex.hpp"
#include "amod/opt/simplex.hpp"
#include "amod/sim/controllers.hpp"
#include "amod/sim/simulator.hpp"
#include "amod/sim/state.hpp"
