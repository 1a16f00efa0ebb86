#pragma once

#include "switchhull/errors.hpp"
#include "switchhull/time_grid.hpp"
#include "switchhull/switch_poly.hpp"
#include "switchhull/fem_heat.hpp"
#include "switchhull/reference_problem.hpp"
#include "switchhull/qp_active_set.hpp"
#include "switchhull/relax_engine.hpp"
#include "switchhull/global_solver.hpp"
#include "switchhull/bench.hpp"
