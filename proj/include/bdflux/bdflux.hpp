#pragma once

#include "numerics.hpp"
#include "model.hpp"
#include "grid.hpp"
#include "initial_data.hpp"
#include "exact_solutions.hpp"
#include "self_similar.hpp"
#include "solver.hpp"
#include "limit_analysis.hpp"
#include "io.hpp"
