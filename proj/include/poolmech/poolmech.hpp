#pragma once

#include "poolmech/cost_model.hpp"
#include "poolmech/scenario.hpp"
#include "poolmech/centralized_solver.hpp"
#include "poolmech/mechanism.hpp"
#include "poolmech/equilibrium.hpp"
#include "poolmech/dynamics.hpp"
#include "poolmech/io.hpp"
