#pragma once

// Umbrella header: cost modeling, scheduling, simulation and training-time
// analysis for allreduce on hierarchical (supernode) interconnects.

#include "hiercoll/config.hpp"
#include "hiercoll/cost_model.hpp"
#include "hiercoll/io_model.hpp"
#include "hiercoll/models.hpp"
#include "hiercoll/report.hpp"
#include "hiercoll/schedule.hpp"
#include "hiercoll/simulator.hpp"
#include "hiercoll/topology.hpp"
#include "hiercoll/training.hpp"
#include "hiercoll/verify.hpp"
