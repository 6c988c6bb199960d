#pragma once

#include "cscs/baselines.hpp"
#include "cscs/covmodel.hpp"
#include "cscs/cscsfit.hpp"
#include "cscs/csv.hpp"
#include "cscs/error.hpp"
#include "cscs/estimators.hpp"
#include "cscs/experiments.hpp"
#include "cscs/rng.hpp"
#include "cscs/rowsolver.hpp"
#include "cscs/simeval.hpp"
#include "cscs/tuning.hpp"
