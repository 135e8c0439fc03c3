#pragma once

#include "cascadeopt/calibration.hpp"
#include "cascadeopt/cascade.hpp"
#include "cascadeopt/catalog_io.hpp"
#include "cascadeopt/common.hpp"
#include "cascadeopt/config.hpp"
#include "cascadeopt/corpus.hpp"
#include "cascadeopt/costs.hpp"
#include "cascadeopt/evaluator.hpp"
#include "cascadeopt/experiments.hpp"
#include "cascadeopt/models.hpp"
#include "cascadeopt/parallel.hpp"
#include "cascadeopt/pareto.hpp"
#include "cascadeopt/pnm.hpp"
#include "cascadeopt/score_matrix.hpp"
#include "cascadeopt/transforms.hpp"
