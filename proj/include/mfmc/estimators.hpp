#pragma once

#include "mfmc/estimators/baseline.hpp"
#include "mfmc/estimators/dataset.hpp"
#include "mfmc/estimators/estimate.hpp"
#include "mfmc/estimators/joint_ml.hpp"
#include "mfmc/estimators/multifidelity.hpp"
#include "mfmc/estimators/optimal_alpha.hpp"
