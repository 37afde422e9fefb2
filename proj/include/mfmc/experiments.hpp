#pragma once

#include "mfmc/experiments/config.hpp"
#include "mfmc/experiments/figures.hpp"
#include "mfmc/experiments/parallel.hpp"
#include "mfmc/experiments/pipeline.hpp"
#include "mfmc/experiments/report.hpp"
#include "mfmc/experiments/validation.hpp"
