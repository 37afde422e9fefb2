#pragma once

#include "mfmc/models/copula.hpp"
#include "mfmc/models/joint.hpp"
#include "mfmc/models/marginal.hpp"
#include "mfmc/models/moment_map.hpp"
