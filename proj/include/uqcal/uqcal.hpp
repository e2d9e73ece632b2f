#pragma once

// Umbrella header for the uqcal library: average-calibration statistics for
// regression uncertainties, BCa-bootstrap validation, heavy-tail screening,
// shape fitting, and Monte-Carlo reliability experiments.

#include "bootstrap.hpp"
#include "dataset.hpp"
#include "distfit.hpp"
#include "experiments.hpp"
#include "generate.hpp"
#include "math.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "robust.hpp"
#include "rng.hpp"
#include "special.hpp"
#include "stats.hpp"
#include "version.hpp"
