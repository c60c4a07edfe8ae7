#pragma once

// Umbrella header for the covariance-estimator risk laboratory.

#include "covrisk/decomposition.hpp"
#include "covrisk/eigen_stats.hpp"
#include "covrisk/errors.hpp"
#include "covrisk/estimators.hpp"
#include "covrisk/io.hpp"
#include "covrisk/losses.hpp"
#include "covrisk/matrix.hpp"
#include "covrisk/parallel.hpp"
#include "covrisk/risk.hpp"
#include "covrisk/rng.hpp"
#include "covrisk/special_functions.hpp"
#include "covrisk/version.hpp"
#include "covrisk/wishart.hpp"
