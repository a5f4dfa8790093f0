#pragma once

// Umbrella header: pulls in the whole library.

#include "planck2d/version.hpp"
#include "planck2d/constants.hpp"
#include "planck2d/physics.hpp"
#include "planck2d/interp.hpp"
#include "planck2d/dataset.hpp"
#include "planck2d/stats.hpp"
#include "planck2d/simulate.hpp"
#include "planck2d/fit.hpp"
#include "planck2d/spacing.hpp"
#include "planck2d/flux.hpp"
#include "planck2d/tomography.hpp"
#include "planck2d/io.hpp"
