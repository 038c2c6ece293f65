#pragma once

// Umbrella header: the whole toolkit.

#include "sgp/common.hpp"
#include "sgp/config.hpp"
#include "sgp/cvae.hpp"
#include "sgp/dataset.hpp"
#include "sgp/distribution.hpp"
#include "sgp/kinematics.hpp"
#include "sgp/neuralnet.hpp"
#include "sgp/pipeline.hpp"
#include "sgp/planner.hpp"
#include "sgp/scene_io.hpp"
#include "sgp/selection.hpp"
#include "sgp/time_estimator.hpp"
#include "sgp/world.hpp"
