#pragma once

#include "skynoma/channel.hpp"
#include "skynoma/config.hpp"
#include "skynoma/crosspoint.hpp"
#include "skynoma/errors.hpp"
#include "skynoma/experiment.hpp"
#include "skynoma/geometry.hpp"
#include "skynoma/laplace.hpp"
#include "skynoma/montecarlo.hpp"
#include "skynoma/numerics.hpp"
#include "skynoma/outage.hpp"
#include "skynoma/rate.hpp"
