#pragma once

// Umbrella header. The oracles (maxdiv/oracle.hpp) are not included.

#include "maxdiv/core.hpp"
#include "maxdiv/io.hpp"
#include "maxdiv/maximizer.hpp"
#include "maxdiv/means.hpp"
#include "maxdiv/weighting.hpp"
