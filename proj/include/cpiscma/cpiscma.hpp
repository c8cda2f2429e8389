#pragma once

#include "cpiscma/analysis.hpp"
#include "cpiscma/channel.hpp"
#include "cpiscma/codebook.hpp"
#include "cpiscma/index_map.hpp"
#include "cpiscma/mpa.hpp"
#include "cpiscma/mpad.hpp"
#include "cpiscma/rng.hpp"
#include "cpiscma/sim.hpp"
#include "cpiscma/transmitter.hpp"
#include "cpiscma/types.hpp"
