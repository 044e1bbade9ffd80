#pragma once

// Everything except the TCP transport (which pulls in Boost.Asio).

#include "acdsim/actors.hpp"
#include "acdsim/config.hpp"
#include "acdsim/evalharness.hpp"
#include "acdsim/netsim.hpp"
#include "acdsim/protocol.hpp"
#include "acdsim/random.hpp"
#include "acdsim/rlcore.hpp"
#include "acdsim/scenario_io.hpp"
#include "acdsim/taskmodel.hpp"
#include "acdsim/validate.hpp"
