#pragma once

#include "quadkick/constants.hpp"
#include "quadkick/errors.hpp"
#include "quadkick/quadrature_state.hpp"
#include "quadkick/thermal_channel.hpp"
#include "quadkick/kick_engine.hpp"
#include "quadkick/rk4.hpp"
#include "quadkick/probe_readout.hpp"
#include "quadkick/protocol_planner.hpp"
#include "quadkick/config.hpp"
