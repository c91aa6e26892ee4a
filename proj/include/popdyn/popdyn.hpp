#pragma once

#include "popdyn/core.hpp"
#include "popdyn/dynamics.hpp"
#include "popdyn/equilibrium.hpp"
#include "popdyn/fields.hpp"
#include "popdyn/game.hpp"
#include "popdyn/games.hpp"
#include "popdyn/lyapunov.hpp"
#include "popdyn/protocol.hpp"
#include "popdyn/simplex.hpp"
#include "popdyn/trajectory.hpp"
