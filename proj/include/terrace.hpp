#pragma once

#include "terrace/error.hpp"
#include "terrace/io.hpp"
#include "terrace/pde_sim.hpp"
#include "terrace/phase_plane.hpp"
#include "terrace/polynomial.hpp"
#include "terrace/profile.hpp"
#include "terrace/reaction.hpp"
#include "terrace/reaction_json.hpp"
#include "terrace/speed_solver.hpp"
#include "terrace/terrace.hpp"
