#pragma once

#include "crosscheck/frame.hpp"
#include "crosscheck/world_config.hpp"

namespace crosscheck {

// Position of ((t + offset) mod cycle): [0, red) -> red,
// [red, red+green) -> green, remainder -> yellow.
// Zero-length cycle raises ConfigError.
LightColor light_color_at(const PhaseSpec& phase, double t);

// Deterministic rollout: identical configs give byte-identical logs.
// The ego vehicle (id 0) sits at the midpoint of the first lane; NPCs are
// apportioned over lanes by spawn_weight. Invalid placement (a lane too
// short for its share of vehicles) raises ConfigError.
FrameLog run_scenario(const WorldConfig& cfg);

} // namespace crosscheck
