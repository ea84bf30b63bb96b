#pragma once

#include <cstdint>

#include "nmx/model_io.hpp"

namespace nmx {

// Bumped whenever the generator changes, so a (version, seed) pair always names the same instance.
inline constexpr int kRandomModelVersion = 1;

struct RandomOptions {
  int min_subsystems = 1;
  int max_subsystems = 2;
  int max_agents = 2;  // per subsystem
  int max_states = 3;
  int max_actions = 2;
  int max_disturbances = 2;
  int max_noises = 2;
  int max_observations = 2;
  int max_horizon = 2;
  int max_cost = 5;
  bool additive = false;  // also draw stage costs
};

// Draws a valid model with a nested information structure whose hat model can be built: every
// recorded variable is either forgotten, private to agents that leave each subsystem incomplete,
// or common to subsystems 1..j; private variables may later become common.
ModelFile random_model(std::uint64_t seed, const RandomOptions& opts = {});

}  // namespace nmx
