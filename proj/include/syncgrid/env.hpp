#pragma once

#include <cstdint>
#include <vector>

namespace syncgrid {

// What every agent sees after a reset or a step.
struct StepOutcome {
  std::vector<std::vector<double>> obs;      // one vector per agent
  std::vector<std::vector<uint8_t>> masks;   // one flag per action per agent
  double reward = 0.0;                       // shared team scalar
  bool done = false;
  int captures = 0;                          // events this step
  int miscaptures = 0;
};

// Common surface of the trainable tasks (grid world, one-shot game).
// An instance is single-threaded and internally mutable; independent
// instances may run on different threads.
class TeamEnv {
 public:
  virtual ~TeamEnv() = default;
  virtual int n_agents() const = 0;
  virtual int n_actions() const = 0;
  virtual int obs_dim() const = 0;
  virtual StepOutcome reset() = 0;
  virtual StepOutcome step(const std::vector<int>& joint_action) = 0;
};

}  // namespace syncgrid
