#include "syncgrid/matrix_game.hpp"

#include <algorithm>

#include "syncgrid/errors.hpp"

namespace syncgrid {

OneShotEnv::OneShotEnv(OneShotSpec spec) : spec_(spec) {
  if (spec_.n_agents < 2) throw ConfigError("one-shot game needs at least two agents");
  if (spec_.n_neutral < 1 || spec_.n_capture < 1) throw ConfigError("bad action counts");
}

StepOutcome OneShotEnv::reset() {
  done_ = false;
  return outcome(false);
}

StepOutcome OneShotEnv::step(const std::vector<int>& joint_action) {
  if (done_) throw ContractError("step after terminal state");
  if (static_cast<int>(joint_action.size()) != spec_.n_agents)
    throw ContractError("joint action arity mismatch");

  int capturers = 0;
  std::vector<uint8_t> covered(spec_.n_capture, 0);
  for (int a : joint_action) {
    if (a < 0 || a >= n_actions()) throw ContractError("action index out of range");
    if (a >= spec_.n_neutral) {
      ++capturers;
      covered[a - spec_.n_neutral] = 1;
    }
  }
  const bool all_covered =
      std::all_of(covered.begin(), covered.end(), [](uint8_t c) { return c != 0; });

  StepOutcome out = outcome(true);
  if (capturers == spec_.n_agents && all_covered) {
    out.reward = spec_.reward;
    out.captures = 1;
  } else if (capturers > 0) {
    out.reward = spec_.penalty;
    out.miscaptures = 1;
  }
  out.done = true;
  done_ = true;
  return out;
}

StepOutcome OneShotEnv::outcome(bool terminal) const {
  StepOutcome out;
  out.obs.assign(spec_.n_agents, std::vector<double>(spec_.n_agents, 0.0));
  out.masks.assign(spec_.n_agents, std::vector<uint8_t>(n_actions(), 1));
  if (!terminal) {
    for (int i = 0; i < spec_.n_agents; ++i) out.obs[i][i] = 1.0;
  }
  return out;
}

std::unique_ptr<TeamEnv> make_one_shot_env(const OneShotSpec& spec) {
  return std::make_unique<OneShotEnv>(spec);
}

}  // namespace syncgrid
