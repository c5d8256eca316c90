#pragma once

#include <memory>

#include "syncgrid/env.hpp"
#include "syncgrid/mst_oracle.hpp"

namespace syncgrid {

// The one-shot synchronization game as a trainable environment. Each agent
// observes its own one-hot id, every action is always available, and the
// episode terminates after a single joint action.
class OneShotEnv final : public TeamEnv {
 public:
  explicit OneShotEnv(OneShotSpec spec);

  int n_agents() const override { return spec_.n_agents; }
  int n_actions() const override { return spec_.n_neutral + spec_.n_capture; }
  int obs_dim() const override { return spec_.n_agents; }

  StepOutcome reset() override;
  StepOutcome step(const std::vector<int>& joint_action) override;

  const OneShotSpec& spec() const { return spec_; }

 private:
  StepOutcome outcome(bool terminal) const;

  OneShotSpec spec_;
  bool done_ = true;
};

std::unique_ptr<TeamEnv> make_one_shot_env(const OneShotSpec& spec);

}  // namespace syncgrid
