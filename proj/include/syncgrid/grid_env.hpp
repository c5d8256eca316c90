#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "syncgrid/env.hpp"
#include "syncgrid/rng.hpp"

namespace syncgrid {

enum class CaptureMode { homogeneous, heterogeneous };

struct EnvConfig {
  int grid_size = 10;
  int n_predators = 8;
  int n_prey = 8;
  int subteam_size = 2;  // predators required per capture
  CaptureMode capture_mode = CaptureMode::homogeneous;
  double capture_reward = 10.0;
  double miscapture_penalty = -2.0;
  int max_steps = 200;
  int obs_window = 5;  // odd, centered on the observing predator

  int n_capture_actions() const {
    return capture_mode == CaptureMode::heterogeneous ? subteam_size : 1;
  }
  int n_actions() const;
  int n_subteams() const { return n_predators / subteam_size; }
  int obs_dim() const { return obs_window * obs_window * 2 + 2; }
  double max_episode_reward() const { return n_subteams() * capture_reward; }

  void validate() const;  // throws ConfigError
};

// Action indices. Movement actions are the neutral set; Capture(k) lives at
// index kNumMoves + k and is the synchronization set.
inline constexpr int kStay = 0;
inline constexpr int kUp = 1;
inline constexpr int kDown = 2;
inline constexpr int kLeft = 3;
inline constexpr int kRight = 4;
inline constexpr int kNumMoves = 5;

inline bool is_capture_action(int a) { return a >= kNumMoves; }
inline int capture_index(int a) { return a - kNumMoves; }
std::string action_name(int a);

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct GridState {
  std::vector<Cell> predator_pos;       // meaningful only where alive
  std::vector<uint8_t> predator_alive;  // 0 = removed after a capture
  std::vector<Cell> prey_pos;
  std::vector<uint8_t> prey_alive;  // 0 = captured
  int step = 0;
  int captures_done = 0;
};

// Rewarded/penalized events of one resolved step.
struct StepEvents {
  double reward = 0.0;
  int captures = 0;
  int miscaptures = 0;
  bool done = false;
};

// Source of prey movement choices. The environment draws from its PRNG;
// the exact-model lifter enumerates every branch instead.
class PreyMover {
 public:
  virtual ~PreyMover() = default;
  // Called once per live prey that has at least one open adjacent cell.
  // Returns the chosen index in [0, n_open).
  virtual int choose(int prey_index, int n_open) = 0;
};

// State-level operations, shared between the environment and the exact
// model lifter so both resolve transitions identically.
std::vector<uint8_t> available_actions(const EnvConfig& cfg, const GridState& s, int agent);
std::vector<double> observe(const EnvConfig& cfg, const GridState& s, int agent);
std::string render_ascii(const EnvConfig& cfg, const GridState& s);

// Resolves one timestep in place: captures on start-of-step adjacency,
// then predator moves (ascending index, conflicts degrade to Stay), then
// prey moves (ascending index). Assumes every submitted action is
// available in `s`.
StepEvents resolve_step(const EnvConfig& cfg, GridState& s, const std::vector<int>& joint,
                        PreyMover& prey_mover);

class GridEnv final : public TeamEnv {
 public:
  GridEnv(EnvConfig config, uint64_t seed);

  int n_agents() const override { return cfg_.n_predators; }
  int n_actions() const override { return cfg_.n_actions(); }
  int obs_dim() const override { return cfg_.obs_dim(); }

  StepOutcome reset() override;
  StepOutcome step(const std::vector<int>& joint_action) override;

  // Starts an episode from an explicit state instead of random placement.
  StepOutcome reset_to(const GridState& state);

  const GridState& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }

  std::vector<uint8_t> available_actions(int agent) const;
  std::vector<double> observe(int agent) const;
  std::string render_ascii() const;

 private:
  StepOutcome outcome_for_state(double reward, bool done, int captures, int miscaptures) const;

  EnvConfig cfg_;
  Rng rng_;
  GridState state_;
  bool has_reset_ = false;
};

std::unique_ptr<TeamEnv> make_grid_env(const EnvConfig& cfg, uint64_t seed);

}  // namespace syncgrid
