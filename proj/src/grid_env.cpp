#include "syncgrid/grid_env.hpp"

#include <algorithm>
#include <numeric>

#include "syncgrid/errors.hpp"

namespace syncgrid {

namespace {

// Row/col deltas indexed by movement action (Stay, Up, Down, Left, Right).
constexpr int kDeltaRow[kNumMoves] = {0, -1, 1, 0, 0};
constexpr int kDeltaCol[kNumMoves] = {0, 0, 0, -1, 1};

bool in_grid(const EnvConfig& cfg, int row, int col) {
  return row >= 0 && row < cfg.grid_size && col >= 0 && col < cfg.grid_size;
}

bool adjacent(const Cell& a, const Cell& b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col) == 1;
}

bool cell_occupied(const GridState& s, int row, int col) {
  for (size_t i = 0; i < s.predator_pos.size(); ++i) {
    if (s.predator_alive[i] && s.predator_pos[i].row == row && s.predator_pos[i].col == col)
      return true;
  }
  for (size_t i = 0; i < s.prey_pos.size(); ++i) {
    if (s.prey_alive[i] && s.prey_pos[i].row == row && s.prey_pos[i].col == col) return true;
  }
  return false;
}

class RngPreyMover final : public PreyMover {
 public:
  explicit RngPreyMover(Rng& rng) : rng_(rng) {}
  int choose(int, int n_open) override { return rng_.below_int(n_open); }

 private:
  Rng& rng_;
};

}  // namespace

int EnvConfig::n_actions() const { return kNumMoves + n_capture_actions(); }

void EnvConfig::validate() const {
  if (grid_size < 1) throw ConfigError("grid_size must be positive");
  if (n_predators < 1) throw ConfigError("n_predators must be positive");
  if (n_prey < 1) throw ConfigError("n_prey must be positive");
  if (subteam_size < 2) throw ConfigError("subteam_size must be at least 2");
  if (n_predators % subteam_size != 0)
    throw ConfigError("n_predators must be divisible by subteam_size");
  if (capture_reward < 0) throw ConfigError("capture_reward must be non-negative");
  if (miscapture_penalty > 0) throw ConfigError("miscapture_penalty must be <= 0");
  if (max_steps < 1) throw ConfigError("max_steps must be positive");
  if (obs_window < 1 || obs_window % 2 == 0) throw ConfigError("obs_window must be odd and positive");
  if (obs_window > grid_size) throw ConfigError("obs_window larger than grid");
}

std::string action_name(int a) {
  switch (a) {
    case kStay: return "stay";
    case kUp: return "up";
    case kDown: return "down";
    case kLeft: return "left";
    case kRight: return "right";
    default: return "capture" + std::to_string(capture_index(a));
  }
}

std::vector<uint8_t> available_actions(const EnvConfig& cfg, const GridState& s, int agent) {
  if (agent < 0 || agent >= cfg.n_predators) throw ContractError("agent index out of range");
  std::vector<uint8_t> mask(cfg.n_actions(), 0);
  mask[kStay] = 1;
  if (!s.predator_alive[agent]) return mask;  // removed: only Stay

  const Cell pos = s.predator_pos[agent];
  for (int a = 1; a < kNumMoves; ++a) {
    const int r = pos.row + kDeltaRow[a];
    const int c = pos.col + kDeltaCol[a];
    if (in_grid(cfg, r, c) && !cell_occupied(s, r, c)) mask[a] = 1;
  }
  bool prey_adjacent = false;
  for (size_t p = 0; p < s.prey_pos.size(); ++p) {
    if (s.prey_alive[p] && adjacent(pos, s.prey_pos[p])) {
      prey_adjacent = true;
      break;
    }
  }
  if (prey_adjacent) {
    for (int k = 0; k < cfg.n_capture_actions(); ++k) mask[kNumMoves + k] = 1;
  }
  return mask;
}

std::vector<double> observe(const EnvConfig& cfg, const GridState& s, int agent) {
  if (agent < 0 || agent >= cfg.n_predators) throw ContractError("agent index out of range");
  std::vector<double> obs(cfg.obs_dim(), 0.0);
  if (!s.predator_alive[agent]) return obs;  // removed: all zeros

  const int w = cfg.obs_window;
  const int half = w / 2;
  const int cells = w * w;
  const Cell pos = s.predator_pos[agent];
  for (int wr = 0; wr < w; ++wr) {
    for (int wc = 0; wc < w; ++wc) {
      const int r = pos.row - half + wr;
      const int c = pos.col - half + wc;
      const int idx = wr * w + wc;
      if (!in_grid(cfg, r, c)) {
        obs[idx] = -1.0;
        obs[cells + idx] = -1.0;
        continue;
      }
      for (int j = 0; j < cfg.n_predators; ++j) {
        if (j != agent && s.predator_alive[j] && s.predator_pos[j].row == r &&
            s.predator_pos[j].col == c) {
          obs[idx] = static_cast<double>(j + 1) / cfg.n_predators;
        }
      }
      for (size_t p = 0; p < s.prey_pos.size(); ++p) {
        if (s.prey_alive[p] && s.prey_pos[p].row == r && s.prey_pos[p].col == c) {
          obs[cells + idx] = 1.0;
        }
      }
    }
  }
  const double denom = std::max(1, cfg.grid_size - 1);
  obs[2 * cells] = pos.row / denom;
  obs[2 * cells + 1] = pos.col / denom;
  return obs;
}

std::string render_ascii(const EnvConfig& cfg, const GridState& s) {
  std::string grid(static_cast<size_t>(cfg.grid_size) * (cfg.grid_size + 1), '.');
  for (int r = 0; r < cfg.grid_size; ++r) grid[r * (cfg.grid_size + 1) + cfg.grid_size] = '\n';
  auto put = [&](const Cell& cell, char ch) { grid[cell.row * (cfg.grid_size + 1) + cell.col] = ch; };
  for (size_t p = 0; p < s.prey_pos.size(); ++p) {
    if (s.prey_alive[p]) put(s.prey_pos[p], 'p');
  }
  for (int i = 0; i < cfg.n_predators; ++i) {
    if (s.predator_alive[i]) put(s.predator_pos[i], i < 10 ? static_cast<char>('0' + i) : '#');
  }
  return grid;
}

StepEvents resolve_step(const EnvConfig& cfg, GridState& s, const std::vector<int>& joint,
                        PreyMover& prey_mover) {
  StepEvents ev;

  // Phase 1a: resolve captures on start-of-step adjacency, prey index
  // ascending. Removal doubles as consumption: a predator removed by one
  // capture cannot join a later one this step.
  for (size_t p = 0; p < s.prey_pos.size(); ++p) {
    if (!s.prey_alive[p]) continue;
    std::vector<int> capturers;
    for (int i = 0; i < cfg.n_predators; ++i) {
      if (s.predator_alive[i] && is_capture_action(joint[i]) &&
          adjacent(s.predator_pos[i], s.prey_pos[p])) {
        capturers.push_back(i);
      }
    }
    if (capturers.empty()) continue;

    std::vector<int> removal;
    if (cfg.capture_mode == CaptureMode::homogeneous) {
      if (static_cast<int>(capturers.size()) >= cfg.subteam_size) {
        removal.assign(capturers.begin(), capturers.begin() + cfg.subteam_size);
      }
    } else {
      // Heterogeneous: the capture indices present must cover all
      // subteam_size distinct values; per value, the lowest-index
      // predator is consumed, surplus duplicates are left in place.
      removal.reserve(cfg.subteam_size);
      for (int k = 0; k < cfg.subteam_size; ++k) {
        for (int i : capturers) {
          if (capture_index(joint[i]) == k) {
            removal.push_back(i);
            break;
          }
        }
      }
      if (static_cast<int>(removal.size()) < cfg.subteam_size) removal.clear();
    }

    if (!removal.empty()) {
      for (int i : removal) s.predator_alive[i] = 0;
      s.prey_alive[p] = 0;
      s.captures_done += 1;
      ev.captures += 1;
      ev.reward += cfg.capture_reward;
    }
  }

  // Phase 1b: one miscapture penalty per uncaptured prey that had at
  // least one adjacent capturer left unconsumed by any success.
  for (size_t p = 0; p < s.prey_pos.size(); ++p) {
    if (!s.prey_alive[p]) continue;
    for (int i = 0; i < cfg.n_predators; ++i) {
      if (s.predator_alive[i] && is_capture_action(joint[i]) &&
          adjacent(s.predator_pos[i], s.prey_pos[p])) {
        ev.miscaptures += 1;
        ev.reward += cfg.miscapture_penalty;
        break;
      }
    }
  }

  // Phase 2: predator movements, ascending index; a target occupied by
  // the time the move resolves degrades the move to Stay.
  for (int i = 0; i < cfg.n_predators; ++i) {
    if (!s.predator_alive[i]) continue;
    const int a = joint[i];
    if (a == kStay || is_capture_action(a)) continue;
    const int r = s.predator_pos[i].row + kDeltaRow[a];
    const int c = s.predator_pos[i].col + kDeltaCol[a];
    if (in_grid(cfg, r, c) && !cell_occupied(s, r, c)) {
      s.predator_pos[i] = {r, c};
    }
  }

  // Phase 3: prey move uniformly at random to an open 4-adjacent cell,
  // ascending index; a prey with no open cell stays.
  for (size_t p = 0; p < s.prey_pos.size(); ++p) {
    if (!s.prey_alive[p]) continue;
    Cell open[4];
    int n_open = 0;
    for (int a = 1; a < kNumMoves; ++a) {
      const int r = s.prey_pos[p].row + kDeltaRow[a];
      const int c = s.prey_pos[p].col + kDeltaCol[a];
      if (in_grid(cfg, r, c) && !cell_occupied(s, r, c)) open[n_open++] = {r, c};
    }
    if (n_open > 0) {
      const int pick = prey_mover.choose(static_cast<int>(p), n_open);
      s.prey_pos[p] = open[pick];
    }
  }

  s.step += 1;
  ev.done = s.captures_done == cfg.n_subteams() || s.step >= cfg.max_steps;
  return ev;
}

GridEnv::GridEnv(EnvConfig config, uint64_t seed) : cfg_(config), rng_(seed) {
  cfg_.validate();
}

StepOutcome GridEnv::reset() {
  const int total = cfg_.n_predators + cfg_.n_prey;
  const int cells = cfg_.grid_size * cfg_.grid_size;
  if (total > cells) throw ConfigError("grid too small to host all agents");

  // Partial Fisher-Yates over all cells: uniform distinct placement.
  std::vector<int> deck(cells);
  std::iota(deck.begin(), deck.end(), 0);
  for (int i = 0; i < total; ++i) {
    const int j = i + rng_.below_int(cells - i);
    std::swap(deck[i], deck[j]);
  }

  state_ = GridState{};
  state_.predator_pos.resize(cfg_.n_predators);
  state_.predator_alive.assign(cfg_.n_predators, 1);
  state_.prey_pos.resize(cfg_.n_prey);
  state_.prey_alive.assign(cfg_.n_prey, 1);
  for (int i = 0; i < cfg_.n_predators; ++i) {
    state_.predator_pos[i] = {deck[i] / cfg_.grid_size, deck[i] % cfg_.grid_size};
  }
  for (int p = 0; p < cfg_.n_prey; ++p) {
    const int cell = deck[cfg_.n_predators + p];
    state_.prey_pos[p] = {cell / cfg_.grid_size, cell % cfg_.grid_size};
  }
  has_reset_ = true;
  return outcome_for_state(0.0, false, 0, 0);
}

StepOutcome GridEnv::reset_to(const GridState& state) {
  if (static_cast<int>(state.predator_pos.size()) != cfg_.n_predators ||
      static_cast<int>(state.prey_pos.size()) != cfg_.n_prey ||
      state.predator_alive.size() != state.predator_pos.size() ||
      state.prey_alive.size() != state.prey_pos.size()) {
    throw ContractError("state arity does not match config");
  }
  state_ = state;
  has_reset_ = true;
  return outcome_for_state(0.0, false, 0, 0);
}

StepOutcome GridEnv::step(const std::vector<int>& joint_action) {
  if (!has_reset_) throw ContractError("step before reset");
  if (static_cast<int>(joint_action.size()) != cfg_.n_predators)
    throw ContractError("joint action arity mismatch");
  for (int i = 0; i < cfg_.n_predators; ++i) {
    const int a = joint_action[i];
    if (a < 0 || a >= cfg_.n_actions()) throw ContractError("action index out of range");
    if (!available_actions(i)[a])
      throw ContractError("unavailable action submitted for agent " + std::to_string(i));
  }
  RngPreyMover mover(rng_);
  const StepEvents ev = resolve_step(cfg_, state_, joint_action, mover);
  return outcome_for_state(ev.reward, ev.done, ev.captures, ev.miscaptures);
}

std::vector<uint8_t> GridEnv::available_actions(int agent) const {
  return syncgrid::available_actions(cfg_, state_, agent);
}

std::vector<double> GridEnv::observe(int agent) const {
  return syncgrid::observe(cfg_, state_, agent);
}

std::string GridEnv::render_ascii() const { return syncgrid::render_ascii(cfg_, state_); }

StepOutcome GridEnv::outcome_for_state(double reward, bool done, int captures,
                                       int miscaptures) const {
  StepOutcome out;
  out.obs.reserve(cfg_.n_predators);
  out.masks.reserve(cfg_.n_predators);
  for (int i = 0; i < cfg_.n_predators; ++i) {
    out.obs.push_back(observe(i));
    out.masks.push_back(available_actions(i));
  }
  out.reward = reward;
  out.done = done;
  out.captures = captures;
  out.miscaptures = miscaptures;
  return out;
}

std::unique_ptr<TeamEnv> make_grid_env(const EnvConfig& cfg, uint64_t seed) {
  return std::make_unique<GridEnv>(cfg, seed);
}

}  // namespace syncgrid
