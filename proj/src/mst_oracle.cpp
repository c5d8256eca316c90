#include "syncgrid/mst_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "syncgrid/errors.hpp"
#include "syncgrid/rng.hpp"

namespace syncgrid {

int TinyDecPomdp::n_joint() const {
  int total = 1;
  for (int c : action_counts) total *= c;
  return total;
}

int TinyDecPomdp::joint_index(const std::vector<int>& actions) const {
  if (static_cast<int>(actions.size()) != n_agents) throw ContractError("joint arity mismatch");
  int idx = 0;
  for (int i = 0; i < n_agents; ++i) {
    if (actions[i] < 0 || actions[i] >= action_counts[i])
      throw ContractError("action index out of range");
    idx = idx * action_counts[i] + actions[i];
  }
  return idx;
}

std::vector<int> TinyDecPomdp::decode_joint(int index) const {
  std::vector<int> actions(n_agents);
  for (int i = n_agents - 1; i >= 0; --i) {
    actions[i] = index % action_counts[i];
    index /= action_counts[i];
  }
  return actions;
}

bool TinyDecPomdp::joint_available(int state, int joint) const {
  if (availability.empty()) return true;
  const std::vector<int> actions = decode_joint(joint);
  for (int i = 0; i < n_agents; ++i) {
    if (!availability[state][i][actions[i]]) return false;
  }
  return true;
}

int TinyDecPomdp::n_nonterminal() const {
  int count = 0;
  for (uint8_t t : terminal) count += t ? 0 : 1;
  return count;
}

void TinyDecPomdp::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) throw ContractError("gamma must lie in [0, 1)");
  const size_t rows = static_cast<size_t>(n_states) * n_joint();
  if (transition.size() != rows || reward.size() != rows)
    throw ContractError("table shape mismatch");
  for (const auto& row : transition) {
    double sum = 0.0;
    for (const auto& [next, p] : row) {
      if (next < 0 || next >= n_states) throw ContractError("next state out of range");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ContractError("transition row does not sum to 1");
  }
}

Partitioning Partitioning::none(const std::vector<int>& action_counts) {
  Partitioning part;
  for (int c : action_counts) part.is_sync.emplace_back(c, 0);
  return part;
}

Partitioning Partitioning::captures(const EnvConfig& cfg) {
  Partitioning part;
  for (int i = 0; i < cfg.n_predators; ++i) {
    std::vector<uint8_t> flags(cfg.n_actions(), 0);
    for (int a = kNumMoves; a < cfg.n_actions(); ++a) flags[a] = 1;
    part.is_sync.push_back(std::move(flags));
  }
  return part;
}

int Partitioning::sync_components(const TinyDecPomdp& model, int joint) const {
  const std::vector<int> actions = model.decode_joint(joint);
  int count = 0;
  for (int i = 0; i < model.n_agents; ++i) {
    if (is_sync[i][actions[i]]) ++count;
  }
  return count;
}

std::vector<int16_t> encode_grid_state(const EnvConfig& cfg, const GridState& s) {
  std::vector<int16_t> key;
  key.reserve(cfg.n_predators + cfg.n_prey);
  for (int i = 0; i < cfg.n_predators; ++i) {
    key.push_back(s.predator_alive[i]
                      ? static_cast<int16_t>(s.predator_pos[i].row * cfg.grid_size +
                                             s.predator_pos[i].col)
                      : int16_t{-1});
  }
  for (int p = 0; p < cfg.n_prey; ++p) {
    key.push_back(s.prey_alive[p] ? static_cast<int16_t>(s.prey_pos[p].row * cfg.grid_size +
                                                         s.prey_pos[p].col)
                                  : int16_t{-1});
  }
  return key;
}

size_t StateKeyHash::operator()(const std::vector<int16_t>& key) const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (int16_t v : key) {
    h ^= static_cast<uint16_t>(v);
    h *= 0x100000001b3ull;
  }
  return static_cast<size_t>(h);
}

int LiftedModel::state_index(const GridState& s) const {
  const auto it = index.find(encode_grid_state(cfg, s));
  return it == index.end() ? -1 : it->second;
}

namespace {

// Replays a prefix of prey-move choices and records branch sizes, so the
// lifter can enumerate every stochastic outcome of one step.
class ScriptedMover final : public PreyMover {
 public:
  ScriptedMover(std::vector<int>& script, std::vector<int>& sizes)
      : script_(script), sizes_(sizes) {}

  int choose(int, int n_open) override {
    if (pos_ < script_.size()) {
      sizes_[pos_] = n_open;
      return script_[pos_++];
    }
    script_.push_back(0);
    sizes_.push_back(n_open);
    ++pos_;
    return 0;
  }

 private:
  std::vector<int>& script_;
  std::vector<int>& sizes_;
  size_t pos_ = 0;
};

}  // namespace

LiftedModel lift_env(const EnvConfig& cfg, double gamma, int64_t state_cap) {
  cfg.validate();
  const int cells = cfg.grid_size * cfg.grid_size;
  const int total_agents = cfg.n_predators + cfg.n_prey;
  if (total_agents > cells) throw ConfigError("grid too small to host all agents");

  // Count initial placements (falling factorial) before enumerating.
  double placements = 1.0;
  for (int k = 0; k < total_agents; ++k) placements *= cells - k;
  if (placements > static_cast<double>(state_cap))
    throw SizeError("state space exceeds cap: " + std::to_string(placements) + " placements");

  LiftedModel lifted;
  lifted.cfg = cfg;
  lifted.model.n_agents = cfg.n_predators;
  lifted.model.action_counts.assign(cfg.n_predators, cfg.n_actions());
  lifted.model.gamma = gamma;
  if (gamma < 0.0 || gamma >= 1.0) throw ContractError("gamma must lie in [0, 1)");

  // Transitions are enumerated without the step cap; episode truncation is
  // handled by finite-horizon policy evaluation instead.
  EnvConfig lift_cfg = cfg;
  lift_cfg.max_steps = std::numeric_limits<int>::max();

  auto intern = [&](const GridState& s, std::deque<int>& frontier) {
    const std::vector<int16_t> key = encode_grid_state(cfg, s);
    const auto it = lifted.index.find(key);
    if (it != lifted.index.end()) return it->second;
    const int id = static_cast<int>(lifted.states.size());
    if (id >= state_cap) throw SizeError("state space exceeds cap during expansion");
    lifted.index.emplace(key, id);
    GridState canon = s;
    canon.step = 0;
    lifted.states.push_back(std::move(canon));
    frontier.push_back(id);
    return id;
  };

  // Seed with every all-alive placement.
  std::deque<int> frontier;
  {
    GridState seed;
    seed.predator_pos.resize(cfg.n_predators);
    seed.predator_alive.assign(cfg.n_predators, 1);
    seed.prey_pos.resize(cfg.n_prey);
    seed.prey_alive.assign(cfg.n_prey, 1);
    std::vector<int> chosen(total_agents);
    std::vector<uint8_t> used(cells, 0);
    auto place = [&](auto&& self, int depth) -> void {
      if (depth == total_agents) {
        for (int i = 0; i < cfg.n_predators; ++i)
          seed.predator_pos[i] = {chosen[i] / cfg.grid_size, chosen[i] % cfg.grid_size};
        for (int p = 0; p < cfg.n_prey; ++p) {
          const int c = chosen[cfg.n_predators + p];
          seed.prey_pos[p] = {c / cfg.grid_size, c % cfg.grid_size};
        }
        lifted.initial_states.push_back(intern(seed, frontier));
        return;
      }
      for (int cell = 0; cell < cells; ++cell) {
        if (used[cell]) continue;
        used[cell] = 1;
        chosen[depth] = cell;
        self(self, depth + 1);
        used[cell] = 0;
      }
    };
    place(place, 0);
  }

  const int n_joint = lifted.model.n_joint();
  std::vector<int> effective(cfg.n_predators);
  while (!frontier.empty()) {
    const int sid = frontier.front();
    frontier.pop_front();

    // model tables grow as states are discovered; index rows lazily
    if (static_cast<size_t>(sid + 1) * n_joint > lifted.model.transition.size()) {
      lifted.model.transition.resize(static_cast<size_t>(sid + 1) * n_joint);
      lifted.model.reward.resize(static_cast<size_t>(sid + 1) * n_joint, 0.0);
      lifted.model.terminal.resize(sid + 1, 0);
      lifted.model.availability.resize(sid + 1);
    }

    const GridState state = lifted.states[sid];
    const bool terminal = state.captures_done == cfg.n_subteams();
    lifted.model.terminal[sid] = terminal ? 1 : 0;

    auto& avail = lifted.model.availability[sid];
    avail.resize(cfg.n_predators);
    for (int i = 0; i < cfg.n_predators; ++i) avail[i] = available_actions(cfg, state, i);

    for (int joint = 0; joint < n_joint; ++joint) {
      auto& row = lifted.model.transition[static_cast<size_t>(sid) * n_joint + joint];
      if (terminal) {
        row = {{sid, 1.0}};
        continue;
      }
      const std::vector<int> actions = lifted.model.decode_joint(joint);
      for (int i = 0; i < cfg.n_predators; ++i)
        effective[i] = avail[i][actions[i]] ? actions[i] : kStay;

      // Depth-first enumeration over prey movement choices.
      std::vector<int> script, sizes;
      bool first = true;
      for (;;) {
        GridState next = state;
        ScriptedMover mover(script, sizes);
        const StepEvents ev = resolve_step(lift_cfg, next, effective, mover);
        if (first) {
          lifted.model.reward[static_cast<size_t>(sid) * n_joint + joint] = ev.reward;
          first = false;
        }
        double prob = 1.0;
        for (int b : sizes) prob /= b;
        const int next_id = intern(next, frontier);
        bool merged = false;
        for (auto& [existing, p] : row) {
          if (existing == next_id) {
            p += prob;
            merged = true;
            break;
          }
        }
        if (!merged) row.emplace_back(next_id, prob);

        // Odometer over the choice script.
        int d = static_cast<int>(script.size()) - 1;
        while (d >= 0 && script[d] + 1 >= sizes[d]) --d;
        if (d < 0) break;
        script[d] += 1;
        script.resize(d + 1);
        sizes.resize(d + 1);
      }
    }
  }

  lifted.model.n_states = static_cast<int>(lifted.states.size());
  lifted.model.transition.resize(static_cast<size_t>(lifted.model.n_states) * n_joint);
  lifted.model.reward.resize(static_cast<size_t>(lifted.model.n_states) * n_joint, 0.0);
  lifted.model.terminal.resize(lifted.model.n_states, 0);
  lifted.model.availability.resize(lifted.model.n_states);
  lifted.model.validate();
  return lifted;
}

std::vector<double> exact_q(const TinyDecPomdp& model, double tol) {
  model.validate();
  const int n_joint = model.n_joint();
  const size_t rows = static_cast<size_t>(model.n_states) * n_joint;
  std::vector<double> q(rows, 0.0);
  std::vector<double> value(model.n_states, 0.0);

  constexpr int64_t kIterationCap = 1'000'000;
  for (int64_t it = 0; it < kIterationCap; ++it) {
    double residual = 0.0;
    for (int s = 0; s < model.n_states; ++s) {
      if (model.terminal[s]) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < n_joint; ++a) {
        const size_t idx = static_cast<size_t>(s) * n_joint + a;
        double next_value = 0.0;
        for (const auto& [ns, p] : model.transition[idx]) next_value += p * value[ns];
        const double updated = model.reward[idx] + model.gamma * next_value;
        residual = std::max(residual, std::abs(updated - q[idx]));
        q[idx] = updated;
        best = std::max(best, updated);
      }
      value[s] = best;
    }
    if (residual < tol) return q;
  }
  throw NumericError("value iteration did not converge within the iteration cap");
}

Classification classify(const TinyDecPomdp& model, const std::vector<double>& q, int state,
                        const Partitioning& partitioning, double eps) {
  if (state < 0 || state >= model.n_states) throw ContractError("state index out of range");
  if (static_cast<int>(partitioning.is_sync.size()) != model.n_agents)
    throw ContractError("partitioning arity mismatch");
  for (int i = 0; i < model.n_agents; ++i) {
    if (static_cast<int>(partitioning.is_sync[i].size()) != model.action_counts[i])
      throw ContractError("partitioning inconsistent with action sets");
  }
  const int n_joint = model.n_joint();
  if (q.size() != static_cast<size_t>(model.n_states) * n_joint)
    throw ContractError("q table shape mismatch");

  Classification result;
  double neut_min = std::numeric_limits<double>::infinity();
  double neut_max = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n_joint; ++a) {
    if (!model.joint_available(state, a)) continue;
    if (partitioning.sync_components(model, a) == 0) {
      result.a_neut.push_back(a);
      const double v = q[static_cast<size_t>(state) * n_joint + a];
      neut_min = std::min(neut_min, v);
      neut_max = std::max(neut_max, v);
    }
  }
  if (result.a_neut.empty()) return result;

  for (int a = 0; a < n_joint; ++a) {
    if (!model.joint_available(state, a)) continue;
    const int sync = partitioning.sync_components(model, a);
    if (sync == 0) continue;
    const double v = q[static_cast<size_t>(state) * n_joint + a];
    if (sync >= 2 && v > neut_max + eps) {
      result.a_plus.push_back(a);
    } else if (v < neut_min - eps) {
      result.a_minus.push_back(a);
    }
  }
  return result;
}

MstVerdict is_mst(const TinyDecPomdp& model, const Partitioning& partitioning, double tol,
                  double eps) {
  const std::vector<double> q = exact_q(model, tol);
  MstVerdict verdict;
  for (int s = 0; s < model.n_states; ++s) {
    if (model.terminal[s]) continue;
    const Classification c = classify(model, q, s, partitioning, eps);
    if (!c.a_plus.empty() && !c.a_minus.empty()) verdict.witnesses.push_back(s);
  }
  verdict.is_mst = !verdict.witnesses.empty();
  return verdict;
}

TablePolicy TablePolicy::random(const TinyDecPomdp& model, uint64_t seed) {
  TablePolicy policy;
  policy.action.resize(model.n_states, 0);
  const int n_joint = model.n_joint();
  for (int s = 0; s < model.n_states; ++s) {
    std::vector<int> avail;
    for (int a = 0; a < n_joint; ++a) {
      if (model.joint_available(s, a)) avail.push_back(a);
    }
    if (avail.empty()) throw ContractError("state has no available joint action");
    const uint64_t pick = Rng::derive(seed, static_cast<uint64_t>(s)) % avail.size();
    policy.action[s] = avail[pick];
  }
  return policy;
}

std::vector<double> policy_value(const TinyDecPomdp& model, const TablePolicy& policy,
                                 int horizon) {
  model.validate();
  if (static_cast<int>(policy.action.size()) != model.n_states)
    throw ContractError("policy table size mismatch");
  const int n_joint = model.n_joint();
  std::vector<double> value(model.n_states, 0.0), next(model.n_states, 0.0);
  for (int t = 0; t < horizon; ++t) {
    for (int s = 0; s < model.n_states; ++s) {
      if (model.terminal[s]) {
        next[s] = 0.0;
        continue;
      }
      const size_t idx = static_cast<size_t>(s) * n_joint + policy.action[s];
      double future = 0.0;
      for (const auto& [ns, p] : model.transition[idx]) future += p * value[ns];
      next[s] = model.reward[idx] + model.gamma * future;
    }
    value.swap(next);
  }
  return value;
}

TinyDecPomdp one_shot_model(const OneShotSpec& spec) {
  if (spec.n_agents < 2) throw ContractError("one-shot game needs at least two agents");
  if (spec.n_neutral < 1 || spec.n_capture < 1) throw ContractError("bad action counts");
  TinyDecPomdp model;
  model.n_agents = spec.n_agents;
  model.action_counts.assign(spec.n_agents, spec.n_neutral + spec.n_capture);
  model.n_states = 2;  // decision state, then absorbing terminal
  model.terminal = {0, 1};
  model.gamma = spec.gamma;
  const int n_joint = model.n_joint();
  model.transition.resize(2 * static_cast<size_t>(n_joint));
  model.reward.assign(2 * static_cast<size_t>(n_joint), 0.0);
  for (int a = 0; a < n_joint; ++a) {
    model.transition[a] = {{1, 1.0}};
    model.transition[n_joint + a] = {{1, 1.0}};
    const std::vector<int> actions = model.decode_joint(a);
    int capturers = 0;
    std::vector<uint8_t> covered(spec.n_capture, 0);
    for (int act : actions) {
      if (act >= spec.n_neutral) {
        ++capturers;
        covered[act - spec.n_neutral] = 1;
      }
    }
    const bool all_covered =
        std::all_of(covered.begin(), covered.end(), [](uint8_t c) { return c != 0; });
    if (capturers == spec.n_agents && all_covered) {
      model.reward[a] = spec.reward;
    } else if (capturers > 0) {
      model.reward[a] = spec.penalty;
    }
  }
  model.validate();
  return model;
}

Partitioning one_shot_partitioning(const OneShotSpec& spec) {
  Partitioning part;
  for (int i = 0; i < spec.n_agents; ++i) {
    std::vector<uint8_t> flags(spec.n_neutral + spec.n_capture, 0);
    for (int k = 0; k < spec.n_capture; ++k) flags[spec.n_neutral + k] = 1;
    part.is_sync.push_back(std::move(flags));
  }
  return part;
}

}  // namespace syncgrid
