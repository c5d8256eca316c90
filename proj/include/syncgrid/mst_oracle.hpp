#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "syncgrid/grid_env.hpp"

namespace syncgrid {

// Explicit enumerated-state model with rectangular joint-action tables.
// Unavailable component actions are completed to behave as Stay-equivalents
// when a model is lifted from the grid task, and per-agent availability is
// kept alongside so classification can restrict itself to legal actions.
struct TinyDecPomdp {
  int n_agents = 0;
  std::vector<int> action_counts;  // per agent
  int n_states = 0;
  std::vector<uint8_t> terminal;  // per state
  double gamma = 0.99;

  // Row s * n_joint + a: sparse distribution over next states.
  std::vector<std::vector<std::pair<int, double>>> transition;
  std::vector<double> reward;  // s * n_joint + a

  // availability[s][agent][action]; empty = everything available.
  std::vector<std::vector<std::vector<uint8_t>>> availability;

  int n_joint() const;
  int joint_index(const std::vector<int>& actions) const;
  std::vector<int> decode_joint(int index) const;
  bool joint_available(int state, int joint) const;
  int n_nonterminal() const;
  void validate() const;  // row sums within 1e-9, gamma in [0, 1)
};

// Per agent, which actions are synchronization actions; the complement is
// the neutral set.
struct Partitioning {
  std::vector<std::vector<uint8_t>> is_sync;  // [agent][action]

  static Partitioning none(const std::vector<int>& action_counts);
  // Capture actions are the synchronization set of the grid task.
  static Partitioning captures(const EnvConfig& cfg);
  int sync_components(const TinyDecPomdp& model, int joint) const;
};

struct Classification {
  std::vector<int> a_neut;   // available all-neutral joint actions
  std::vector<int> a_plus;   // >=2 sync components, strictly above every neutral
  std::vector<int> a_minus;  // >=1 sync component, strictly below every neutral
};

struct MstVerdict {
  bool is_mst = false;
  std::vector<int> witnesses;  // states where a_plus and a_minus are both nonempty
};

// Stable encoding of a grid state, ignoring the step counter: per predator
// the cell index or -1 when removed, then the same per prey.
std::vector<int16_t> encode_grid_state(const EnvConfig& cfg, const GridState& s);

struct StateKeyHash {
  size_t operator()(const std::vector<int16_t>& key) const;
};

// Grid task lifted to an explicit model. States enumerate every labeled
// placement reachable from any initial placement; the step counter is not
// part of the state, so Q* is the infinite-horizon discounted value.
struct LiftedModel {
  TinyDecPomdp model;
  EnvConfig cfg;
  std::vector<GridState> states;
  std::vector<int> initial_states;  // all-alive placements
  std::unordered_map<std::vector<int16_t>, int, StateKeyHash> index;

  int state_index(const GridState& s) const;
};

// Enumerates the model; throws SizeError above `state_cap` states.
LiftedModel lift_env(const EnvConfig& cfg, double gamma = 0.99, int64_t state_cap = 2'000'000);

// Value iteration from zero to sup-norm residual < tol (iteration cap 1e6).
std::vector<double> exact_q(const TinyDecPomdp& model, double tol = 1e-12);

// Strict comparisons against every available all-neutral joint action, with
// a small epsilon absorbing value-iteration residual; ties fall in no set.
Classification classify(const TinyDecPomdp& model, const std::vector<double>& q, int state,
                        const Partitioning& partitioning, double eps = 1e-9);

MstVerdict is_mst(const TinyDecPomdp& model, const Partitioning& partitioning, double tol = 1e-12,
                  double eps = 1e-9);

// Deterministic state -> available joint action table, hash-derived from a
// seed. Used to compare model expectations with environment rollouts.
struct TablePolicy {
  std::vector<int> action;  // joint action index per state
  static TablePolicy random(const TinyDecPomdp& model, uint64_t seed);
};

// Expected discounted return of the policy over `horizon` steps, per state.
std::vector<double> policy_value(const TinyDecPomdp& model, const TablePolicy& policy,
                                 int horizon);

// One-shot synchronization game: one decision state, terminal afterwards.
// Every agent has n_neutral neutral actions (all pay zero) followed by the
// capture actions; reward +R when all agents capture (heterogeneous: with
// all-distinct indices covered), penalty when some but not all do.
struct OneShotSpec {
  int n_agents = 2;
  int n_neutral = 1;
  int n_capture = 1;  // >1 means capture indices must cover all values
  double reward = 10.0;
  double penalty = -2.0;
  double gamma = 0.99;
};

TinyDecPomdp one_shot_model(const OneShotSpec& spec);
Partitioning one_shot_partitioning(const OneShotSpec& spec);

}  // namespace syncgrid
