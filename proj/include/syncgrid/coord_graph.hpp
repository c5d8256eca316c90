#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace syncgrid {

// Utility assigned to an unavailable action so it never wins an argmax.
inline constexpr double kNegLarge = -1e9;

enum class TopologyKind { full, empty, line, cycle, custom };

struct Topology {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // unordered pairs stored as i < j
};

Topology make_topology(TopologyKind kind, int n,
                       const std::vector<std::pair<int, int>>& custom_edges = {});
bool is_acyclic(const Topology& topo);
inline double default_damping(const Topology& topo) { return is_acyclic(topo) ? 0.0 : 0.5; }

// Per-agent utilities plus one payoff matrix per topology edge. The payoff
// for edge (i, j) with i < j is row-major over A^i x A^j.
struct FactorizedQ {
  std::vector<std::vector<double>> utilities;
  std::vector<std::vector<double>> payoffs;
};

using ActionMasks = std::vector<std::vector<uint8_t>>;  // empty = everything available

// Sum of utilities and edge payoffs at a joint action. Plain sum, no
// normalization.
double q_tot(const FactorizedQ& fq, const Topology& topo, const std::vector<int>& joint);

// Exact maximizer by enumeration over available joint actions; ties break
// to the lexicographically smallest joint action. Product of action-set
// sizes is capped at 10^7.
std::pair<std::vector<int>, double> brute_force_argmax(const FactorizedQ& fq,
                                                       const Topology& topo,
                                                       const ActionMasks& masks = {});

struct MaxPlusResult {
  std::vector<int> joint_action;
  double value = 0.0;                // q_tot(joint_action)
  std::vector<double> trace;         // best-so-far value after each iteration
};

// Anytime max-sum message passing on the coordination graph. Messages are
// updated synchronously, normalized by their mean, and optionally damped;
// after each iteration the decoded candidate is scored by q_tot and the
// best one seen is kept. Exact on trees once iterations reach the diameter.
MaxPlusResult max_plus(const FactorizedQ& fq, const Topology& topo, const ActionMasks& masks,
                       int iterations, double damping = 0.0);

}  // namespace syncgrid
