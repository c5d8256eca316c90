#include "syncgrid/coord_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <set>

#include "syncgrid/errors.hpp"

namespace syncgrid {

namespace {

void check_shapes(const FactorizedQ& fq, const Topology& topo) {
  if (static_cast<int>(fq.utilities.size()) != topo.n)
    throw ContractError("utilities arity does not match agent count");
  if (fq.payoffs.size() != topo.edges.size())
    throw ContractError("payoff count does not match edge count");
  for (size_t e = 0; e < topo.edges.size(); ++e) {
    const auto [i, j] = topo.edges[e];
    const size_t want = fq.utilities[i].size() * fq.utilities[j].size();
    if (fq.payoffs[e].size() != want) throw ContractError("payoff shape mismatch on edge");
  }
}

void check_masks(const FactorizedQ& fq, const ActionMasks& masks) {
  if (masks.empty()) return;
  if (masks.size() != fq.utilities.size()) throw ContractError("mask arity mismatch");
  for (size_t i = 0; i < masks.size(); ++i) {
    if (masks[i].size() != fq.utilities[i].size()) throw ContractError("mask shape mismatch");
    if (std::find(masks[i].begin(), masks[i].end(), uint8_t{1}) == masks[i].end())
      throw ContractError("agent has no available action");
  }
}

bool available(const ActionMasks& masks, int agent, int action) {
  return masks.empty() || masks[agent][action] != 0;
}

}  // namespace

Topology make_topology(TopologyKind kind, int n,
                       const std::vector<std::pair<int, int>>& custom_edges) {
  if (n < 1) throw ContractError("topology needs at least one agent");
  Topology topo;
  topo.n = n;
  switch (kind) {
    case TopologyKind::full:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) topo.edges.emplace_back(i, j);
      break;
    case TopologyKind::empty:
      break;
    case TopologyKind::line:
      for (int i = 0; i + 1 < n; ++i) topo.edges.emplace_back(i, i + 1);
      break;
    case TopologyKind::cycle:
      for (int i = 0; i + 1 < n; ++i) topo.edges.emplace_back(i, i + 1);
      if (n > 2) topo.edges.emplace_back(0, n - 1);
      break;
    case TopologyKind::custom: {
      std::set<std::pair<int, int>> seen;
      for (auto [i, j] : custom_edges) {
        if (i == j) throw ContractError("self-loop edge");
        if (i > j) std::swap(i, j);
        if (i < 0 || j >= n) throw ContractError("edge endpoint out of range");
        if (!seen.insert({i, j}).second) throw ContractError("duplicate edge");
        topo.edges.emplace_back(i, j);
      }
      break;
    }
  }
  return topo;
}

bool is_acyclic(const Topology& topo) {
  std::vector<int> parent(topo.n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [i, j] : topo.edges) {
    const int a = find(i), b = find(j);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

double q_tot(const FactorizedQ& fq, const Topology& topo, const std::vector<int>& joint) {
  check_shapes(fq, topo);
  if (static_cast<int>(joint.size()) != topo.n) throw ContractError("joint action arity mismatch");
  double total = 0.0;
  for (int i = 0; i < topo.n; ++i) {
    if (joint[i] < 0 || joint[i] >= static_cast<int>(fq.utilities[i].size()))
      throw ContractError("action index out of range");
    total += fq.utilities[i][joint[i]];
  }
  for (size_t e = 0; e < topo.edges.size(); ++e) {
    const auto [i, j] = topo.edges[e];
    total += fq.payoffs[e][joint[i] * fq.utilities[j].size() + joint[j]];
  }
  return total;
}

std::pair<std::vector<int>, double> brute_force_argmax(const FactorizedQ& fq,
                                                       const Topology& topo,
                                                       const ActionMasks& masks) {
  check_shapes(fq, topo);
  check_masks(fq, masks);

  std::vector<std::vector<int>> choices(topo.n);
  double log_count = 0.0;
  for (int i = 0; i < topo.n; ++i) {
    for (int a = 0; a < static_cast<int>(fq.utilities[i].size()); ++a) {
      if (available(masks, i, a)) choices[i].push_back(a);
    }
    if (choices[i].empty()) throw ContractError("agent has no available action");
    log_count += std::log10(static_cast<double>(choices[i].size()));
  }
  if (log_count > 7.0) throw SizeError("joint action space exceeds enumeration cap");

  std::vector<int> idx(topo.n, 0);
  std::vector<int> joint(topo.n);
  std::vector<int> best;
  double best_value = 0.0;
  for (;;) {
    for (int i = 0; i < topo.n; ++i) joint[i] = choices[i][idx[i]];
    const double v = q_tot(fq, topo, joint);
    if (best.empty() || v > best_value) {
      best = joint;
      best_value = v;
    }
    int k = topo.n - 1;
    while (k >= 0 && ++idx[k] == static_cast<int>(choices[k].size())) idx[k--] = 0;
    if (k < 0) break;
  }
  return {best, best_value};
}

MaxPlusResult max_plus(const FactorizedQ& fq, const Topology& topo, const ActionMasks& masks,
                       int iterations, double damping) {
  check_shapes(fq, topo);
  check_masks(fq, masks);
  if (iterations < 1) throw ContractError("iterations must be at least 1");
  if (damping < 0.0 || damping >= 1.0) throw ContractError("damping must be in [0, 1)");

  const int n = topo.n;
  const int n_edges = static_cast<int>(topo.edges.size());

  // Utilities with unavailable actions pushed far down.
  std::vector<std::vector<double>> util(n);
  for (int i = 0; i < n; ++i) {
    util[i] = fq.utilities[i];
    for (size_t a = 0; a < util[i].size(); ++a) {
      if (!available(masks, i, static_cast<int>(a))) util[i][a] = kNegLarge;
    }
  }

  // Directed message slots: 2e for lo->hi, 2e+1 for hi->lo of edge e.
  std::vector<std::vector<double>> msg(2 * n_edges), msg_next(2 * n_edges);
  for (int e = 0; e < n_edges; ++e) {
    const auto [i, j] = topo.edges[e];
    msg[2 * e].assign(fq.utilities[j].size(), 0.0);
    msg[2 * e + 1].assign(fq.utilities[i].size(), 0.0);
    msg_next[2 * e] = msg[2 * e];
    msg_next[2 * e + 1] = msg[2 * e + 1];
  }

  // Incoming message sums per agent.
  std::vector<std::vector<double>> in_sum(n);
  auto recompute_in_sums = [&] {
    for (int i = 0; i < n; ++i) in_sum[i].assign(fq.utilities[i].size(), 0.0);
    for (int e = 0; e < n_edges; ++e) {
      const auto [i, j] = topo.edges[e];
      for (size_t a = 0; a < in_sum[j].size(); ++a) in_sum[j][a] += msg[2 * e][a];
      for (size_t a = 0; a < in_sum[i].size(); ++a) in_sum[i][a] += msg[2 * e + 1][a];
    }
  };
  recompute_in_sums();

  const auto payoff_at = [&](int e, int lo_a, int hi_a) {
    return fq.payoffs[e][lo_a * fq.utilities[topo.edges[e].second].size() + hi_a];
  };

  MaxPlusResult result;
  std::vector<int> candidate(n);
  for (int it = 0; it < iterations; ++it) {
    // Synchronous update of every directed message from the previous round.
    for (int e = 0; e < n_edges; ++e) {
      const auto [lo, hi] = topo.edges[e];
      for (int dir = 0; dir < 2; ++dir) {
        const int from = dir == 0 ? lo : hi;
        const int to = dir == 0 ? hi : lo;
        const int slot = 2 * e + dir;
        const int back_slot = 2 * e + (1 - dir);
        auto& out = msg_next[slot];
        const int n_to = static_cast<int>(fq.utilities[to].size());
        const int n_from = static_cast<int>(fq.utilities[from].size());
        double mean = 0.0;
        for (int at = 0; at < n_to; ++at) {
          double best = -std::numeric_limits<double>::infinity();
          for (int af = 0; af < n_from; ++af) {
            const double pay = dir == 0 ? payoff_at(e, af, at) : payoff_at(e, at, af);
            const double v = util[from][af] + pay + in_sum[from][af] - msg[back_slot][af];
            if (v > best) best = v;
          }
          out[at] = best;
          mean += best;
        }
        mean /= n_to;
        for (int at = 0; at < n_to; ++at) {
          out[at] = damping * msg[slot][at] + (1.0 - damping) * (out[at] - mean);
        }
      }
    }
    msg.swap(msg_next);
    recompute_in_sums();

    // Decode and keep the best candidate seen so far (anytime behavior).
    for (int i = 0; i < n; ++i) {
      int best_a = 0;
      double best_v = util[i][0] + in_sum[i][0];
      for (size_t a = 1; a < util[i].size(); ++a) {
        const double v = util[i][a] + in_sum[i][a];
        if (v > best_v) {
          best_v = v;
          best_a = static_cast<int>(a);
        }
      }
      candidate[i] = best_a;
    }
    const double value = q_tot(fq, topo, candidate);
    if (result.trace.empty() || value > result.value) {
      result.joint_action = candidate;
      result.value = value;
    }
    result.trace.push_back(result.value);
  }
  return result;
}

}  // namespace syncgrid
