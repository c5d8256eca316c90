#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "syncgrid/coord_graph.hpp"
#include "syncgrid/errors.hpp"
#include "syncgrid/rng.hpp"

using namespace syncgrid;

namespace {

FactorizedQ random_fq(const Topology& topo, const std::vector<int>& n_actions, Rng& rng,
                      double lo = -5.0, double hi = 5.0) {
  FactorizedQ fq;
  for (int i = 0; i < topo.n; ++i) {
    std::vector<double> u(n_actions[i]);
    for (auto& v : u) v = rng.range(lo, hi);
    fq.utilities.push_back(std::move(u));
  }
  for (const auto& [i, j] : topo.edges) {
    std::vector<double> p(static_cast<size_t>(n_actions[i]) * n_actions[j]);
    for (auto& v : p) v = rng.range(lo, hi);
    fq.payoffs.push_back(std::move(p));
  }
  return fq;
}

// Second, deliberately different summation path for the q_tot oracle:
// iterates actions agent-major and looks edges up through a map.
double q_tot_oracle(const FactorizedQ& fq, const Topology& topo, const std::vector<int>& joint) {
  std::map<std::pair<int, int>, const std::vector<double>*> by_edge;
  for (size_t e = 0; e < topo.edges.size(); ++e) by_edge[topo.edges[e]] = &fq.payoffs[e];
  double total = 0.0;
  for (int i = topo.n - 1; i >= 0; --i) total += fq.utilities[i][joint[i]];
  for (const auto& [edge, payoff] : by_edge) {
    const auto [i, j] = edge;
    total += (*payoff)[joint[i] * fq.utilities[j].size() + joint[j]];
  }
  return total;
}

// Exhaustive argmax written independently of brute_force_argmax: recursion
// instead of an odometer.
std::pair<std::vector<int>, double> enumerate_oracle(const FactorizedQ& fq, const Topology& topo,
                                                     const ActionMasks& masks) {
  std::vector<int> joint(topo.n, 0), best;
  double best_v = 0.0;
  auto rec = [&](auto&& self, int agent) -> void {
    if (agent == topo.n) {
      const double v = q_tot(fq, topo, joint);
      if (best.empty() || v > best_v) {
        best = joint;
        best_v = v;
      }
      return;
    }
    for (int a = 0; a < static_cast<int>(fq.utilities[agent].size()); ++a) {
      if (!masks.empty() && !masks[agent][a]) continue;
      joint[agent] = a;
      self(self, agent + 1);
    }
  };
  rec(rec, 0);
  return {best, best_v};
}

Topology random_tree(int n, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) edges.emplace_back(rng.below_int(v), v);
  return make_topology(TopologyKind::custom, n, edges);
}

}  // namespace

TEST_CASE("topology construction") {
  CHECK(make_topology(TopologyKind::full, 4).edges.size() == 6);
  CHECK(make_topology(TopologyKind::empty, 8).edges.empty());
  const auto line = make_topology(TopologyKind::line, 3);
  REQUIRE(line.edges.size() == 2);
  CHECK(line.edges[0] == std::pair{0, 1});
  CHECK(line.edges[1] == std::pair{1, 2});
  const auto cycle = make_topology(TopologyKind::cycle, 4);
  CHECK(cycle.edges.size() == 4);
  CHECK_FALSE(is_acyclic(cycle));
  CHECK(is_acyclic(line));
  CHECK(is_acyclic(make_topology(TopologyKind::empty, 5)));
  CHECK_THROWS_AS(make_topology(TopologyKind::custom, 3, {{0, 0}}), ContractError);
  CHECK_THROWS_AS(make_topology(TopologyKind::custom, 3, {{0, 1}, {1, 0}}), ContractError);
  CHECK_THROWS_AS(make_topology(TopologyKind::custom, 3, {{0, 5}}), ContractError);
}

TEST_CASE("q_tot") {
  SUBCASE("empty topology is the utility sum") {
    const Topology topo = make_topology(TopologyKind::empty, 3);
    FactorizedQ fq;
    fq.utilities = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
    CHECK(q_tot(fq, topo, {1, 0, 1}) == doctest::Approx(2.0 + 3.0 + 6.0));
  }

  SUBCASE("single payoff entry") {
    const Topology topo = make_topology(TopologyKind::full, 2);
    FactorizedQ fq;
    fq.utilities = {{0.0, 0.0}, {0.0, 0.0}};
    fq.payoffs = {{0.0, 0.0, 0.0, 10.0}};
    CHECK(q_tot(fq, topo, {1, 1}) == doctest::Approx(10.0));
  }

  SUBCASE("matches the independent summation oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
      const Topology topo = make_topology(TopologyKind::full, 3);
      const std::vector<int> counts = {2 + rng.below_int(3), 2 + rng.below_int(3),
                                       2 + rng.below_int(3)};
      const FactorizedQ fq = random_fq(topo, counts, rng);
      std::vector<int> joint(3);
      for (int i = 0; i < 3; ++i) joint[i] = rng.below_int(counts[i]);
      CHECK(q_tot(fq, topo, joint) == doctest::Approx(q_tot_oracle(fq, topo, joint)));
    }
  }

  SUBCASE("shape mismatch throws") {
    const Topology topo = make_topology(TopologyKind::full, 2);
    FactorizedQ fq;
    fq.utilities = {{0.0, 0.0}, {0.0}};
    fq.payoffs = {{0.0, 0.0, 0.0}};  // wrong: needs 2x1
    CHECK_THROWS_AS(q_tot(fq, topo, {0, 0}), ContractError);
  }
}

TEST_CASE("brute force argmax") {
  const Topology pair_topo = make_topology(TopologyKind::full, 2);

  SUBCASE("payoff table example") {
    FactorizedQ fq;
    fq.utilities = {{0.0, 0.0}, {0.0, 0.0}};
    fq.payoffs = {{0.0, -2.0, -2.0, 10.0}};
    const auto [joint, value] = brute_force_argmax(fq, pair_topo);
    CHECK(joint == std::vector<int>{1, 1});
    CHECK(value == doctest::Approx(10.0));
  }

  SUBCASE("all-zero ties break lexicographically") {
    const Topology topo = make_topology(TopologyKind::full, 3);
    FactorizedQ fq;
    fq.utilities = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    fq.payoffs = {std::vector<double>(4, 0.0), std::vector<double>(4, 0.0),
                  std::vector<double>(4, 0.0)};
    const auto [joint, value] = brute_force_argmax(fq, topo);
    CHECK(joint == std::vector<int>{0, 0, 0});
    CHECK(value == doctest::Approx(0.0));
  }

  SUBCASE("matches a second enumeration on random instances") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
      const Topology topo = make_topology(TopologyKind::full, 4);
      const std::vector<int> counts(4, 5);
      const FactorizedQ fq = random_fq(topo, counts, rng);
      const auto got = brute_force_argmax(fq, topo);
      const auto want = enumerate_oracle(fq, topo, {});
      CHECK(got.first == want.first);
      CHECK(got.second == doctest::Approx(want.second));
    }
  }

  SUBCASE("size cap") {
    const Topology topo = make_topology(TopologyKind::empty, 12);
    FactorizedQ fq;
    for (int i = 0; i < 12; ++i) fq.utilities.push_back(std::vector<double>(6, 0.0));
    CHECK_THROWS_AS(brute_force_argmax(fq, topo), SizeError);
  }
}

TEST_CASE("max plus") {
  SUBCASE("single edge solved in one iteration") {
    const Topology topo = make_topology(TopologyKind::full, 2);
    FactorizedQ fq;
    fq.utilities = {{0.0, 0.0}, {0.0, 0.0}};
    fq.payoffs = {{0.0, -2.0, -2.0, 10.0}};
    const auto result = max_plus(fq, topo, {}, 1);
    CHECK(result.joint_action == std::vector<int>{1, 1});
    CHECK(result.value == doctest::Approx(10.0));
  }

  SUBCASE("empty topology is per-agent argmax") {
    const Topology topo = make_topology(TopologyKind::empty, 3);
    FactorizedQ fq;
    fq.utilities = {{1.0, 3.0}, {5.0, 2.0}, {0.0, 4.0}};
    for (int iters : {1, 3, 10}) {
      const auto result = max_plus(fq, topo, {}, iters);
      CHECK(result.joint_action == std::vector<int>{1, 0, 1});
      CHECK(result.value == doctest::Approx(3.0 + 5.0 + 4.0));
    }
  }

  SUBCASE("exact on 200 random trees") {
    Rng rng(1091);
    int exact = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + rng.below_int(5);  // up to 6 agents
      const Topology topo = random_tree(n, rng);
      std::vector<int> counts(n);
      for (auto& c : counts) c = 2 + rng.below_int(4);  // up to 5 actions
      const FactorizedQ fq = random_fq(topo, counts, rng);
      const auto mp = max_plus(fq, topo, {}, n, 0.0);
      const auto bf = brute_force_argmax(fq, topo);
      if (mp.value == doctest::Approx(bf.second)) ++exact;
    }
    CHECK(exact == 200);
  }

  SUBCASE("anytime on cyclic graphs: monotone trace bounded by the optimum") {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 3 + rng.below_int(3);
      const Topology topo = make_topology(TopologyKind::full, n);
      std::vector<int> counts(n);
      for (auto& c : counts) c = 2 + rng.below_int(3);
      const FactorizedQ fq = random_fq(topo, counts, rng);
      const auto mp = max_plus(fq, topo, {}, 12, 0.5);
      const auto bf = brute_force_argmax(fq, topo);
      for (size_t k = 1; k < mp.trace.size(); ++k) CHECK(mp.trace[k] >= mp.trace[k - 1]);
      CHECK(mp.value <= bf.second + 1e-9);
      CHECK(mp.value == doctest::Approx(q_tot(fq, topo, mp.joint_action)));
    }
  }

  SUBCASE("masks are respected") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + rng.below_int(4);
      const Topology topo = make_topology(TopologyKind::full, n);
      std::vector<int> counts(n, 4);
      const FactorizedQ fq = random_fq(topo, counts, rng);
      ActionMasks masks(n, std::vector<uint8_t>(4, 0));
      for (int i = 0; i < n; ++i) {
        masks[i][rng.below_int(4)] = 1;  // guarantee one
        for (int a = 0; a < 4; ++a) {
          if (rng.unit() < 0.5) masks[i][a] = 1;
        }
      }
      const auto mp = max_plus(fq, topo, masks, 8, 0.5);
      for (int i = 0; i < n; ++i) CHECK(masks[i][mp.joint_action[i]] == 1);
      const auto bf = brute_force_argmax(fq, topo, masks);
      CHECK(mp.value <= bf.second + 1e-9);
    }
  }

  SUBCASE("constant shifts leave the argmax unchanged") {
    Rng rng(123);
    for (int trial = 0; trial < 50; ++trial) {
      const Topology topo = make_topology(TopologyKind::full, 4);
      const std::vector<int> counts(4, 3);
      FactorizedQ fq = random_fq(topo, counts, rng);
      const auto base = max_plus(fq, topo, {}, 10, 0.5);

      const double c_util = rng.range(-20.0, 20.0);
      const double c_pay = rng.range(-20.0, 20.0);
      for (auto& v : fq.utilities[1]) v += c_util;
      for (auto& v : fq.payoffs[0]) v += c_pay;
      const auto shifted = max_plus(fq, topo, {}, 10, 0.5);
      CHECK(shifted.joint_action == base.joint_action);
      CHECK(shifted.value == doctest::Approx(base.value + c_util + c_pay));
    }
  }

  SUBCASE("agent relabeling permutes the result on tie-free instances") {
    Rng rng(321);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 4;
      const Topology topo = random_tree(n, rng);
      const std::vector<int> counts(n, 3);
      const FactorizedQ fq = random_fq(topo, counts, rng);

      // permutation: reverse agent order
      std::vector<int> perm(n);
      for (int i = 0; i < n; ++i) perm[i] = n - 1 - i;

      std::vector<std::pair<int, int>> new_edges;
      FactorizedQ pfq;
      pfq.utilities.resize(n);
      for (int i = 0; i < n; ++i) pfq.utilities[perm[i]] = fq.utilities[i];
      std::vector<std::vector<double>> new_payoffs;
      for (size_t e = 0; e < topo.edges.size(); ++e) {
        auto [i, j] = topo.edges[e];
        int pi = perm[i], pj = perm[j];
        std::vector<double> payoff = fq.payoffs[e];
        if (pi > pj) {
          // transpose so the stored matrix is lower-index-major again
          std::vector<double> t(payoff.size());
          const int ni = counts[i], nj = counts[j];
          for (int a = 0; a < ni; ++a)
            for (int b = 0; b < nj; ++b) t[b * ni + a] = payoff[a * nj + b];
          payoff = std::move(t);
          std::swap(pi, pj);
        }
        new_edges.emplace_back(pi, pj);
        new_payoffs.push_back(std::move(payoff));
      }
      const Topology ptopo = make_topology(TopologyKind::custom, n, new_edges);
      pfq.payoffs = std::move(new_payoffs);

      const auto base = max_plus(fq, topo, {}, n + 2, 0.0);
      const auto permuted = max_plus(pfq, ptopo, {}, n + 2, 0.0);
      CHECK(permuted.value == doctest::Approx(base.value));
      for (int i = 0; i < n; ++i) CHECK(permuted.joint_action[perm[i]] == base.joint_action[i]);
    }
  }
}
