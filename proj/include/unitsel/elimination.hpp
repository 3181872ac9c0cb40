#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "unitsel/network.hpp"

namespace unitsel {

/// Undirected interaction graph over variable ids 0..n-1.
class InteractionGraph {
 public:
  explicit InteractionGraph(std::size_t n = 0) : adj_(n, std::vector<std::uint8_t>(n, 0)) {}

  std::size_t size() const { return adj_.size(); }

  void connect(VarId a, VarId b) {
    if (a == b) return;
    adj_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
    adj_[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 1;
  }
  bool adjacent(VarId a, VarId b) const {
    return adj_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] != 0;
  }

 private:
  std::vector<std::vector<std::uint8_t>> adj_;
};

/// Family cliques: each variable joined with its parents, parents pairwise married.
inline InteractionGraph moral_graph(const Network& net) {
  InteractionGraph g(net.size());
  for (const auto& v : net.variables()) {
    const auto& ps = net.parents(v.id);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      g.connect(v.id, ps[i]);
      for (std::size_t j = i + 1; j < ps.size(); ++j) g.connect(ps[i], ps[j]);
    }
  }
  return g;
}

struct EliminationPlan {
  std::vector<VarId> order;
  /// Index of the first target variable in `order`; everything before it is non-target.
  std::size_t block_boundary = 0;
  /// Largest cluster (variable plus its remaining neighbours) minus one.
  int width = 0;
};

/// Greedy min-fill order with all non-targets eliminated before any target.
/// Ties go to the smallest id.
inline EliminationPlan minfill_order(InteractionGraph g, const std::vector<VarId>& targets) {
  const std::size_t n = g.size();
  std::vector<bool> is_target(n, false);
  for (VarId t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= n) throw InputError("minfill_order: unknown target");
    is_target[static_cast<std::size_t>(t)] = true;
  }

  std::vector<std::set<VarId>> nbrs(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (g.adjacent(static_cast<VarId>(a), static_cast<VarId>(b))) nbrs[a].insert(static_cast<VarId>(b));
    }
  }

  auto fill_count = [&](VarId v) {
    const auto& ns = nbrs[static_cast<std::size_t>(v)];
    std::size_t fill = 0;
    for (auto i = ns.begin(); i != ns.end(); ++i) {
      for (auto j = std::next(i); j != ns.end(); ++j) {
        if (!g.adjacent(*i, *j)) ++fill;
      }
    }
    return fill;
  };

  EliminationPlan plan;
  std::vector<bool> done(n, false);
  for (int block = 0; block < 2; ++block) {
    const bool want_target = block == 1;
    if (want_target) plan.block_boundary = plan.order.size();
    std::vector<VarId> pool;
    for (std::size_t v = 0; v < n; ++v) {
      if (is_target[v] == want_target) pool.push_back(static_cast<VarId>(v));
    }
    while (!pool.empty()) {
      std::size_t best_at = 0;
      std::size_t best_fill = fill_count(pool[0]);
      for (std::size_t k = 1; k < pool.size() && best_fill > 0; ++k) {
        std::size_t f = fill_count(pool[k]);
        if (f < best_fill) {
          best_fill = f;
          best_at = k;
        }
      }
      VarId v = pool[best_at];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_at));
      const auto ns = nbrs[static_cast<std::size_t>(v)];
      plan.width = std::max(plan.width, static_cast<int>(ns.size()));
      for (auto i = ns.begin(); i != ns.end(); ++i) {
        for (auto j = std::next(i); j != ns.end(); ++j) {
          if (!g.adjacent(*i, *j)) {
            g.connect(*i, *j);
            nbrs[static_cast<std::size_t>(*i)].insert(*j);
            nbrs[static_cast<std::size_t>(*j)].insert(*i);
          }
        }
      }
      for (VarId u : ns) nbrs[static_cast<std::size_t>(u)].erase(v);
      nbrs[static_cast<std::size_t>(v)].clear();
      done[static_cast<std::size_t>(v)] = true;
      plan.order.push_back(v);
    }
  }
  return plan;
}

inline EliminationPlan minfill_order(const Network& net, const std::vector<VarId>& targets) {
  return minfill_order(moral_graph(net), targets);
}

/// Width of a given order on a graph (max cluster size minus one).
inline int order_width(InteractionGraph g, const std::vector<VarId>& order) {
  std::vector<bool> gone(g.size(), false);
  int width = 0;
  for (VarId v : order) {
    std::vector<VarId> ns;
    for (std::size_t u = 0; u < g.size(); ++u) {
      if (!gone[u] && g.adjacent(v, static_cast<VarId>(u))) ns.push_back(static_cast<VarId>(u));
    }
    width = std::max(width, static_cast<int>(ns.size()));
    for (std::size_t i = 0; i < ns.size(); ++i) {
      for (std::size_t j = i + 1; j < ns.size(); ++j) g.connect(ns[i], ns[j]);
    }
    gone[static_cast<std::size_t>(v)] = true;
  }
  return width;
}

/// True when every target sits at or after the block boundary and nothing else does.
inline bool is_constrained(const EliminationPlan& plan, const std::vector<VarId>& targets) {
  std::set<VarId> t(targets.begin(), targets.end());
  if (plan.block_boundary > plan.order.size()) return false;
  for (std::size_t i = 0; i < plan.order.size(); ++i) {
    if ((i >= plan.block_boundary) != (t.count(plan.order[i]) != 0)) return false;
  }
  return true;
}

}  // namespace unitsel
