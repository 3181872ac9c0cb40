#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "unitsel/circuit.hpp"
#include "unitsel/objective_function.hpp"
#include "unitsel/result.hpp"

// Brute-force reference implementations, written from the definitions.
// Nothing here calls the factor, elimination or circuit solvers.

namespace unitsel {

inline constexpr double kDefaultEnumerationBudget = 16777216.0;  // 2^24 complete paths

/// Sum over all complete instantiations compatible with `e` of the product
/// of CPT entries. Variables are visited in topological order and branches
/// with a zero entry are cut, so the budget counts nonzero complete paths.
inline double joint_enumerate(const Network& net, const Evidence& e,
                              double budget = kDefaultEnumerationBudget) {
  check_evidence(net, e);
  const auto order = topological_order(net);
  const std::size_t n = order.size();
  std::vector<int> value(net.size(), 0);
  std::vector<int> fixed(net.size(), -1);
  for (const auto& [v, x] : e) fixed[static_cast<std::size_t>(v)] = x;
  auto value_of = [&](VarId v) { return value[static_cast<std::size_t>(v)]; };

  double leaves = 0.0;
  double total = 0.0;
  // iterative DFS: level k holds the next value to try for order[k]
  std::vector<int> next(n + 1, 0);
  std::vector<double> weight(n + 1, 1.0);
  std::size_t k = 0;
  next[0] = 0;
  while (true) {
    if (k == n) {
      total += weight[n];
      if (++leaves > budget) throw BudgetError("joint_enumerate: enumeration budget exceeded");
      if (k == 0) break;
      --k;
      continue;
    }
    const VarId v = order[k];
    const auto vi = static_cast<std::size_t>(v);
    const int card = net.cardinality(v);
    int x = next[k];
    if (fixed[vi] >= 0) {
      if (x > fixed[vi]) x = card;
      else x = fixed[vi];
    }
    double p = 0.0;
    for (; x < card; ++x) {
      value[vi] = x;
      p = net.probability(v, value_of);
      if (p != 0.0) break;
      if (fixed[vi] >= 0) {
        x = card;
        break;
      }
    }
    if (x >= card) {
      if (k == 0) break;
      --k;
      continue;
    }
    next[k] = x + 1;
    weight[k + 1] = weight[k] * p;
    ++k;
    next[k] = 0;
  }
  return total;
}

/// Every instantiation of `vars` (sorted), last variable fastest.
template <typename Fn>
void for_each_instantiation(const Network& net, const std::vector<VarId>& vars, Fn&& fn) {
  std::vector<int> digit(vars.size(), 0);
  while (true) {
    Instantiation u;
    for (std::size_t i = 0; i < vars.size(); ++i) u.assign(vars[i], digit[i]);
    fn(u);
    std::size_t i = vars.size();
    while (i > 0) {
      --i;
      if (++digit[i] < net.cardinality(vars[i])) break;
      digit[i] = 0;
      if (i == 0) return;
    }
    if (vars.empty()) return;
  }
}

/// argmax_u Pr(e1 | u, e2) by enumerating every u; u with Pr(u, e2) = 0 are
/// skipped. Ties keep the first u in lexicographic order.
inline RmapResult brute_rmap(const Network& net, std::vector<VarId> units, const Evidence& e1,
                             const Evidence& e2, double budget = kDefaultEnumerationBudget) {
  std::sort(units.begin(), units.end());
  units.erase(std::unique(units.begin(), units.end()), units.end());
  for (VarId u : units) {
    if (!net.contains(u)) throw InputError("brute_rmap: unknown unit variable id " + std::to_string(u));
    if (e1.contains(u) || e2.contains(u)) throw InputError("brute_rmap: unit variable carries evidence");
  }
  const Evidence e12 = Evidence::combine(e1, e2);
  RmapResult best;
  bool found = false;
  for_each_instantiation(net, units, [&](const Instantiation& u) {
    const double den = joint_enumerate(net, Evidence::combine(e2, u), budget);
    if (den == 0.0) return;
    const double num = joint_enumerate(net, Evidence::combine(e12, u), budget);
    const double value = num / den;
    if (!found || value > best.value) {
      best.value = value;
      best.argmax = u;
      found = true;
    }
  });
  if (!found) throw InconsistentEvidenceError();
  return best;
}

/// Pr(e1 | u, e2) for one u; 0 when Pr(u, e2) = 0.
inline double brute_conditional(const Network& net, const Instantiation& u, const Evidence& e1,
                                const Evidence& e2, double budget = kDefaultEnumerationBudget) {
  const Evidence cond = Evidence::combine(e2, u);
  const double den = joint_enumerate(net, cond, budget);
  if (den == 0.0) return 0.0;
  return joint_enumerate(net, Evidence::combine(cond, e1), budget) / den;
}

struct CounterfactualValue {
  double value = 0.0;
  bool defined = false;  // false when Pr(u, evidence) = 0
  double numerator = 0.0;
  double denominator = 0.0;
};

/// Direct twin-world semantics on an SCM with deterministic internal CPTs:
/// enumerate the exogenous roots, propagate the factual world and the two
/// intervened worlds, and accumulate Pr(r) where the events hold.
inline CounterfactualValue counterfactual_oracle(const Network& scm, const CounterfactualComponent& comp,
                                                 const Instantiation& u,
                                                 double budget = kDefaultEnumerationBudget) {
  const auto order = topological_order(scm);
  std::vector<VarId> roots;
  for (VarId v : order) {
    if (scm.is_root(v)) roots.push_back(v);
  }
  double space = 1.0;
  for (VarId r : roots) space *= scm.cardinality(r);
  if (space > budget) throw BudgetError("counterfactual_oracle: too many exogenous instantiations");

  const std::size_t n = scm.size();
  std::vector<int> forced[3];
  for (auto& f : forced) f.assign(n, -1);
  for (const auto& t : comp.treatments) forced[t.world][static_cast<std::size_t>(t.var)] = t.value;

  std::vector<std::vector<int>> world(3, std::vector<int>(n, 0));
  CounterfactualValue out;
  std::vector<int> digit(roots.size(), 0);
  while (true) {
    double pr = 1.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      const VarId r = roots[i];
      for (int w = 0; w < 3; ++w) world[static_cast<std::size_t>(w)][static_cast<std::size_t>(r)] = digit[i];
      pr *= scm.cpt(r).table[static_cast<std::size_t>(digit[i])];
    }
    if (pr > 0.0) {
      for (int w = 0; w < 3; ++w) {
        auto& val = world[static_cast<std::size_t>(w)];
        auto value_of = [&](VarId p) { return val[static_cast<std::size_t>(p)]; };
        for (VarId v : order) {
          const auto vi = static_cast<std::size_t>(v);
          if (forced[w][vi] >= 0) {
            val[vi] = forced[w][vi];
            continue;
          }
          if (scm.is_root(v)) continue;
          int chosen = -1;
          for (int x = 0; x < scm.cardinality(v); ++x) {
            val[vi] = x;
            const double p = scm.probability(v, value_of);
            if (p == 1.0) {
              chosen = x;
            } else if (p != 0.0) {
              throw InputError("counterfactual_oracle: internal CPT of '" + scm.name(v) +
                               "' is not deterministic");
            }
          }
          if (chosen < 0) {
            throw InputError("counterfactual_oracle: internal CPT of '" + scm.name(v) +
                             "' is not deterministic");
          }
          val[vi] = chosen;
        }
      }
      bool cond = true;
      for (const auto& [v, x] : comp.evidence) cond = cond && world[0][static_cast<std::size_t>(v)] == x;
      for (const auto& [v, x] : u) cond = cond && world[0][static_cast<std::size_t>(v)] == x;
      if (cond) {
        out.denominator += pr;
        bool hit = true;
        for (const auto& o : comp.outcomes) {
          hit = hit && world[static_cast<std::size_t>(o.world)][static_cast<std::size_t>(o.var)] == o.value;
        }
        if (hit) out.numerator += pr;
      }
    }
    std::size_t i = roots.size();
    bool done = roots.empty();
    while (i > 0) {
      --i;
      if (++digit[i] < scm.cardinality(roots[i])) break;
      digit[i] = 0;
      if (i == 0) done = true;
    }
    if (done) break;
  }
  out.defined = out.denominator > 0.0;
  out.value = out.defined ? out.numerator / out.denominator : 0.0;
  return out;
}

/// A complete subcircuit: one child per visited sum, every child of a
/// visited product, unfolded as a tree from the root.
struct Subcircuit {
  std::vector<std::pair<NodeId, NodeId>> chosen_edges;  // (sum, child)
  Instantiation term;
  double coefficient = 1.0;
};

/// All complete subcircuits whose term is exactly `x`. Partial selections
/// whose indicators contradict `x` are dropped as soon as they appear.
inline std::vector<Subcircuit> enumerate_subcircuits(const DecisionAC& ac, const Instantiation& x,
                                                     std::size_t budget = 65536) {
  if (ac.node_count() == 0) return {Subcircuit{}};
  std::vector<std::vector<Subcircuit>> memo(ac.node_count());
  auto merge = [&](const Subcircuit& a, const Subcircuit& b, Subcircuit& out) {
    out = a;
    out.chosen_edges.insert(out.chosen_edges.end(), b.chosen_edges.begin(), b.chosen_edges.end());
    out.coefficient *= b.coefficient;
    for (const auto& [v, val] : b.term) {
      auto have = out.term.get(v);
      if (have && *have != val) return false;
      out.term.assign(v, val);
    }
    return true;
  };
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    const auto& node = ac.node(n);
    auto& list = memo[n];
    switch (node.kind) {
      case NodeKind::Indicator: {
        auto want = x.get(node.var);
        if (want && *want == node.value) {
          Subcircuit s;
          s.term.assign(node.var, node.value);
          list.push_back(std::move(s));
        }
        break;
      }
      case NodeKind::Parameter: {
        Subcircuit s;
        s.coefficient = node.param;
        list.push_back(std::move(s));
        break;
      }
      case NodeKind::Sum:
        for (NodeId c : ac.children(n)) {
          for (const auto& s : memo[c]) {
            Subcircuit t = s;
            t.chosen_edges.insert(t.chosen_edges.begin(), {n, c});
            list.push_back(std::move(t));
          }
          if (list.size() > budget) throw BudgetError("enumerate_subcircuits: budget exceeded");
        }
        break;
      case NodeKind::Product: {
        list.push_back(Subcircuit{});
        for (NodeId c : ac.children(n)) {
          std::vector<Subcircuit> next;
          for (const auto& a : list) {
            for (const auto& b : memo[c]) {
              Subcircuit m;
              if (merge(a, b, m)) next.push_back(std::move(m));
              if (next.size() > budget) throw BudgetError("enumerate_subcircuits: budget exceeded");
            }
          }
          list = std::move(next);
        }
        break;
      }
    }
  }
  std::vector<Subcircuit> out;
  for (auto& s : memo[ac.root()]) {
    if (s.term == x) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace unitsel
