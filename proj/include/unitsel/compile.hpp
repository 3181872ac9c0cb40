#pragma once

#include <string>
#include <vector>

#include "unitsel/circuit.hpp"
#include "unitsel/elimination.hpp"
#include "unitsel/factor.hpp"

namespace unitsel {

namespace detail {

// A factor whose entries are circuit nodes. All entries share one vars set:
// the variables already eliminated into it.
struct SymbolicFactor {
  std::vector<VarId> scope;
  std::vector<int> cards;
  std::vector<NodeId> entries;
  std::vector<VarId> eliminated;
};

}  // namespace detail

/// Compiles `net` into a decision circuit by symbolic variable elimination
/// along `plan`. Eliminating X turns each entry of the combined bucket into
/// a decision node  sum_x  lambda_x * (product of bucket entries at x).
/// Because non-units go first, unit-decision sums end up above every other
/// sum, which is what linear-time MAP and R-MAP over `units` need.
inline DecisionAC compile_ve(const Network& net, const std::vector<VarId>& units,
                             const EliminationPlan& plan, const Deadline& deadline = Deadline::none()) {
  if (!is_constrained(plan, units)) {
    throw InputError("compile_ve: elimination plan is not constrained to the given units");
  }
  if (plan.order.size() != net.size()) throw InputError("compile_ve: plan does not cover the network");

  AcBuilder b(net.variables());
  std::vector<detail::SymbolicFactor> pool;
  for (const auto& v : net.variables()) {
    const Cpt& c = net.cpt(v.id);
    detail::SymbolicFactor f;
    f.scope = c.parents;
    f.scope.push_back(v.id);
    for (VarId s : f.scope) f.cards.push_back(net.cardinality(s));
    f.entries.reserve(c.table.size());
    for (std::size_t k = 0; k < c.table.size(); ++k) {
      const double p = c.table[k];
      if (p == 0.0) f.entries.push_back(b.zero());
      else if (p == 1.0) f.entries.push_back(b.one());
      else f.entries.push_back(b.parameter(p, "cpt:" + v.name + ":" + std::to_string(k)));
    }
    pool.push_back(std::move(f));
  }

  std::vector<NodeId> children;
  for (VarId x : plan.order) {
    std::vector<detail::SymbolicFactor> bucket, rest;
    for (auto& f : pool) {
      if (std::find(f.scope.begin(), f.scope.end(), x) != f.scope.end()) bucket.push_back(std::move(f));
      else rest.push_back(std::move(f));
    }
    pool = std::move(rest);

    // Layout: result scope, then x fastest.
    detail::SymbolicFactor out;
    std::vector<VarId> eliminated{x};
    for (const auto& f : bucket) {
      for (std::size_t k = 0; k < f.scope.size(); ++k) {
        VarId v = f.scope[k];
        if (v != x && std::find(out.scope.begin(), out.scope.end(), v) == out.scope.end()) {
          out.scope.push_back(v);
          out.cards.push_back(f.cards[k]);
        }
      }
      eliminated.insert(eliminated.end(), f.eliminated.begin(), f.eliminated.end());
    }
    std::sort(eliminated.begin(), eliminated.end());
    out.eliminated = eliminated;
    const int card_x = net.cardinality(x);
    std::vector<VarId> full_scope = out.scope;
    full_scope.push_back(x);
    std::vector<int> full_cards = out.cards;
    full_cards.push_back(card_x);
    double entries = 1.0;
    for (int c : full_cards) entries *= c;
    if (entries > kMaxFactorEntries) throw ScopeCapError(full_scope.size(), entries);

    std::vector<std::vector<std::size_t>> strides;
    for (const auto& f : bucket) {
      std::vector<std::size_t> own(f.scope.size(), 1);
      for (std::size_t k = f.scope.size(); k-- > 1;) own[k - 1] = own[k] * static_cast<std::size_t>(f.cards[k]);
      std::vector<std::size_t> s(full_scope.size(), 0);
      for (std::size_t k = 0; k < full_scope.size(); ++k) {
        auto it = std::find(f.scope.begin(), f.scope.end(), full_scope[k]);
        if (it != f.scope.end()) s[k] = own[static_cast<std::size_t>(it - f.scope.begin())];
      }
      strides.push_back(std::move(s));
    }

    const auto vars_set = b.intern(eliminated);
    std::vector<NodeId> lambdas;
    for (int v = 0; v < card_x; ++v) lambdas.push_back(b.indicator(x, v));

    const auto rows = static_cast<std::size_t>(entries) / static_cast<std::size_t>(card_x);
    out.entries.reserve(rows);
    std::vector<int> digit(full_scope.size(), 0);
    std::vector<std::size_t> index(bucket.size(), 0);
    std::vector<NodeId> branches;
    for (std::size_t r = 0; r < rows; ++r) {
      branches.clear();
      for (int v = 0; v < card_x; ++v) {
        children.clear();
        children.push_back(lambdas[static_cast<std::size_t>(v)]);
        for (std::size_t j = 0; j < bucket.size(); ++j) children.push_back(bucket[j].entries[index[j]]);
        branches.push_back(b.product(children, vars_set));
        // odometer step over (result scope, x)
        for (std::size_t k = full_scope.size(); k-- > 0;) {
          if (++digit[k] < full_cards[k]) {
            for (std::size_t j = 0; j < bucket.size(); ++j) index[j] += strides[j][k];
            break;
          }
          digit[k] = 0;
          for (std::size_t j = 0; j < bucket.size(); ++j) {
            index[j] -= strides[j][k] * static_cast<std::size_t>(full_cards[k] - 1);
          }
        }
      }
      out.entries.push_back(b.sum(x, branches, vars_set));
      if ((r & 1023) == 0) deadline.check();
    }
    pool.push_back(std::move(out));
    deadline.check();
  }

  NodeId root;
  if (pool.empty()) {
    root = b.one();
  } else if (pool.size() == 1) {
    root = pool[0].entries.at(0);
  } else {
    std::vector<NodeId> tops;
    std::vector<VarId> all;
    for (const auto& f : pool) {
      tops.push_back(f.entries.at(0));
      all.insert(all.end(), f.eliminated.begin(), f.eliminated.end());
    }
    root = b.product(tops, b.intern(all));
  }
  DecisionAC ac = std::move(b).finish(root, units);
  ac.set_certificate(certify(ac, ac.unit_vars()));
  return ac;
}

/// Compiles with the constrained min-fill order for `units`.
inline DecisionAC compile_ve(const Network& net, const std::vector<VarId>& units,
                             const Deadline& deadline = Deadline::none()) {
  return compile_ve(net, units, minfill_order(net, units), deadline);
}

}  // namespace unitsel
