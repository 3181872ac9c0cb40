#pragma once

#include <chrono>
#include <cstdint>
#include <set>
#include <vector>

#include "unitsel/elimination.hpp"
#include "unitsel/factor.hpp"
#include "unitsel/result.hpp"

namespace unitsel {

namespace detail {

inline std::vector<VarId> sorted_unique(std::vector<VarId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline void require_disjoint(const std::vector<VarId>& units, const Evidence& a, const Evidence& b,
                             const char* op) {
  for (VarId u : units) {
    if (a.contains(u) || b.contains(u)) {
      throw InputError(std::string(op) + ": unit variable id " + std::to_string(u) +
                       " also carries evidence");
    }
  }
  for (const auto& [v, x] : a) {
    if (b.contains(v)) {
      throw InputError(std::string(op) + ": e1 and e2 share variable id " + std::to_string(v));
    }
  }
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Pulls every factor mentioning `x` out of `pool`.
template <typename T, typename Scope>
std::vector<T> take_bucket(std::vector<T>& pool, VarId x, Scope scope_of) {
  std::vector<T> bucket;
  std::vector<T> rest;
  for (auto& f : pool) {
    const auto& s = scope_of(f);
    if (std::find(s.begin(), s.end(), x) != s.end()) bucket.push_back(std::move(f));
    else rest.push_back(std::move(f));
  }
  pool = std::move(rest);
  return bucket;
}

struct MaxStep {
  VarId var;
  std::vector<VarId> scope;  // scope of the maxed result
  std::vector<int> cards;
  std::vector<int> argmax;
};

// Max-product elimination of `targets` (in plan order) over `pool`, then
// back-trace. Returns the optimum and the maximizer.
inline std::pair<double, Instantiation> max_phase(std::vector<Factor> pool,
                                                  const std::vector<VarId>& order,
                                                  std::size_t from, SolveStats& stats,
                                                  const Deadline& deadline) {
  std::vector<MaxStep> steps;
  for (std::size_t i = from; i < order.size(); ++i) {
    const VarId x = order[i];
    auto bucket = take_bucket(pool, x, [](const Factor& f) -> const auto& { return f.scope(); });
    Factor prod;
    for (auto& f : bucket) {
      prod = multiply(prod, f);
      stats.ve_size += prod.size();
      stats.peak_scope = std::max(stats.peak_scope, prod.scope().size());
    }
    if (!prod.contains(x)) {
      // variable without any factor; its value is irrelevant
      steps.push_back(MaxStep{x, {}, {}, {0}});
      continue;
    }
    auto r = max_out(prod, x);
    stats.ve_size += r.values.size();
    steps.push_back(MaxStep{x, r.values.scope(), r.values.cards(), std::move(r.argmax)});
    pool.push_back(std::move(r.values));
    deadline.check();
  }
  double value = 1.0;
  for (const auto& f : pool) value *= f.values().at(0);

  Instantiation best;
  for (std::size_t k = steps.size(); k-- > 0;) {
    const auto& s = steps[k];
    std::size_t index = 0;
    for (std::size_t j = 0; j < s.scope.size(); ++j) {
      index = index * static_cast<std::size_t>(s.cards[j]) + static_cast<std::size_t>(best.at(s.scope[j]));
    }
    best.assign(s.var, s.argmax[index]);
  }
  return {value, best};
}

}  // namespace detail

/// Pr(query, e) as a factor over `query` in ascending id order.
inline Factor ve_marginal(const Network& net, const std::vector<VarId>& query, const Evidence& e,
                          SolveStats* stats_out = nullptr, const Deadline& deadline = Deadline::none()) {
  check_evidence(net, e);
  auto q = detail::sorted_unique(query);
  for (VarId v : q) {
    if (!net.contains(v)) throw InputError("ve_marginal: unknown query variable");
    if (e.contains(v)) throw InputError("ve_marginal: query variable also carries evidence");
  }
  SolveStats stats;
  auto plan = minfill_order(net, q);
  stats.width = plan.width;
  std::vector<Factor> pool;
  for (const auto& v : net.variables()) {
    pool.push_back(reduce(factor_from_cpt(net, v.id), e));
    stats.ve_size += pool.back().size();
  }
  for (std::size_t i = 0; i < plan.block_boundary; ++i) {
    const VarId x = plan.order[i];
    auto bucket = detail::take_bucket(pool, x, [](const Factor& f) -> const auto& { return f.scope(); });
    Factor prod;
    for (auto& f : bucket) {
      prod = multiply(prod, f);
      stats.ve_size += prod.size();
      stats.peak_scope = std::max(stats.peak_scope, prod.scope().size());
    }
    if (!prod.contains(x)) continue;
    pool.push_back(sum_out(prod, x));
    stats.ve_size += pool.back().size();
    deadline.check();
  }
  Factor result;
  for (auto& f : pool) {
    result = multiply(result, f);
    stats.ve_size += result.size();
  }
  if (stats_out) *stats_out = stats;
  return reorder(result, q);
}

/// max_u Pr(u, e) and its maximizer.
inline MapResult ve_map(const Network& net, const std::vector<VarId>& units, const Evidence& e,
                        const Deadline& deadline = Deadline::none()) {
  detail::Timer timer;
  check_evidence(net, e);
  auto U = detail::sorted_unique(units);
  detail::require_disjoint(U, e, Evidence{}, "ve_map");
  MapResult result;
  auto plan = minfill_order(net, U);
  result.stats.width = plan.width;
  std::vector<Factor> pool;
  for (const auto& v : net.variables()) {
    pool.push_back(reduce(factor_from_cpt(net, v.id), e));
    result.stats.ve_size += pool.back().size();
  }
  for (std::size_t i = 0; i < plan.block_boundary; ++i) {
    const VarId x = plan.order[i];
    auto bucket = detail::take_bucket(pool, x, [](const Factor& f) -> const auto& { return f.scope(); });
    Factor prod;
    for (auto& f : bucket) {
      prod = multiply(prod, f);
      result.stats.ve_size += prod.size();
      result.stats.peak_scope = std::max(result.stats.peak_scope, prod.scope().size());
    }
    if (!prod.contains(x)) continue;
    pool.push_back(sum_out(prod, x));
    result.stats.ve_size += pool.back().size();
    deadline.check();
  }
  auto [value, best] = detail::max_phase(std::move(pool), plan.order, plan.block_boundary,
                                         result.stats, deadline);
  result.value = value;
  result.argmax = std::move(best);
  result.stats.elapsed = timer.seconds();
  return result;
}

namespace detail {

// A pass-1 factor (evidence e1e2) and its pass-2 twin (evidence e2).
struct TwinFactor {
  Factor num;
  Factor den;
};

}  // namespace detail

/// R-MAP by two variable-elimination passes run in lockstep: every product
/// and sum-out is applied to both passes, so each pass-1 factor keeps a
/// scope-identical pass-2 twin. Once the non-units are gone, twins are
/// divided pairwise and the units are maxed out of the quotients.
inline RmapResult ve_rmap(const Network& net, const std::vector<VarId>& units, const Evidence& e1,
                          const Evidence& e2, const Deadline& deadline = Deadline::none()) {
  detail::Timer timer;
  check_evidence(net, e1);
  check_evidence(net, e2);
  auto U = detail::sorted_unique(units);
  detail::require_disjoint(U, e1, e2, "ve_rmap");
  const Evidence e12 = Evidence::combine(e1, e2);

  RmapResult result;
  auto& stats = result.stats;
  auto plan = minfill_order(net, U);
  stats.width = plan.width;

  std::vector<detail::TwinFactor> pool;
  for (const auto& v : net.variables()) {
    Factor f = factor_from_cpt(net, v.id);
    pool.push_back({reduce(f, e12), reduce(f, e2)});
    stats.ve_size += 2 * f.size();
  }
  for (std::size_t i = 0; i < plan.block_boundary; ++i) {
    const VarId x = plan.order[i];
    auto bucket = detail::take_bucket(pool, x, [](const detail::TwinFactor& t) -> const auto& {
      return t.num.scope();
    });
    detail::TwinFactor prod{Factor(), Factor()};
    for (auto& t : bucket) {
      prod.num = multiply(prod.num, t.num);
      prod.den = multiply(prod.den, t.den);
      stats.ve_size += 2 * prod.num.size();
      stats.peak_scope = std::max(stats.peak_scope, prod.num.scope().size());
    }
    if (!prod.num.contains(x)) continue;
    pool.push_back({sum_out(prod.num, x), sum_out(prod.den, x)});
    stats.ve_size += 2 * pool.back().num.size();
    deadline.check();
  }

  std::vector<Factor> quotients;
  std::vector<Factor> denominators;
  for (auto& t : pool) {
    quotients.push_back(divide(t.num, t.den));
    stats.ve_size += quotients.back().size();
    denominators.push_back(std::move(t.den));
  }
  auto [value, best] = detail::max_phase(std::move(quotients), plan.order, plan.block_boundary,
                                         stats, deadline);
  if (value == 0.0) {
    // Every u scores 0; return the first u with Pr(u, e2) > 0 instead of an
    // arbitrary (possibly infeasible) one.
    auto [feasible, witness] = detail::max_phase(std::move(denominators), plan.order,
                                                 plan.block_boundary, stats, deadline);
    if (feasible == 0.0) throw InconsistentEvidenceError();
    best = std::move(witness);
  }
  result.value = value;
  result.argmax = std::move(best);
  stats.elapsed = timer.seconds();
  return result;
}

}  // namespace unitsel
