#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "unitsel/circuit.hpp"
#include "unitsel/ve.hpp"

namespace unitsel {

inline constexpr NodeId kNoChoice = std::numeric_limits<NodeId>::max();

/// Per-node values, plus the chosen child of every max node.
struct EvalBuffer {
  std::vector<double> values;
  std::vector<NodeId> choice;

  EvalBuffer() = default;
  explicit EvalBuffer(std::size_t n) : values(n, 0.0), choice(n, kNoChoice) {}
};

namespace detail {

inline void check_circuit_evidence(const DecisionAC& ac, const Evidence& e, const char* op) {
  for (const auto& [v, x] : e) {
    if (v < 0 || static_cast<std::size_t>(v) >= ac.variables().size()) {
      throw InputError(std::string(op) + ": evidence on unknown variable id " + std::to_string(v));
    }
    if (x < 0 || x >= ac.cardinality(v)) {
      throw InputError(std::string(op) + ": evidence value out of range for '" +
                       ac.variables()[static_cast<std::size_t>(v)].name + "'");
    }
  }
}

inline void require_certified(const DecisionAC& ac, const std::vector<VarId>& units, const char* op) {
  if (ac.certificate().supports(units)) return;
  for (VarId u : units) {
    if (u < 0 || static_cast<std::size_t>(u) >= ac.variables().size()) {
      throw InputError(std::string(op) + ": unknown unit variable id " + std::to_string(u));
    }
  }
  if (!certify(ac, units).supports(units)) {
    throw InputError(std::string(op) + ": circuit is not certified for these unit variables");
  }
}

// Dense lookup of an evidence assignment; -1 for unassigned.
inline std::vector<int> evidence_table(const DecisionAC& ac, const Evidence& e) {
  std::vector<int> t(ac.variables().size(), -1);
  for (const auto& [v, x] : e) t[static_cast<std::size_t>(v)] = x;
  return t;
}

// Value index of the decision indicator inside sum child `c`, or -1.
inline int decision_value(const DecisionAC& ac, VarId dvar, NodeId c) {
  const auto& y = ac.node(c);
  if (y.kind == NodeKind::Indicator) return y.var == dvar ? y.value : -1;
  if (y.kind != NodeKind::Product) return -1;
  for (NodeId g : ac.children(c)) {
    const auto& z = ac.node(g);
    if (z.kind == NodeKind::Indicator && z.var == dvar) return z.value;
  }
  return -1;
}

inline bool is_subnormal(double x) { return std::fpclassify(x) == FP_SUBNORMAL; }

// Max over the children of sum `n`; ties go to the smaller decision value.
template <typename ValueOf>
inline double max_child(const DecisionAC& ac, NodeId n, ValueOf value_of, NodeId& chosen) {
  const auto& x = ac.node(n);
  double best = -1.0;
  int best_value = std::numeric_limits<int>::max();
  chosen = kNoChoice;
  for (NodeId c : ac.children(n)) {
    const double v = value_of(c);
    if (v > best) {
      best = v;
      chosen = c;
      best_value = decision_value(ac, x.var, c);
    } else if (v == best) {
      int dv = decision_value(ac, x.var, c);
      if (dv >= 0 && dv < best_value) {
        chosen = c;
        best_value = dv;
      }
    }
  }
  return chosen == kNoChoice ? 0.0 : best;
}

// Top-down trace of recorded choices from the root; reads decision values
// off the chosen children. Unreached units default to value 0.
inline Instantiation trace_argmax(const DecisionAC& ac, const std::vector<VarId>& units,
                                  const std::vector<char>& is_max, const EvalBuffer& buf) {
  Instantiation out;
  if (ac.node_count() == 0) return out;
  std::vector<char> seen(ac.node_count(), 0);
  std::vector<NodeId> stack{ac.root()};
  seen[ac.root()] = 1;
  auto push = [&](NodeId c) {
    if (!seen[c]) {
      seen[c] = 1;
      stack.push_back(c);
    }
  };
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    if (!is_max[n]) {
      if (ac.node(n).kind == NodeKind::Product) {
        for (NodeId c : ac.children(n)) push(c);
      }
      continue;
    }
    NodeId c = buf.choice[n];
    if (c == kNoChoice) continue;
    const VarId d = ac.node(n).var;
    const int v = decision_value(ac, d, c);
    if (v >= 0 && !out.contains(d)) out.assign(d, v);
    push(c);
  }
  for (VarId u : units) {
    if (!out.contains(u)) out.assign(u, 0);
  }
  // keep only unit assignments
  Instantiation units_only;
  for (VarId u : units) units_only.assign(u, out.at(u));
  return units_only;
}

}  // namespace detail

/// Bottom-up evaluation with indicators set by compatibility with `e`.
/// Returns Pr(e) on a compiled probability circuit.
inline double evaluate(const DecisionAC& ac, const Evidence& e, EvalBuffer* buf = nullptr) {
  detail::check_circuit_evidence(ac, e, "evaluate");
  if (ac.node_count() == 0) return 1.0;
  const auto table = detail::evidence_table(ac, e);
  EvalBuffer local;
  EvalBuffer& b = buf ? *buf : local;
  b = EvalBuffer(ac.node_count());
  evaluate_nodes(ac, [&](VarId v, int x) {
    int t = table[static_cast<std::size_t>(v)];
    return (t < 0 || t == x) ? 1.0 : 0.0;
  }, std::span<double>(b.values));
  return b.values[ac.root()];
}

/// Evaluation at a complete (or partial) instantiation with parameters
/// overridden per node id.
inline double evaluate_with(const DecisionAC& ac, const Evidence& e, std::span<const double> params) {
  detail::check_circuit_evidence(ac, e, "evaluate_with");
  if (ac.node_count() == 0) return 1.0;
  const auto table = detail::evidence_table(ac, e);
  std::vector<double> values(ac.node_count());
  evaluate_nodes(ac, [&](VarId v, int x) {
    int t = table[static_cast<std::size_t>(v)];
    return (t < 0 || t == x) ? 1.0 : 0.0;
  }, std::span<double>(values), params);
  return values[ac.root()];
}

/// max_u Pr(u, e) in one bottom-up pass: sums whose vars meet U become max
/// nodes. The maximizer is read off by a top-down trace.
inline MapResult ac_map(const DecisionAC& ac, const std::vector<VarId>& units, const Evidence& e) {
  detail::Timer timer;
  auto U = detail::sorted_unique(units);
  detail::require_certified(ac, U, "ac_map");
  detail::check_circuit_evidence(ac, e, "ac_map");
  MapResult result;
  if (ac.node_count() == 0) {
    result.value = 1.0;
    for (VarId u : U) result.argmax.assign(u, 0);
    return result;
  }
  const auto table = detail::evidence_table(ac, e);
  const auto depends = ac.depends_on(U);
  std::vector<char> is_max(ac.node_count(), 0);
  EvalBuffer buf(ac.node_count());
  auto& val = buf.values;
  std::uint64_t ops = 0;
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    const auto& x = ac.node(n);
    switch (x.kind) {
      case NodeKind::Indicator: {
        int t = table[static_cast<std::size_t>(x.var)];
        val[n] = (t < 0 || t == x.value) ? 1.0 : 0.0;
        ++ops;
        break;
      }
      case NodeKind::Parameter:
        val[n] = x.param;
        ++ops;
        break;
      case NodeKind::Product: {
        double v = 1.0;
        for (NodeId c : ac.children(n)) v *= val[c];
        ops += x.count;
        val[n] = v;
        break;
      }
      case NodeKind::Sum:
        ops += x.count;
        if (depends[n]) {
          is_max[n] = 1;
          val[n] = detail::max_child(ac, n, [&](NodeId c) { return val[c]; }, buf.choice[n]);
        } else {
          double v = 0.0;
          for (NodeId c : ac.children(n)) v += val[c];
          val[n] = v;
        }
        break;
    }
    if (detail::is_subnormal(val[n])) ++result.stats.subnormals;
  }
  result.value = val[ac.root()];
  result.argmax = detail::trace_argmax(ac, U, is_max, buf);
  result.stats.ops = ops;
  result.stats.elapsed = timer.seconds();
  return result;
}

/// Nodes outside AC_U (vars disjoint from U) that feed a node of AC_U, plus
/// the root when it lies outside AC_U. These are the leaves of the circuit
/// projected onto U.
inline std::vector<char> projection_frontier(const DecisionAC& ac, const std::vector<char>& depends) {
  std::vector<char> frontier(ac.node_count(), 0);
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    if (!depends[n]) continue;
    for (NodeId c : ac.children(n)) {
      if (!depends[c]) frontier[c] = 1;
    }
  }
  if (ac.node_count() && !depends[ac.root()]) frontier[ac.root()] = 1;
  return frontier;
}

/// Quotients buf1/buf2 at the projection frontier (0/0 is 0); every other
/// entry of the result is 0. A nonzero value over zero is a SupportError.
inline EvalBuffer divide_parametrizations(const DecisionAC& ac, const std::vector<VarId>& units,
                                          const EvalBuffer& buf1, const EvalBuffer& buf2,
                                          std::uint64_t* ops = nullptr) {
  if (buf1.values.size() != ac.node_count() || buf2.values.size() != ac.node_count()) {
    throw InputError("divide_parametrizations: buffers do not match the circuit");
  }
  const auto depends = ac.depends_on(detail::sorted_unique(units));
  const auto frontier = projection_frontier(ac, depends);
  EvalBuffer out(ac.node_count());
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    if (!frontier[n]) continue;
    const double a = buf1.values[n];
    const double b = buf2.values[n];
    if (ops) ++*ops;
    if (b == 0.0) {
      if (a != 0.0) {
        throw SupportError("divide_parametrizations: node " + std::to_string(n) +
                           " has value " + std::to_string(a) + " over zero");
      }
      out.values[n] = 0.0;
    } else {
      out.values[n] = a / b;
    }
  }
  return out;
}

/// Evaluates the nodes outside AC_U (vars disjoint from U) under `e`.
inline void evaluate_outside(const DecisionAC& ac, const std::vector<char>& depends, const Evidence& e,
                             EvalBuffer& buf, SolveStats* stats = nullptr) {
  const auto table = detail::evidence_table(ac, e);
  buf = EvalBuffer(ac.node_count());
  auto& val = buf.values;
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    if (depends[n]) continue;
    const auto& x = ac.node(n);
    switch (x.kind) {
      case NodeKind::Indicator: {
        int t = table[static_cast<std::size_t>(x.var)];
        val[n] = (t < 0 || t == x.value) ? 1.0 : 0.0;
        if (stats) ++stats->ops;
        break;
      }
      case NodeKind::Parameter:
        val[n] = x.param;
        if (stats) ++stats->ops;
        break;
      case NodeKind::Product: {
        double v = 1.0;
        for (NodeId c : ac.children(n)) v *= val[c];
        val[n] = v;
        if (stats) stats->ops += x.count;
        break;
      }
      case NodeKind::Sum: {
        double v = 0.0;
        for (NodeId c : ac.children(n)) v += val[c];
        val[n] = v;
        if (stats) stats->ops += x.count;
        break;
      }
    }
    if (stats && detail::is_subnormal(val[n])) ++stats->subnormals;
  }
}

namespace detail {

// Max pass over AC_U: unit indicators are 1, frontier nodes take their
// value from `leaf`, sums become max nodes.
inline double max_pass(const DecisionAC& ac, const std::vector<char>& depends, const EvalBuffer& leaf,
                       EvalBuffer& buf, SolveStats& stats) {
  buf = EvalBuffer(ac.node_count());
  auto& val = buf.values;
  auto value_of = [&](NodeId c) { return depends[c] ? val[c] : leaf.values[c]; };
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    if (!depends[n]) continue;
    const auto& x = ac.node(n);
    switch (x.kind) {
      case NodeKind::Indicator:
        val[n] = 1.0;
        ++stats.ops;
        break;
      case NodeKind::Parameter:
        val[n] = x.param;
        ++stats.ops;
        break;
      case NodeKind::Product: {
        double v = 1.0;
        for (NodeId c : ac.children(n)) v *= value_of(c);
        val[n] = v;
        stats.ops += x.count;
        break;
      }
      case NodeKind::Sum:
        val[n] = max_child(ac, n, value_of, buf.choice[n]);
        stats.ops += x.count;
        break;
    }
    if (is_subnormal(val[n])) ++stats.subnormals;
  }
  return value_of(ac.root());
}

}  // namespace detail

/// R-MAP on a decision circuit certified for U. Pass 1 evaluates everything
/// outside AC_U under e1e2, pass 2 under e2; their quotients at the frontier
/// parametrize the projected circuit, which is maximized in a final pass.
inline RmapResult ac_rmap(const DecisionAC& ac, const std::vector<VarId>& units, const Evidence& e1,
                          const Evidence& e2) {
  detail::Timer timer;
  auto U = detail::sorted_unique(units);
  detail::require_certified(ac, U, "ac_rmap");
  detail::check_circuit_evidence(ac, e1, "ac_rmap");
  detail::check_circuit_evidence(ac, e2, "ac_rmap");
  detail::require_disjoint(U, e1, e2, "ac_rmap");
  const Evidence e12 = Evidence::combine(e1, e2);

  RmapResult result;
  auto& stats = result.stats;
  if (ac.node_count() == 0) {
    result.value = 1.0;
    for (VarId u : U) result.argmax.assign(u, 0);
    return result;
  }
  const auto depends = ac.depends_on(U);
  EvalBuffer pass1, pass2;
  evaluate_outside(ac, depends, e12, pass1, &stats);
  evaluate_outside(ac, depends, e2, pass2, &stats);
  EvalBuffer theta = divide_parametrizations(ac, U, pass1, pass2, &stats.ops);

  std::vector<char> is_max(ac.node_count(), 0);
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    is_max[n] = depends[n] && ac.node(n).kind == NodeKind::Sum;
  }
  EvalBuffer best;
  double value = detail::max_pass(ac, depends, theta, best, stats);
  if (value == 0.0) {
    // Every u scores 0: fall back to a u with Pr(u, e2) > 0.
    EvalBuffer feasible;
    SolveStats extra;
    if (detail::max_pass(ac, depends, pass2, feasible, extra) == 0.0) throw InconsistentEvidenceError();
    stats.subnormals += extra.subnormals;
    best = std::move(feasible);
  }
  result.value = value;
  result.argmax = detail::trace_argmax(ac, U, is_max, best);
  stats.elapsed = timer.seconds();
  return result;
}

}  // namespace unitsel
