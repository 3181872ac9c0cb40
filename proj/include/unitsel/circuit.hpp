#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "unitsel/network.hpp"

namespace unitsel {

using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t { Indicator, Parameter, Sum, Product };

/// One circuit node. Children live in a shared slice table owned by the
/// circuit; `varset` indexes the interned set vars(n).
struct AcNode {
  NodeKind kind = NodeKind::Parameter;
  VarId var = -1;    // indicator variable, or decision variable of a sum (-1: none)
  int value = 0;     // indicator value index
  double param = 0;  // parameter value
  std::uint32_t label = 0;
  std::uint32_t varset = 0;
  std::uint32_t first = 0;
  std::uint32_t count = 0;
};

/// Which structural properties a checker pass confirmed, and for which units.
struct Certificate {
  bool verified = false;
  bool decomposable = false;
  bool smooth = false;
  bool decision = false;
  bool units_on_top = false;        // no unit-decision sum below a non-unit-decision sum
  bool indicators_attached = false; // indicators only under products under their own decision sums
  std::vector<VarId> units;

  bool supports(const std::vector<VarId>& u) const {
    auto a = u;
    std::sort(a.begin(), a.end());
    return verified && decomposable && smooth && decision && units_on_top &&
           indicators_attached && a == units;
  }
};

class AcBuilder;

/// Immutable decision arithmetic circuit. Node ids are a bottom-up order:
/// every child id is smaller than its parent's.
class DecisionAC {
 public:
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return children_.size(); }
  NodeId root() const { return root_; }
  const AcNode& node(NodeId n) const { return nodes_[n]; }
  const std::vector<AcNode>& nodes() const { return nodes_; }

  std::span<const NodeId> children(NodeId n) const {
    const auto& x = nodes_[n];
    return {children_.data() + x.first, x.count};
  }
  std::span<const VarId> vars(NodeId n) const {
    const auto& s = varsets_[nodes_[n].varset];
    return {s.data(), s.size()};
  }
  const std::vector<std::vector<VarId>>& varsets() const { return varsets_; }
  const std::string& label(NodeId n) const { return labels_[nodes_[n].label]; }

  const std::vector<Variable>& variables() const { return variables_; }
  int cardinality(VarId v) const { return variables_.at(static_cast<std::size_t>(v)).cardinality; }
  const std::vector<VarId>& unit_vars() const { return units_; }
  const Certificate& certificate() const { return cert_; }
  void set_certificate(Certificate c) { cert_ = std::move(c); }

  /// Per node: does vars(n) meet `units`?
  std::vector<char> depends_on(const std::vector<VarId>& units) const {
    std::vector<char> in_units(variables_.size(), 0);
    for (VarId u : units) in_units.at(static_cast<std::size_t>(u)) = 1;
    std::vector<char> set_hits(varsets_.size(), 0);
    for (std::size_t s = 0; s < varsets_.size(); ++s) {
      for (VarId v : varsets_[s]) {
        if (in_units[static_cast<std::size_t>(v)]) {
          set_hits[s] = 1;
          break;
        }
      }
    }
    std::vector<char> out(nodes_.size());
    for (std::size_t n = 0; n < nodes_.size(); ++n) out[n] = set_hits[nodes_[n].varset];
    return out;
  }

  /// Parent lists (reverse edges).
  std::vector<std::vector<NodeId>> parents() const {
    std::vector<std::vector<NodeId>> out(nodes_.size());
    for (NodeId n = 0; n < nodes_.size(); ++n) {
      for (NodeId c : children(n)) out[c].push_back(n);
    }
    return out;
  }

 private:
  friend class AcBuilder;

  std::vector<AcNode> nodes_;
  std::vector<NodeId> children_;
  std::vector<std::vector<VarId>> varsets_;
  std::vector<std::string> labels_;
  std::vector<Variable> variables_;
  std::vector<VarId> units_;
  NodeId root_ = 0;
  Certificate cert_;
};

/// Hash-consing circuit builder: structurally identical nodes are created once.
class AcBuilder {
 public:
  explicit AcBuilder(std::vector<Variable> variables)
      : table_(0, Hash{this}, Equal{this}) {
    ac_.variables_ = std::move(variables);
    ac_.varsets_.push_back({});
    varset_ids_.emplace(std::vector<VarId>{}, 0);
    ac_.labels_.push_back("");
  }

  std::size_t size() const { return ac_.nodes_.size(); }
  std::size_t edges() const { return ac_.children_.size(); }
  const AcNode& node(NodeId n) const { return ac_.nodes_[n]; }
  std::span<const VarId> vars(NodeId n) const {
    const auto& s = ac_.varsets_[ac_.nodes_[n].varset];
    return {s.data(), s.size()};
  }
  std::uint32_t varset_of(NodeId n) const { return ac_.nodes_[n].varset; }
  const std::vector<VarId>& varset(std::uint32_t id) const { return ac_.varsets_[id]; }

  NodeId zero() { return parameter(0.0, "0"); }
  NodeId one() { return parameter(1.0, "1"); }
  bool is_zero(NodeId n) const {
    const auto& x = ac_.nodes_[n];
    return x.kind == NodeKind::Parameter && x.param == 0.0;
  }
  bool is_one(NodeId n) const {
    const auto& x = ac_.nodes_[n];
    return x.kind == NodeKind::Parameter && x.param == 1.0;
  }

  std::uint32_t intern(std::vector<VarId> vars) {
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    auto it = varset_ids_.find(vars);
    if (it != varset_ids_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(ac_.varsets_.size());
    ac_.varsets_.push_back(vars);
    varset_ids_.emplace(std::move(vars), id);
    return id;
  }

  std::uint32_t union_of(std::span<const NodeId> nodes) {
    std::vector<VarId> all;
    for (NodeId c : nodes) {
      auto v = vars(c);
      all.insert(all.end(), v.begin(), v.end());
    }
    return intern(std::move(all));
  }

  NodeId indicator(VarId var, int value) {
    AcNode n;
    n.kind = NodeKind::Indicator;
    n.var = var;
    n.value = value;
    n.varset = intern({var});
    return add(n, {});
  }

  /// Parameters are shared by value; the first label seen is kept.
  NodeId parameter(double value, std::string_view label) {
    if (value == 0.0) value = 0.0;  // fold -0
    AcNode n;
    n.kind = NodeKind::Parameter;
    n.param = value;
    n.label = static_cast<std::uint32_t>(ac_.labels_.size());
    ac_.labels_.emplace_back(label);
    NodeId id = add(n, {});
    if (ac_.nodes_[id].label != n.label) ac_.labels_.pop_back();
    return id;
  }

  NodeId product(std::vector<NodeId> children) {
    auto vs = union_of(children);
    return product(std::move(children), vs);
  }
  /// Product with an explicitly supplied vars(n) (must cover the children's).
  NodeId product(std::vector<NodeId> children, std::uint32_t varset) {
    std::sort(children.begin(), children.end());
    AcNode n;
    n.kind = NodeKind::Product;
    n.varset = varset;
    return add(n, children);
  }

  NodeId sum(VarId dvar, std::vector<NodeId> children) {
    auto vs = union_of(children);
    return sum(dvar, std::move(children), vs);
  }
  NodeId sum(VarId dvar, std::vector<NodeId> children, std::uint32_t varset) {
    AcNode n;
    n.kind = NodeKind::Sum;
    n.var = dvar;
    n.varset = varset;
    return add(n, children);
  }

  DecisionAC finish(NodeId root, std::vector<VarId> units) && {
    std::sort(units.begin(), units.end());
    units.erase(std::unique(units.begin(), units.end()), units.end());
    ac_.root_ = root;
    ac_.units_ = std::move(units);
    table_.clear();
    varset_ids_.clear();
    return std::move(ac_);
  }

 private:
  struct Hash {
    const AcBuilder* b;
    std::size_t operator()(NodeId id) const {
      const auto& n = b->ac_.nodes_[id];
      std::uint64_t h = static_cast<std::uint64_t>(n.kind) * 0x9E3779B97F4A7C15ULL;
      auto mix = [&](std::uint64_t x) {
        h ^= x + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      };
      mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(n.var)));
      mix(static_cast<std::uint64_t>(n.value));
      mix(std::bit_cast<std::uint64_t>(n.param));
      mix(n.varset);
      for (std::uint32_t k = 0; k < n.count; ++k) mix(b->ac_.children_[n.first + k]);
      return static_cast<std::size_t>(h);
    }
  };
  struct Equal {
    const AcBuilder* b;
    bool operator()(NodeId x, NodeId y) const {
      const auto& a = b->ac_.nodes_[x];
      const auto& c = b->ac_.nodes_[y];
      if (a.kind != c.kind || a.var != c.var || a.value != c.value || a.varset != c.varset ||
          a.count != c.count || std::bit_cast<std::uint64_t>(a.param) != std::bit_cast<std::uint64_t>(c.param)) {
        return false;
      }
      return std::equal(b->ac_.children_.begin() + a.first, b->ac_.children_.begin() + a.first + a.count,
                        b->ac_.children_.begin() + c.first);
    }
  };

  // Appends the candidate, then drops it again if an equal node already exists.
  NodeId add(AcNode n, std::span<const NodeId> children) {
    n.first = static_cast<std::uint32_t>(ac_.children_.size());
    n.count = static_cast<std::uint32_t>(children.size());
    ac_.children_.insert(ac_.children_.end(), children.begin(), children.end());
    auto id = static_cast<NodeId>(ac_.nodes_.size());
    ac_.nodes_.push_back(n);
    auto [it, inserted] = table_.insert(id);
    if (!inserted) {
      ac_.nodes_.pop_back();
      ac_.children_.resize(n.first);
      return *it;
    }
    return id;
  }

  struct VecHash {
    std::size_t operator()(const std::vector<VarId>& v) const {
      std::size_t h = v.size();
      for (VarId x : v) h ^= static_cast<std::size_t>(x) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      return h;
    }
  };

  DecisionAC ac_;
  std::unordered_set<NodeId, Hash, Equal> table_;
  std::unordered_map<std::vector<VarId>, std::uint32_t, VecHash> varset_ids_;
};

inline std::size_t ac_size(const DecisionAC& ac) { return ac.edge_count(); }

/// Bottom-up evaluation into `out` (one slot per node). Indicators take the
/// value returned by `indicator(var, value)`; `params`, when non-empty,
/// overrides parameter values per node id.
template <typename IndicatorFn>
void evaluate_nodes(const DecisionAC& ac, IndicatorFn&& indicator, std::span<double> out,
                    std::span<const double> params = {}) {
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    const auto& x = ac.node(n);
    switch (x.kind) {
      case NodeKind::Indicator:
        out[n] = indicator(x.var, x.value);
        break;
      case NodeKind::Parameter:
        out[n] = params.empty() ? x.param : params[n];
        break;
      case NodeKind::Product: {
        double v = 1.0;
        for (NodeId c : ac.children(n)) v *= out[c];
        out[n] = v;
        break;
      }
      case NodeKind::Sum: {
        double v = 0.0;
        for (NodeId c : ac.children(n)) v += out[c];
        out[n] = v;
        break;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Structure checks

struct StructureViolation {
  enum class Kind { BadVars, NotDecomposable, NotSmooth, NotDecision, UnitBelowNonUnit,
                    DetachedIndicator, NotUDeterministic };
  Kind kind;
  NodeId node;
  std::string message;
};

struct StructureReport {
  std::vector<StructureViolation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(StructureViolation::Kind k) const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [&](const auto& v) { return v.kind == k; }));
  }
  std::string summary(std::size_t limit = 8) const {
    std::string s;
    for (std::size_t i = 0; i < violations.size() && i < limit; ++i) {
      if (i) s += "; ";
      s += violations[i].message;
    }
    if (violations.size() > limit) s += "; ... (" + std::to_string(violations.size()) + " total)";
    return s;
  }
};

/// Checks decomposability, smoothness and the decision form against the
/// cached vars(n), plus the two unit conditions for linear-time MAP:
/// no sum deciding on a unit below a sum deciding on a non-unit, and every
/// indicator hanging only off products directly under sums on its variable.
inline StructureReport check_structure(const DecisionAC& ac, const std::vector<VarId>& units) {
  using K = StructureViolation::Kind;
  StructureReport report;
  auto add = [&](K k, NodeId n, std::string msg) {
    report.violations.push_back({k, n, "node " + std::to_string(n) + ": " + std::move(msg)});
  };
  std::vector<char> is_unit(ac.variables().size(), 0);
  for (VarId u : units) is_unit.at(static_cast<std::size_t>(u)) = 1;
  auto unit_sum = [&](NodeId n) {
    const auto& x = ac.node(n);
    return x.kind == NodeKind::Sum && x.var >= 0 && is_unit[static_cast<std::size_t>(x.var)];
  };

  std::vector<char> unit_sum_below(ac.node_count(), 0);
  std::vector<char> mark(ac.variables().size(), 0);
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    const auto& x = ac.node(n);
    auto own = ac.vars(n);
    auto kids = ac.children(n);
    if (x.kind == NodeKind::Indicator) {
      if (own.size() != 1 || own[0] != x.var) add(K::BadVars, n, "indicator vars mismatch");
      continue;
    }
    // cached vars must cover every child's vars
    for (NodeId c : kids) {
      for (VarId v : ac.vars(c)) {
        if (!std::binary_search(own.begin(), own.end(), v)) {
          add(K::BadVars, n, "vars do not cover child " + std::to_string(c));
          break;
        }
      }
      if (unit_sum(c) || unit_sum_below[c]) unit_sum_below[n] = 1;
    }
    if (x.kind == NodeKind::Product) {
      std::size_t total = 0;
      for (NodeId c : kids) {
        for (VarId v : ac.vars(c)) {
          ++total;
          if (mark[static_cast<std::size_t>(v)]++) {
            add(K::NotDecomposable, n, "children share variable " + std::to_string(v));
          }
        }
      }
      for (NodeId c : kids) {
        for (VarId v : ac.vars(c)) mark[static_cast<std::size_t>(v)] = 0;
      }
      (void)total;
    } else if (x.kind == NodeKind::Sum) {
      for (std::size_t k = 1; k < kids.size(); ++k) {
        auto a = ac.vars(kids[0]);
        auto b = ac.vars(kids[k]);
        if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) {
          add(K::NotSmooth, n, "children " + std::to_string(kids[0]) + " and " +
                                   std::to_string(kids[k]) + " differ in vars");
          break;
        }
      }
      if (x.var < 0) {
        add(K::NotDecision, n, "sum without a decision variable");
      } else {
        std::vector<char> seen(static_cast<std::size_t>(ac.cardinality(x.var)), 0);
        for (NodeId c : kids) {
          const auto& y = ac.node(c);
          int found = 0;
          int value = -1;
          if (y.kind == NodeKind::Product) {
            for (NodeId g : ac.children(c)) {
              const auto& z = ac.node(g);
              if (z.kind == NodeKind::Indicator && z.var == x.var) {
                ++found;
                value = z.value;
              }
            }
          }
          if (found != 1) {
            add(K::NotDecision, n, "child " + std::to_string(c) +
                                       " is not a product with one decision indicator");
          } else if (seen[static_cast<std::size_t>(value)]++) {
            add(K::NotDecision, n, "decision value " + std::to_string(value) + " repeated");
          }
        }
      }
      if (!unit_sum(n) && unit_sum_below[n]) {
        add(K::UnitBelowNonUnit, n, "unit-decision sum below a non-unit-decision sum");
      }
    }
  }

  auto parents = ac.parents();
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    const auto& x = ac.node(n);
    if (x.kind != NodeKind::Indicator) continue;
    bool ok = n != ac.root();
    for (NodeId p : parents[n]) {
      if (ac.node(p).kind != NodeKind::Product || parents[p].empty()) {
        ok = false;
        break;
      }
      for (NodeId q : parents[p]) {
        const auto& s = ac.node(q);
        if (s.kind != NodeKind::Sum || s.var != x.var) ok = false;
      }
    }
    if (!ok) add(K::DetachedIndicator, n, "indicator not attached to a sum on its own variable");
  }
  return report;
}

inline StructureReport check_structure(const DecisionAC& ac) {
  return check_structure(ac, ac.unit_vars());
}

/// Certificate built from a fresh checker pass.
inline Certificate certify(const DecisionAC& ac, std::vector<VarId> units) {
  using K = StructureViolation::Kind;
  auto report = check_structure(ac, units);
  std::sort(units.begin(), units.end());
  Certificate c;
  c.verified = true;
  c.decomposable = report.count(K::NotDecomposable) == 0 && report.count(K::BadVars) == 0;
  c.smooth = report.count(K::NotSmooth) == 0;
  c.decision = report.count(K::NotDecision) == 0;
  c.units_on_top = report.count(K::UnitBelowNonUnit) == 0;
  c.indicators_attached = report.count(K::DetachedIndicator) == 0;
  c.units = std::move(units);
  return c;
}

/// Semantic check: for every instantiation u (non-unit indicators at 1),
/// each sum that depends on the units has at most one nonzero child.
inline StructureReport check_u_determinism(const DecisionAC& ac, const std::vector<VarId>& units,
                                           double max_instantiations = 1048576.0) {
  double space = 1.0;
  for (VarId u : units) space *= ac.cardinality(u);
  if (space > max_instantiations) throw BudgetError("check_u_determinism: too many unit instantiations");

  StructureReport report;
  const auto depends = ac.depends_on(units);
  std::vector<int> u_value(ac.variables().size(), -1);
  std::vector<double> values(ac.node_count());
  std::vector<int> digits(units.size(), 0);
  const auto total = static_cast<std::size_t>(space);
  for (std::size_t it = 0; it < total; ++it) {
    for (std::size_t k = 0; k < units.size(); ++k) u_value[static_cast<std::size_t>(units[k])] = digits[k];
    evaluate_nodes(ac, [&](VarId v, int x) {
      int u = u_value[static_cast<std::size_t>(v)];
      return (u < 0 || u == x) ? 1.0 : 0.0;
    }, values);
    for (NodeId n = 0; n < ac.node_count(); ++n) {
      if (ac.node(n).kind != NodeKind::Sum || !depends[n]) continue;
      int nonzero = 0;
      for (NodeId c : ac.children(n)) nonzero += values[c] != 0.0;
      if (nonzero > 1) {
        report.violations.push_back({StructureViolation::Kind::NotUDeterministic, n,
                                     "node " + std::to_string(n) + ": " + std::to_string(nonzero) +
                                         " nonzero children at unit instantiation #" + std::to_string(it)});
      }
    }
    if (report.violations.size() > 16) break;
    for (std::size_t k = units.size(); k-- > 0;) {
      if (++digits[k] < ac.cardinality(units[k])) break;
      digits[k] = 0;
    }
  }
  return report;
}

/// Copy holding only the nodes reachable from the root, ids renumbered.
inline DecisionAC reachable_copy(const DecisionAC& ac) {
  std::vector<char> live(ac.node_count(), 0);
  if (ac.node_count()) live[ac.root()] = 1;
  for (NodeId n = static_cast<NodeId>(ac.node_count()); n-- > 0;) {
    if (!live[n]) continue;
    for (NodeId c : ac.children(n)) live[c] = 1;
  }
  AcBuilder b(ac.variables());
  std::vector<NodeId> map(ac.node_count());
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    if (!live[n]) continue;
    const auto& x = ac.node(n);
    auto vs = b.intern(std::vector<VarId>(ac.vars(n).begin(), ac.vars(n).end()));
    std::vector<NodeId> kids;
    for (NodeId c : ac.children(n)) kids.push_back(map[c]);
    switch (x.kind) {
      case NodeKind::Indicator: map[n] = b.indicator(x.var, x.value); break;
      case NodeKind::Parameter: map[n] = b.parameter(x.param, ac.label(n)); break;
      case NodeKind::Product: map[n] = b.product(std::move(kids), vs); break;
      case NodeKind::Sum: map[n] = b.sum(x.var, std::move(kids), vs); break;
    }
  }
  NodeId root = ac.node_count() ? map[ac.root()] : b.one();
  DecisionAC out = std::move(b).finish(root, ac.unit_vars());
  out.set_certificate(ac.certificate());
  return out;
}

/// Folds constant zeros, drops parameter-1 factors from products and
/// re-shares identical nodes. vars(n) and decision variables are carried
/// over from the original nodes.
inline DecisionAC simplify(const DecisionAC& ac) {
  AcBuilder b(ac.variables());
  std::vector<NodeId> map(ac.node_count());
  std::vector<NodeId> kids;
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    const auto& x = ac.node(n);
    auto vs = b.intern(std::vector<VarId>(ac.vars(n).begin(), ac.vars(n).end()));
    switch (x.kind) {
      case NodeKind::Indicator:
        map[n] = b.indicator(x.var, x.value);
        break;
      case NodeKind::Parameter:
        map[n] = b.parameter(x.param, ac.label(n));
        break;
      case NodeKind::Product: {
        kids.clear();
        bool zero = false;
        for (NodeId c : ac.children(n)) {
          NodeId m = map[c];
          if (b.is_zero(m)) zero = true;
          kids.push_back(m);
        }
        if (zero) {
          map[n] = b.zero();
          break;
        }
        std::vector<NodeId> kept;
        for (NodeId m : kids) {
          if (!b.is_one(m)) kept.push_back(m);
        }
        if (kept.empty()) kept.push_back(b.one());
        map[n] = b.product(std::move(kept), vs);
        break;
      }
      case NodeKind::Sum: {
        std::vector<NodeId> kept;
        for (NodeId c : ac.children(n)) {
          if (!b.is_zero(map[c])) kept.push_back(map[c]);
        }
        map[n] = kept.empty() ? b.zero() : b.sum(x.var, std::move(kept), vs);
        break;
      }
    }
  }
  NodeId root = ac.node_count() ? map[ac.root()] : b.one();
  DecisionAC folded = std::move(b).finish(root, ac.unit_vars());
  DecisionAC out = reachable_copy(folded);
  out.set_certificate(certify(out, out.unit_vars()));
  return out;
}

}  // namespace unitsel
