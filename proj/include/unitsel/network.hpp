#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "unitsel/error.hpp"

namespace unitsel {

using VarId = std::int32_t;

inline constexpr double kNormalizationTolerance = 1e-9;

struct Variable {
  VarId id = -1;
  std::string name;
  int cardinality = 2;
};

/// Conditional probability table. Rows are indexed by the parent
/// instantiation (parents in declared order, last parent fastest) and the
/// child value is the fastest axis.
struct Cpt {
  VarId child = -1;
  std::vector<VarId> parents;
  std::vector<double> table;
};

/// A (possibly partial) assignment of value indices to variables.
class Evidence {
 public:
  using Map = std::map<VarId, int>;

  Evidence() = default;
  Evidence(std::initializer_list<std::pair<const VarId, int>> init) {
    for (const auto& [v, x] : init) set(v, x);
  }

  /// Throws InputError if `var` is already assigned.
  void set(VarId var, int value) {
    auto [it, inserted] = values_.emplace(var, value);
    if (!inserted) {
      throw InputError("duplicate evidence on variable id " + std::to_string(var));
    }
  }
  void assign(VarId var, int value) { values_[var] = value; }
  void erase(VarId var) { values_.erase(var); }

  bool contains(VarId var) const { return values_.count(var) != 0; }
  std::optional<int> get(VarId var) const {
    auto it = values_.find(var);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  int at(VarId var) const { return values_.at(var); }

  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }
  const Map& map() const { return values_; }

  std::vector<VarId> vars() const {
    std::vector<VarId> out;
    out.reserve(values_.size());
    for (const auto& kv : values_) out.push_back(kv.first);
    return out;
  }

  /// True when the two assignments agree on every shared variable.
  bool compatible(const Evidence& other) const {
    for (const auto& [v, x] : values_) {
      auto y = other.get(v);
      if (y && *y != x) return false;
    }
    return true;
  }

  /// Union of two assignments; conflicting values are an InputError.
  static Evidence combine(const Evidence& a, const Evidence& b) {
    Evidence out = a;
    for (const auto& [v, x] : b) {
      auto y = out.get(v);
      if (y && *y != x) {
        throw InputError("conflicting evidence on variable id " + std::to_string(v));
      }
      out.assign(v, x);
    }
    return out;
  }

  friend bool operator==(const Evidence&, const Evidence&) = default;

 private:
  Map values_;
};

using Instantiation = Evidence;

struct Violation {
  enum class Kind { BadCardinality, DuplicateName, MissingCpt, UnknownParent, DuplicateParent,
                    TableLength, OutOfRange, NotNormalized, Cycle };
  Kind kind;
  VarId var;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(Violation::Kind kind) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; }));
  }
  std::string summary() const {
    std::string s;
    for (const auto& v : violations) {
      if (!s.empty()) s += "; ";
      s += v.message;
    }
    return s;
  }
};

/// Discrete DAG model. Variable ids are dense indices 0..size()-1 in
/// declaration order. The same type hosts base SCMs and composed
/// objective models.
class Network {
 public:
  VarId add_variable(std::string name, int cardinality = 2) {
    if (by_name_.count(name)) throw InputError("duplicate variable name '" + name + "'");
    auto id = static_cast<VarId>(variables_.size());
    by_name_.emplace(name, id);
    variables_.push_back(Variable{id, std::move(name), cardinality});
    cpts_.emplace_back();
    return id;
  }

  void set_cpt(VarId child, std::vector<VarId> parents, std::vector<double> table) {
    check_id(child);
    cpts_[static_cast<std::size_t>(child)] = Cpt{child, std::move(parents), std::move(table)};
  }

  std::size_t size() const { return variables_.size(); }
  bool contains(VarId id) const { return id >= 0 && static_cast<std::size_t>(id) < variables_.size(); }

  const Variable& variable(VarId id) const {
    check_id(id);
    return variables_[static_cast<std::size_t>(id)];
  }
  const std::vector<Variable>& variables() const { return variables_; }
  int cardinality(VarId id) const { return variable(id).cardinality; }
  const std::string& name(VarId id) const { return variable(id).name; }

  bool has_cpt(VarId id) const { return cpts_.at(static_cast<std::size_t>(id)).has_value(); }
  const Cpt& cpt(VarId id) const {
    check_id(id);
    const auto& c = cpts_[static_cast<std::size_t>(id)];
    if (!c) throw InputError("variable '" + name(id) + "' has no CPT");
    return *c;
  }

  std::optional<VarId> find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }
  VarId id_of(std::string_view name) const {
    auto id = find(name);
    if (!id) throw InputError("unknown variable '" + std::string(name) + "'");
    return *id;
  }

  const std::vector<VarId>& parents(VarId id) const { return cpt(id).parents; }
  bool is_root(VarId id) const { return !has_cpt(id) || cpt(id).parents.empty(); }

  std::vector<VarId> roots() const {
    std::vector<VarId> out;
    for (const auto& v : variables_) {
      if (is_root(v.id)) out.push_back(v.id);
    }
    return out;
  }

  std::vector<std::vector<VarId>> children() const {
    std::vector<std::vector<VarId>> out(size());
    for (const auto& c : cpts_) {
      if (!c) continue;
      for (VarId p : c->parents) {
        if (contains(p)) out[static_cast<std::size_t>(p)].push_back(c->child);
      }
    }
    return out;
  }

  /// CPT entry for `child = value` given a full assignment containing the parents.
  double probability(VarId child, const std::function<int(VarId)>& value_of) const {
    const Cpt& c = cpt(child);
    std::size_t index = 0;
    for (VarId p : c.parents) {
      index = index * static_cast<std::size_t>(cardinality(p)) +
              static_cast<std::size_t>(value_of(p));
    }
    index = index * static_cast<std::size_t>(cardinality(child)) +
            static_cast<std::size_t>(value_of(child));
    return c.table[index];
  }

  friend bool operator==(const Network& a, const Network& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto& x = a.variables_[i];
      const auto& y = b.variables_[i];
      if (x.name != y.name || x.cardinality != y.cardinality) return false;
      if (a.cpts_[i].has_value() != b.cpts_[i].has_value()) return false;
      if (a.cpts_[i] && (a.cpts_[i]->parents != b.cpts_[i]->parents ||
                         a.cpts_[i]->table != b.cpts_[i]->table)) {
        return false;
      }
    }
    return true;
  }

 private:
  void check_id(VarId id) const {
    if (!contains(id)) throw InputError("unknown variable id " + std::to_string(id));
  }

  std::vector<Variable> variables_;
  std::vector<std::optional<Cpt>> cpts_;
  std::unordered_map<std::string, VarId> by_name_;
};

inline ValidationReport validate_network(const Network& net) {
  using K = Violation::Kind;
  ValidationReport report;
  auto add = [&](K kind, VarId v, std::string msg) {
    report.violations.push_back(Violation{kind, v, std::move(msg)});
  };

  std::unordered_map<std::string, int> seen_names;
  for (const auto& v : net.variables()) {
    if (v.cardinality < 2) {
      add(K::BadCardinality, v.id, "variable '" + v.name + "' has cardinality < 2");
    }
    if (seen_names[v.name]++ == 1) {
      add(K::DuplicateName, v.id, "duplicate variable name '" + v.name + "'");
    }
  }

  bool structure_ok = true;
  for (const auto& v : net.variables()) {
    if (!net.has_cpt(v.id)) {
      add(K::MissingCpt, v.id, "variable '" + v.name + "' has no CPT");
      structure_ok = false;
      continue;
    }
    const Cpt& c = net.cpt(v.id);
    bool parents_ok = true;
    std::vector<VarId> sorted = c.parents;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      add(K::DuplicateParent, v.id, "variable '" + v.name + "' lists a parent twice");
      parents_ok = false;
    }
    for (VarId p : c.parents) {
      if (!net.contains(p)) {
        add(K::UnknownParent, v.id, "variable '" + v.name + "' has an unknown parent id " +
                                        std::to_string(p));
        parents_ok = false;
      }
    }
    if (!parents_ok) {
      structure_ok = false;
      continue;
    }
    std::size_t rows = 1;
    for (VarId p : c.parents) rows *= static_cast<std::size_t>(std::max(1, net.cardinality(p)));
    const auto card = static_cast<std::size_t>(std::max(1, v.cardinality));
    if (c.table.size() != rows * card) {
      add(K::TableLength, v.id, "CPT of '" + v.name + "' has " + std::to_string(c.table.size()) +
                                    " entries, expected " + std::to_string(rows * card));
      continue;
    }
    bool range_ok = true;
    for (double x : c.table) {
      if (!(x >= 0.0 && x <= 1.0)) range_ok = false;
    }
    if (!range_ok) add(K::OutOfRange, v.id, "CPT of '" + v.name + "' has an entry outside [0,1]");
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t x = 0; x < card; ++x) s += c.table[r * card + x];
      if (std::abs(s - 1.0) > kNormalizationTolerance) {
        add(K::NotNormalized, v.id, "CPT of '" + v.name + "' row " + std::to_string(r) +
                                        " sums to " + std::to_string(s));
        break;
      }
    }
  }

  if (structure_ok) {
    // Kahn's algorithm; whatever remains lies on or behind a cycle.
    std::vector<int> indegree(net.size(), 0);
    for (const auto& v : net.variables()) {
      indegree[static_cast<std::size_t>(v.id)] = static_cast<int>(net.cpt(v.id).parents.size());
    }
    auto kids = net.children();
    std::vector<VarId> ready;
    for (const auto& v : net.variables()) {
      if (indegree[static_cast<std::size_t>(v.id)] == 0) ready.push_back(v.id);
    }
    std::size_t done = 0;
    while (!ready.empty()) {
      VarId v = ready.back();
      ready.pop_back();
      ++done;
      for (VarId c : kids[static_cast<std::size_t>(v)]) {
        if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
      }
    }
    if (done != net.size()) {
      std::string names;
      VarId first = -1;
      for (const auto& v : net.variables()) {
        if (indegree[static_cast<std::size_t>(v.id)] > 0) {
          if (first < 0) first = v.id;
          names += (names.empty() ? "" : ",") + v.name;
        }
      }
      add(K::Cycle, first, "parent relation is cyclic through {" + names + "}");
    }
  }
  return report;
}

/// Parents-first order; ties broken by ascending id.
inline std::vector<VarId> topological_order(const Network& net) {
  std::vector<int> indegree(net.size(), 0);
  for (const auto& v : net.variables()) {
    indegree[static_cast<std::size_t>(v.id)] = static_cast<int>(net.cpt(v.id).parents.size());
  }
  auto kids = net.children();
  std::priority_queue<VarId, std::vector<VarId>, std::greater<>> ready;
  for (const auto& v : net.variables()) {
    if (indegree[static_cast<std::size_t>(v.id)] == 0) ready.push(v.id);
  }
  std::vector<VarId> order;
  order.reserve(net.size());
  while (!ready.empty()) {
    VarId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (VarId c : kids[static_cast<std::size_t>(v)]) {
      if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push(c);
    }
  }
  if (order.size() != net.size()) throw InputError("cycle detected in network");
  return order;
}

/// Throws InputError listing every violation.
inline void require_valid(const Network& net) {
  auto report = validate_network(net);
  if (!report.ok()) throw InputError("invalid network: " + report.summary());
}

/// Checks that evidence refers to existing variables and in-range values.
inline void check_evidence(const Network& net, const Evidence& e) {
  for (const auto& [v, x] : e) {
    if (!net.contains(v)) throw InputError("evidence on unknown variable id " + std::to_string(v));
    if (x < 0 || x >= net.cardinality(v)) {
      throw InputError("evidence value " + std::to_string(x) + " out of range for '" +
                       net.name(v) + "'");
    }
  }
}

/// Number of instantiations of `vars`, as a double so huge spaces do not overflow.
inline double state_space(const Network& net, std::span<const VarId> vars) {
  double n = 1.0;
  for (VarId v : vars) n *= net.cardinality(v);
  return n;
}

}  // namespace unitsel
