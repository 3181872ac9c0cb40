#pragma once

#include <array>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "unitsel/objective_function.hpp"

namespace unitsel {

/// Ids of one base variable's copies: factual, world 1, world 2. Roots map
/// all three entries to the same node.
using CopyIds = std::array<VarId, 3>;

struct Triplet {
  Network network;
  std::vector<CopyIds> copies;  // indexed by base variable id
};

struct ObjectiveModel {
  Network network;
  std::vector<VarId> units;  // ids in `network`, ascending
  Evidence e1;
  Evidence e2;
  std::vector<std::vector<CopyIds>> copy_map;  // [component][base variable]
  VarId mixture_node = -1;
  std::vector<VarId> sync_nodes;
  std::vector<double> weights;  // normalized, one per component
  double weight_sum = 1.0;
};

struct ShiftRecord {
  double c = 0.0;
  bool shifted = false;
};

namespace detail {

inline std::vector<double> point_mass_row(int card, int value) {
  std::vector<double> row(static_cast<std::size_t>(card), 0.0);
  row[static_cast<std::size_t>(value)] = 1.0;
  return row;
}

// Treatment value per (world, base variable), or -1.
inline std::array<std::vector<int>, 3> treatment_table(const Network& scm, const CounterfactualComponent& comp) {
  std::array<std::vector<int>, 3> t;
  for (auto& w : t) w.assign(scm.size(), -1);
  for (const auto& x : comp.treatments) {
    if (scm.is_root(x.var)) {
      throw InputError("treatment on root variable '" + scm.name(x.var) +
                       "' would cut the coupling between worlds");
    }
    t[static_cast<std::size_t>(x.world)][static_cast<std::size_t>(x.var)] = x.value;
  }
  return t;
}

// Adds the three copies of `scm` to `out`. `shared_root` returns an existing
// id for roots shared beyond this triplet, or -1. Copy CPTs are set, with
// treated copies mutilated to a parentless point mass.
template <typename SharedRoot, typename NameOf>
std::vector<CopyIds> add_triplet(Network& out, const Network& scm, const CounterfactualComponent& comp,
                                 SharedRoot shared_root, NameOf name_of) {
  const auto treated = treatment_table(scm, comp);
  const auto order = topological_order(scm);
  std::vector<CopyIds> copies(scm.size(), CopyIds{-1, -1, -1});
  for (VarId v : order) {
    const auto vi = static_cast<std::size_t>(v);
    if (scm.is_root(v)) {
      VarId id = shared_root(v);
      if (id < 0) {
        id = out.add_variable(name_of(v, 0), scm.cardinality(v));
        out.set_cpt(id, {}, scm.cpt(v).table);
      }
      copies[vi] = {id, id, id};
      continue;
    }
    for (int w = 0; w < 3; ++w) {
      copies[vi][static_cast<std::size_t>(w)] = out.add_variable(name_of(v, w), scm.cardinality(v));
    }
  }
  for (VarId v : order) {
    if (scm.is_root(v)) continue;
    const auto vi = static_cast<std::size_t>(v);
    const Cpt& c = scm.cpt(v);
    for (int w = 0; w < 3; ++w) {
      const VarId id = copies[vi][static_cast<std::size_t>(w)];
      const int forced = treated[static_cast<std::size_t>(w)][vi];
      if (forced >= 0) {
        out.set_cpt(id, {}, point_mass_row(scm.cardinality(v), forced));
        continue;
      }
      std::vector<VarId> parents;
      for (VarId p : c.parents) parents.push_back(copies[static_cast<std::size_t>(p)][static_cast<std::size_t>(w)]);
      out.set_cpt(id, std::move(parents), c.table);
    }
  }
  return copies;
}

inline std::string world_name(const std::string& base, int world) {
  if (world == 1) return "[" + base + "]";
  if (world == 2) return "[[" + base + "]]";
  return base;
}

}  // namespace detail

/// Three coupled copies of `scm` sharing its roots; in world 1 and world 2
/// the treated variables lose their parents and become point masses.
inline Triplet build_triplet(const Network& scm, const CounterfactualComponent& comp) {
  require_valid(scm);
  ObjectiveFunction probe{{comp}, {}};
  validate_objective(scm, probe);
  Triplet t;
  t.copies = detail::add_triplet(
      t.network, scm, comp, [](VarId) { return VarId{-1}; },
      [&](VarId v, int w) { return detail::world_name(scm.name(v), w); });
  require_valid(t.network);
  return t;
}

/// One triplet per component, unit roots shared by all triplets, a sync
/// node per internal unit, and a mixture node H over the outcome nodes.
/// Pr'(e1 | u, e2) equals the weighted sum of the components' conditionals
/// with weights normalized to sum 1.
inline ObjectiveModel compose_objective(const Network& scm, const ObjectiveFunction& obj) {
  require_valid(scm);
  validate_objective(scm, obj);
  const std::size_t m = obj.components.size();
  double total = 0.0;
  for (const auto& c : obj.components) {
    if (c.weight < 0.0) {
      throw InputError("objective: negative weight " + detail::format_double(c.weight) +
                       " (shift the weights first)");
    }
    total += c.weight;
  }
  if (total <= 0.0) throw InputError("objective: weights sum to zero");
  for (const auto& c : obj.components) {
    for (const auto& o : c.outcomes) {
      if (scm.is_root(o.var)) throw InputError("objective: outcome on root variable '" + scm.name(o.var) + "'");
    }
  }

  std::set<VarId> unit_set(obj.units.begin(), obj.units.end());
  ObjectiveModel model;
  Network& net = model.network;
  std::map<VarId, VarId> shared;
  for (VarId v = 0; v < static_cast<VarId>(scm.size()); ++v) {
    if (unit_set.count(v) && scm.is_root(v)) {
      VarId id = net.add_variable(scm.name(v), scm.cardinality(v));
      net.set_cpt(id, {}, scm.cpt(v).table);
      shared.emplace(v, id);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    const std::string suffix = "." + std::to_string(i + 1);
    model.copy_map.push_back(detail::add_triplet(
        net, scm, obj.components[i],
        [&](VarId v) {
          auto it = shared.find(v);
          return it == shared.end() ? VarId{-1} : it->second;
        },
        [&](VarId v, int w) { return detail::world_name(scm.name(v), w) + suffix; }));
  }

  for (VarId u : unit_set) {
    if (scm.is_root(u)) {
      model.units.push_back(shared.at(u));
      continue;
    }
    model.units.push_back(model.copy_map[0][static_cast<std::size_t>(u)][0]);
    if (m < 2) continue;
    std::vector<VarId> copies;
    for (std::size_t i = 0; i < m; ++i) copies.push_back(model.copy_map[i][static_cast<std::size_t>(u)][0]);
    const int card = scm.cardinality(u);
    VarId lambda = net.add_variable("Lambda[" + scm.name(u) + "]", 2);
    // 1 exactly when every copy agrees with the first one
    std::vector<double> table;
    std::vector<int> digit(m, 0);
    while (true) {
      bool agree = std::all_of(digit.begin(), digit.end(), [&](int d) { return d == digit[0]; });
      table.push_back(agree ? 0.0 : 1.0);
      table.push_back(agree ? 1.0 : 0.0);
      std::size_t k = m;
      bool done = true;
      while (k-- > 0) {
        if (++digit[k] < card) {
          done = false;
          break;
        }
        digit[k] = 0;
      }
      if (done) break;
    }
    net.set_cpt(lambda, copies, std::move(table));
    model.sync_nodes.push_back(lambda);
    model.e2.set(lambda, 1);
  }
  std::sort(model.units.begin(), model.units.end());

  for (std::size_t i = 0; i < m; ++i) {
    const auto& comp = obj.components[i];
    const auto& copies = model.copy_map[i];
    for (const auto& t : comp.treatments) {
      model.e2.set(copies[static_cast<std::size_t>(t.var)][static_cast<std::size_t>(t.world)], t.value);
    }
    for (const auto& [v, x] : comp.evidence) {
      model.e2.assign(copies[static_cast<std::size_t>(v)][0], x);
    }
    for (const auto& o : comp.outcomes) {
      model.e1.set(copies[static_cast<std::size_t>(o.var)][static_cast<std::size_t>(o.world)], o.value);
    }
  }
  for (const auto& [v, x] : model.e1) {
    if (model.e2.contains(v)) {
      throw InputError("objective: outcome '" + net.name(v) + "' is also treated or observed");
    }
  }

  const int h_card = static_cast<int>(std::max<std::size_t>(m, 2));
  model.mixture_node = net.add_variable("H", h_card);
  std::vector<double> prior(static_cast<std::size_t>(h_card), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    model.weights.push_back(obj.components[i].weight / total);
    prior[i] = model.weights.back();
  }
  model.weight_sum = total;
  net.set_cpt(model.mixture_node, {}, prior);

  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& o : obj.components[i].outcomes) {
      const VarId z = model.copy_map[i][static_cast<std::size_t>(o.var)][static_cast<std::size_t>(o.world)];
      const Cpt old = net.cpt(z);
      const int card = net.cardinality(z);
      const auto point = detail::point_mass_row(card, o.value);
      std::vector<double> table;
      table.reserve(old.table.size() * static_cast<std::size_t>(h_card));
      for (int h = 0; h < h_card; ++h) {
        if (static_cast<std::size_t>(h) == i) {
          table.insert(table.end(), old.table.begin(), old.table.end());
        } else {
          for (std::size_t r = 0; r < old.table.size() / static_cast<std::size_t>(card); ++r) {
            table.insert(table.end(), point.begin(), point.end());
          }
        }
      }
      std::vector<VarId> parents{model.mixture_node};
      parents.insert(parents.end(), old.parents.begin(), old.parents.end());
      net.set_cpt(z, std::move(parents), std::move(table));
    }
  }
  require_valid(net);
  return model;
}

/// Checks that the components partition one outcome space: identical
/// treatments and evidence, the same outcome variables in the same worlds,
/// and every combination of outcome values exactly once.
inline bool is_exhaustive_partition(const Network& scm, const ObjectiveFunction& obj) {
  if (obj.components.empty()) return false;
  auto treat_key = [](const CounterfactualComponent& c) {
    auto t = c.treatments;
    std::sort(t.begin(), t.end());
    return t;
  };
  auto slots = [](const CounterfactualComponent& c) {
    std::vector<std::pair<int, VarId>> s;
    for (const auto& o : c.outcomes) s.push_back({o.world, o.var});
    std::sort(s.begin(), s.end());
    return s;
  };
  const auto& first = obj.components.front();
  const auto t0 = treat_key(first);
  const auto s0 = slots(first);
  std::set<std::vector<int>> tuples;
  for (const auto& c : obj.components) {
    if (treat_key(c) != t0 || !(c.evidence == first.evidence) || slots(c) != s0) return false;
    std::vector<WorldEvent> o = c.outcomes;
    std::sort(o.begin(), o.end(), [](const WorldEvent& a, const WorldEvent& b) {
      return std::pair(a.world, a.var) < std::pair(b.world, b.var);
    });
    std::vector<int> tuple;
    for (const auto& e : o) tuple.push_back(e.value);
    if (!tuples.insert(tuple).second) return false;
  }
  double combos = 1.0;
  for (const auto& [w, v] : s0) combos *= scm.cardinality(v);
  return static_cast<double>(tuples.size()) == combos;
}

/// Adds c = -min weight to every weight when some weight is negative. This
/// keeps the argmax only when the components sum to 1 for every u, so the
/// partition structure is required.
inline std::pair<ObjectiveFunction, ShiftRecord> shift_weights(const Network& scm, ObjectiveFunction obj) {
  validate_objective(scm, obj);
  double lo = 0.0;
  for (const auto& c : obj.components) lo = std::min(lo, c.weight);
  ShiftRecord rec;
  if (lo >= 0.0) return {std::move(obj), rec};
  if (!is_exhaustive_partition(scm, obj)) {
    throw InputError("objective: negative weights on components that do not partition the outcome space");
  }
  rec.c = -lo;
  rec.shifted = true;
  for (auto& c : obj.components) c.weight += rec.c;
  return {std::move(obj), rec};
}

/// Drops every node that is not an ancestor of (or itself) an evidence,
/// outcome or unit node. Such nodes sum out to 1 and do not change
/// Pr'(e1 | u, e2). Removed copies map to -1 in copy_map.
inline ObjectiveModel prune_barren(const ObjectiveModel& model) {
  const Network& net = model.network;
  std::vector<char> keep(net.size(), 0);
  std::vector<VarId> stack;
  auto mark = [&](VarId v) {
    if (!keep[static_cast<std::size_t>(v)]) {
      keep[static_cast<std::size_t>(v)] = 1;
      stack.push_back(v);
    }
  };
  for (const auto& [v, x] : model.e1) mark(v);
  for (const auto& [v, x] : model.e2) mark(v);
  for (VarId u : model.units) mark(u);
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    for (VarId p : net.parents(v)) mark(p);
  }
  ObjectiveModel out;
  std::vector<VarId> map(net.size(), -1);
  for (const auto& v : net.variables()) {
    if (keep[static_cast<std::size_t>(v.id)]) map[static_cast<std::size_t>(v.id)] = out.network.add_variable(v.name, v.cardinality);
  }
  for (const auto& v : net.variables()) {
    const VarId id = map[static_cast<std::size_t>(v.id)];
    if (id < 0) continue;
    const Cpt& c = net.cpt(v.id);
    std::vector<VarId> parents;
    for (VarId p : c.parents) parents.push_back(map[static_cast<std::size_t>(p)]);
    out.network.set_cpt(id, std::move(parents), c.table);
  }
  auto remap = [&](VarId v) { return v < 0 ? VarId{-1} : map[static_cast<std::size_t>(v)]; };
  for (VarId u : model.units) out.units.push_back(remap(u));
  for (const auto& [v, x] : model.e1) out.e1.set(remap(v), x);
  for (const auto& [v, x] : model.e2) out.e2.set(remap(v), x);
  for (const auto& comp : model.copy_map) {
    auto& c = out.copy_map.emplace_back();
    for (const auto& ids : comp) c.push_back({remap(ids[0]), remap(ids[1]), remap(ids[2])});
  }
  out.mixture_node = remap(model.mixture_node);
  for (VarId s : model.sync_nodes) out.sync_nodes.push_back(remap(s));
  out.weights = model.weights;
  out.weight_sum = model.weight_sum;
  require_valid(out.network);
  return out;
}

}  // namespace unitsel
