#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "unitsel/network_io.hpp"

namespace unitsel {

/// A (variable, value) literal in world 1 or world 2 of a counterfactual term.
struct WorldEvent {
  VarId var = -1;
  int world = 1;
  int value = 0;

  friend bool operator==(const WorldEvent&, const WorldEvent&) = default;
  friend auto operator<=>(const WorldEvent&, const WorldEvent&) = default;
};

/// w * Pr(outcomes under the world-1/world-2 treatments | u, evidence)
struct CounterfactualComponent {
  double weight = 1.0;
  std::vector<WorldEvent> outcomes;
  std::vector<WorldEvent> treatments;
  Evidence evidence;  // on the factual world
};

struct ObjectiveFunction {
  std::vector<CounterfactualComponent> components;
  std::vector<VarId> units;
};

inline void validate_objective(const Network& scm, const ObjectiveFunction& obj) {
  if (obj.components.empty()) throw InputError("objective: no components");
  std::set<VarId> units;
  for (VarId u : obj.units) {
    if (!scm.contains(u)) throw InputError("objective: unknown unit variable id " + std::to_string(u));
    if (!units.insert(u).second) throw InputError("objective: unit '" + scm.name(u) + "' listed twice");
  }
  auto check_event = [&](const WorldEvent& ev, const char* kind) {
    if (!scm.contains(ev.var)) throw InputError(std::string("objective: unknown ") + kind + " variable");
    if (ev.world != 1 && ev.world != 2) {
      throw InputError(std::string("objective: ") + kind + " on '" + scm.name(ev.var) +
                       "' must name world 1 or 2");
    }
    if (ev.value < 0 || ev.value >= scm.cardinality(ev.var)) {
      throw InputError(std::string("objective: ") + kind + " value out of range for '" +
                       scm.name(ev.var) + "'");
    }
    if (units.count(ev.var)) {
      throw InputError("objective: unit '" + scm.name(ev.var) + "' is also a " + kind + " variable");
    }
  };
  for (const auto& c : obj.components) {
    if (!std::isfinite(c.weight)) throw InputError("objective: non-finite weight");
    std::set<std::pair<int, VarId>> seen;
    for (const auto& t : c.treatments) {
      check_event(t, "treatment");
      if (!seen.insert({t.world, t.var}).second) {
        throw InputError("objective: '" + scm.name(t.var) + "' treated twice in world " +
                         std::to_string(t.world));
      }
    }
    std::set<std::pair<int, VarId>> out_seen;
    for (const auto& o : c.outcomes) {
      check_event(o, "outcome");
      if (!out_seen.insert({o.world, o.var}).second) {
        throw InputError("objective: outcome '" + scm.name(o.var) + "' listed twice in world " +
                         std::to_string(o.world));
      }
    }
    check_evidence(scm, c.evidence);
    for (const auto& [v, x] : c.evidence) {
      if (units.count(v)) throw InputError("objective: unit '" + scm.name(v) + "' also carries evidence");
    }
  }
}

namespace detail {

inline std::vector<WorldEvent> events_from_json(const Network& scm, const json& arr, const char* what) {
  std::vector<WorldEvent> out;
  if (arr.is_null()) return out;
  for (const auto& item : arr) {
    WorldEvent ev;
    ev.var = scm.id_of(get_as<std::string>(require_field(item, "var", what), what));
    ev.world = item.contains("world") ? get_as<int>(item.at("world"), what) : 1;
    ev.value = get_as<int>(require_field(item, "value", what), what);
    out.push_back(ev);
  }
  return out;
}

inline json events_to_json(const Network& scm, const std::vector<WorldEvent>& events) {
  json arr = json::array();
  for (const auto& ev : events) {
    arr.push_back({{"var", scm.name(ev.var)}, {"world", ev.world}, {"value", ev.value}});
  }
  return arr;
}

}  // namespace detail

/// {"components": [{"weight", "outcomes": [{"var", "world", "value"}],
///                  "treatments": [...], "evidence": [{"var", "value"}]}],
///  "units": [names]}
inline ObjectiveFunction objective_from_json(const Network& scm, const json& doc) {
  constexpr const char* what = "objective";
  ObjectiveFunction obj;
  for (const auto& c : detail::require_field(doc, "components", what)) {
    CounterfactualComponent comp;
    comp.weight = detail::get_as<double>(detail::require_field(c, "weight", what), what);
    comp.outcomes = detail::events_from_json(scm, detail::require_field(c, "outcomes", what), what);
    if (c.contains("treatments")) comp.treatments = detail::events_from_json(scm, c.at("treatments"), what);
    if (c.contains("evidence")) comp.evidence = evidence_from_json(scm, c.at("evidence"));
    obj.components.push_back(std::move(comp));
  }
  for (const auto& u : detail::require_field(doc, "units", what)) {
    obj.units.push_back(scm.id_of(detail::get_as<std::string>(u, what)));
  }
  validate_objective(scm, obj);
  return obj;
}

inline ObjectiveFunction parse_objective(const Network& scm, const std::string& text) {
  return objective_from_json(scm, detail::parse_json(text, "objective"));
}

inline json objective_to_json(const Network& scm, const ObjectiveFunction& obj) {
  json comps = json::array();
  for (const auto& c : obj.components) {
    comps.push_back({{"weight", c.weight},
                     {"outcomes", detail::events_to_json(scm, c.outcomes)},
                     {"treatments", detail::events_to_json(scm, c.treatments)},
                     {"evidence", evidence_to_json(scm, c.evidence)}});
  }
  json units = json::array();
  for (VarId u : obj.units) units.push_back(scm.name(u));
  return {{"components", comps}, {"units", units}};
}

}  // namespace unitsel
