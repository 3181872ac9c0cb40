#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "unitsel/network.hpp"

namespace unitsel {

using json = nlohmann::json;

namespace detail {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string(what) + ": syntax error at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
}

inline const json& require_field(const json& obj, const char* field, const char* what) {
  if (!obj.is_object() || !obj.contains(field)) {
    throw InputError(std::string(what) + ": missing field '" + field + "'");
  }
  return obj.at(field);
}

template <typename T>
T get_as(const json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

}  // namespace detail

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

/// Reads the JSON network format:
///   {"variables": [{"name", "cardinality"}...],
///    "cpts": [{"child", "parents": [names], "table": [numbers]}...]}
/// Field order is irrelevant; CPTs may appear in any order.
inline Network network_from_json(const json& doc) {
  constexpr const char* what = "network";
  Network net;
  for (const auto& v : detail::require_field(doc, "variables", what)) {
    auto name = detail::get_as<std::string>(detail::require_field(v, "name", what), what);
    int card = v.contains("cardinality")
                   ? detail::get_as<int>(v.at("cardinality"), what)
                   : 2;
    net.add_variable(std::move(name), card);
  }
  for (const auto& c : detail::require_field(doc, "cpts", what)) {
    auto child = net.id_of(detail::get_as<std::string>(detail::require_field(c, "child", what), what));
    if (net.has_cpt(child)) {
      throw InputError("network: second CPT for '" + net.name(child) + "'");
    }
    std::vector<VarId> parents;
    if (c.contains("parents")) {
      for (const auto& p : c.at("parents")) parents.push_back(net.id_of(detail::get_as<std::string>(p, what)));
    }
    auto table = detail::get_as<std::vector<double>>(detail::require_field(c, "table", what), what);
    net.set_cpt(child, std::move(parents), std::move(table));
  }
  require_valid(net);
  return net;
}

inline Network parse_network(const std::string& text) {
  return network_from_json(detail::parse_json(text, "network"));
}

/// Writes the network format with every probability at 17 significant
/// digits so a re-parse is bit-exact.
inline std::string serialize_network(const Network& net) {
  std::string out = "{\n  \"variables\": [";
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& v = net.variables()[i];
    out += i ? ",\n    " : "\n    ";
    out += "{\"name\": " + json(v.name).dump() + ", \"cardinality\": " +
           std::to_string(v.cardinality) + "}";
  }
  out += "\n  ],\n  \"cpts\": [";
  bool first = true;
  for (const auto& v : net.variables()) {
    if (!net.has_cpt(v.id)) continue;
    const Cpt& c = net.cpt(v.id);
    out += first ? "\n    " : ",\n    ";
    first = false;
    out += "{\"child\": " + json(v.name).dump() + ", \"parents\": [";
    for (std::size_t k = 0; k < c.parents.size(); ++k) {
      if (k) out += ", ";
      out += json(net.name(c.parents[k])).dump();
    }
    out += "], \"table\": [";
    for (std::size_t k = 0; k < c.table.size(); ++k) {
      if (k) out += ", ";
      out += detail::format_double(c.table[k]);
    }
    out += "]}";
  }
  out += "\n  ]\n}\n";
  return out;
}

/// Evidence as a list of {"var": name, "value": index}.
inline json evidence_to_json(const Network& net, const Evidence& e) {
  json arr = json::array();
  for (const auto& [v, x] : e) arr.push_back({{"var", net.name(v)}, {"value", x}});
  return arr;
}

inline Evidence evidence_from_json(const Network& net, const json& arr) {
  constexpr const char* what = "evidence";
  Evidence e;
  if (arr.is_object()) {
    for (const auto& [name, value] : arr.items()) e.set(net.id_of(name), detail::get_as<int>(value, what));
  } else {
    for (const auto& item : arr) {
      e.set(net.id_of(detail::get_as<std::string>(detail::require_field(item, "var", what), what)),
            detail::get_as<int>(detail::require_field(item, "value", what), what));
    }
  }
  check_evidence(net, e);
  return e;
}

/// "A=1,B=0" style evidence; an empty string is empty evidence.
inline Evidence parse_evidence_list(const Network& net, const std::string& text) {
  Evidence e;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("evidence item '" + item + "' lacks '='");
    int value = 0;
    try {
      value = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("evidence item '" + item + "' has a non-integer value");
    }
    e.set(net.id_of(item.substr(0, eq)), value);
  }
  check_evidence(net, e);
  return e;
}

}  // namespace unitsel
