#pragma once

#include <cstdio>
#include <memory>
#include <sstream>
#include <string>

#include "unitsel/circuit.hpp"

namespace unitsel {

// Text dump, one record per line, nodes in bottom-up id order:
//
//   ac <nodes> <edges> <root>
//   var <id> <cardinality> <name>
//   units <k> <id>...
//   <id> I <var> <value>
//   <id> P <value> <label>
//   <id> + <dvar> <nvars> <vars>... <nchildren> <children>...
//   <id> * <nvars> <vars>... <nchildren> <children>...
//
// Lines starting with '#' are comments. vars(n) is written out because
// simplified circuits keep conservative (pre-folding) annotations.

inline std::string dump_circuit(const DecisionAC& ac) {
  std::ostringstream out;
  out << "# decision arithmetic circuit\n";
  out << "ac " << ac.node_count() << ' ' << ac.edge_count() << ' ' << ac.root() << '\n';
  for (const auto& v : ac.variables()) out << "var " << v.id << ' ' << v.cardinality << ' ' << v.name << '\n';
  out << "units " << ac.unit_vars().size();
  for (VarId u : ac.unit_vars()) out << ' ' << u;
  out << '\n';
  auto write_list = [&](auto span) {
    out << ' ' << span.size();
    for (auto x : span) out << ' ' << x;
  };
  char buf[32];
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    const auto& x = ac.node(n);
    out << n;
    switch (x.kind) {
      case NodeKind::Indicator:
        out << " I " << x.var << ' ' << x.value;
        break;
      case NodeKind::Parameter:
        std::snprintf(buf, sizeof buf, "%.17g", x.param);
        out << " P " << buf << ' ' << (ac.label(n).empty() ? std::string("-") : ac.label(n));
        break;
      case NodeKind::Sum:
        out << " + " << x.var;
        write_list(ac.vars(n));
        write_list(ac.children(n));
        break;
      case NodeKind::Product:
        out << " *";
        write_list(ac.vars(n));
        write_list(ac.children(n));
        break;
    }
    out << '\n';
  }
  return out.str();
}

inline DecisionAC load_circuit(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> InputError {
    return InputError("circuit line " + std::to_string(line_no) + ": " + msg);
  };

  std::size_t declared_nodes = 0, declared_edges = 0;
  NodeId root = 0;
  bool header = false;
  std::vector<Variable> vars;
  std::vector<VarId> units;
  std::vector<NodeId> map;
  std::unique_ptr<AcBuilder> b;

  auto read_list = [&](std::istringstream& ls, auto& outv) {
    std::size_t k = 0;
    if (!(ls >> k)) throw fail("missing list length");
    outv.resize(k);
    for (auto& x : outv) {
      if (!(ls >> x)) throw fail("short list");
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "ac") {
      if (!(ls >> declared_nodes >> declared_edges >> root)) throw fail("bad header");
      header = true;
    } else if (head == "var") {
      Variable v;
      if (!(ls >> v.id >> v.cardinality)) throw fail("bad var record");
      std::getline(ls >> std::ws, v.name);
      if (v.id != static_cast<VarId>(vars.size())) throw fail("variables must be listed in id order");
      vars.push_back(v);
    } else if (head == "units") {
      read_list(ls, units);
    } else {
      if (!header) throw fail("node before header");
      if (!b) b = std::make_unique<AcBuilder>(vars);
      NodeId id = 0;
      try {
        id = static_cast<NodeId>(std::stoul(head));
      } catch (const std::exception&) {
        throw fail("unknown record '" + head + "'");
      }
      if (id != map.size()) throw fail("node ids must be consecutive");
      std::string kind;
      ls >> kind;
      auto check_var = [&](VarId v) {
        if (v < 0 || static_cast<std::size_t>(v) >= vars.size()) throw fail("unknown variable id");
      };
      auto child_ids = [&](const std::vector<NodeId>& raw) {
        std::vector<NodeId> out;
        for (NodeId c : raw) {
          if (c >= id) throw fail("child id not below parent");
          out.push_back(map[c]);
        }
        return out;
      };
      if (kind == "I") {
        VarId v;
        int value;
        if (!(ls >> v >> value)) throw fail("bad indicator");
        check_var(v);
        map.push_back(b->indicator(v, value));
      } else if (kind == "P") {
        std::string value, label;
        if (!(ls >> value >> label)) throw fail("bad parameter");
        double p = 0.0;
        try {
          p = std::stod(value);
        } catch (const std::exception&) {
          throw fail("bad parameter value '" + value + "'");
        }
        map.push_back(b->parameter(p, label == "-" ? "" : label));
      } else if (kind == "+" || kind == "*") {
        VarId dvar = -1;
        if (kind == "+" && !(ls >> dvar)) throw fail("bad sum");
        std::vector<VarId> vs;
        std::vector<NodeId> raw;
        read_list(ls, vs);
        read_list(ls, raw);
        for (VarId v : vs) check_var(v);
        auto set = b->intern(vs);
        map.push_back(kind == "+" ? b->sum(dvar, child_ids(raw), set) : b->product(child_ids(raw), set));
      } else {
        throw fail("unknown node kind '" + kind + "'");
      }
    }
  }
  if (!header) throw InputError("circuit: missing header");
  if (!b) b = std::make_unique<AcBuilder>(vars);
  if (map.size() != declared_nodes) throw InputError("circuit: node count does not match header");
  if (!map.empty() && root >= map.size()) throw InputError("circuit: root out of range");
  NodeId r = map.empty() ? b->one() : map[root];
  DecisionAC ac = std::move(*b).finish(r, units);
  if (ac.node_count() != declared_nodes || ac.edge_count() != declared_edges) {
    throw InputError("circuit: node table is not canonical (duplicate nodes)");
  }
  ac.set_certificate(certify(ac, ac.unit_vars()));
  return ac;
}

}  // namespace unitsel
