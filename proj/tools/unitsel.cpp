#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "unitsel/unitsel.hpp"

namespace fs = std::filesystem;
using namespace unitsel;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitEngine = 3;
constexpr int kExitDisagree = 4;

std::string sidecar_path(const std::string& model) {
  fs::path p(model);
  return (p.parent_path() / (p.stem().string() + ".query.json")).string();
}

std::optional<json> load_sidecar(const std::string& model) {
  auto path = sidecar_path(model);
  if (!fs::exists(path)) return std::nullopt;
  return detail::parse_json(read_file(path), "query sidecar");
}

// A --units/--e1/--e2 argument: a sidecar file, or an inline list.
std::vector<VarId> resolve_units(const Network& net, const std::string& model, const std::optional<std::string>& arg) {
  std::optional<json> doc;
  if (arg && fs::is_regular_file(*arg)) doc = detail::parse_json(read_file(*arg), "query sidecar");
  else if (!arg) doc = load_sidecar(model);
  std::vector<VarId> out;
  if (doc) {
    if (doc->contains("units")) {
      for (const auto& u : doc->at("units")) out.push_back(net.id_of(detail::get_as<std::string>(u, "units")));
    }
    return out;
  }
  if (!arg) return out;
  std::stringstream ss(*arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(net.id_of(item));
  }
  return out;
}

Evidence resolve_evidence(const Network& net, const std::string& model, const std::optional<std::string>& arg,
                          const char* field) {
  std::optional<json> doc;
  if (arg && fs::is_regular_file(*arg)) doc = detail::parse_json(read_file(*arg), "query sidecar");
  else if (!arg) doc = load_sidecar(model);
  if (doc) return doc->contains(field) ? evidence_from_json(net, doc->at(field)) : Evidence{};
  return arg ? parse_evidence_list(net, *arg) : Evidence{};
}

json assignment_json(const Network& net, const Instantiation& u) {
  json j = json::object();
  for (const auto& [v, x] : u) j[net.name(v)] = x;
  return j;
}

std::string assignment_text(const Network& net, const Instantiation& u) {
  std::string s;
  for (const auto& [v, x] : u) {
    if (!s.empty()) s += ",";
    s += net.name(v) + "=" + std::to_string(x);
  }
  return s.empty() ? "(empty)" : s;
}

json stats_json(const SolveStats& s) {
  return {{"ve_size", s.ve_size}, {"width", s.width}, {"elapsed", s.elapsed},
          {"peak_scope", s.peak_scope}, {"ops", s.ops}, {"subnormals", s.subnormals}};
}

struct Query {
  Network net;
  std::vector<VarId> units;
  Evidence e1, e2;
  std::optional<json> sidecar;
};

Query load_query(const std::string& model, const std::optional<std::string>& units,
                 const std::optional<std::string>& e1, const std::optional<std::string>& e2) {
  Query q;
  q.net = parse_network(read_file(model));
  q.units = resolve_units(q.net, model, units);
  q.e1 = resolve_evidence(q.net, model, e1, "e1");
  q.e2 = resolve_evidence(q.net, model, e2, "e2");
  q.sidecar = load_sidecar(model);
  return q;
}

DecisionAC compiled_circuit(const Query& q, const std::optional<std::string>& load, const Deadline& deadline) {
  if (load) {
    auto ac = load_circuit(read_file(*load));
    if (ac.variables().size() != q.net.size()) throw InputError("circuit does not match the model");
    for (const auto& v : q.net.variables()) {
      const auto& w = ac.variables()[static_cast<std::size_t>(v.id)];
      if (w.name != v.name || w.cardinality != v.cardinality) throw InputError("circuit does not match the model");
    }
    return ac;
  }
  return simplify(compile_ve(q.net, q.units, deadline));
}

RmapResult run_engine(const std::string& engine, const Query& q, const std::optional<std::string>& load,
                      double timeout) {
  Deadline deadline = timeout > 0 ? Deadline(std::chrono::duration<double>(timeout)) : Deadline::none();
  if (engine == "brute") {
    detail::Timer timer;
    auto r = brute_rmap(q.net, q.units, q.e1, q.e2);
    r.stats.elapsed = timer.seconds();
    return r;
  }
  if (engine == "ve") return ve_rmap(q.net, q.units, q.e1, q.e2, deadline);
  if (engine == "ac") {
    detail::Timer timer;
    auto ac = compiled_circuit(q, load, deadline);
    deadline.check();
    auto r = ac_rmap(ac, q.units, q.e1, q.e2);
    r.stats.elapsed = timer.seconds();
    return r;
  }
  throw InputError("unknown engine '" + engine + "'");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw InputError("bad integer '" + item + "' in list");
    }
  }
  return out;
}

OutcomeMode parse_outcome_mode(const std::string& s) {
  if (s == "leaf") return OutcomeMode::Leaf;
  if (s == "added") return OutcomeMode::Added;
  throw InputError("outcome mode must be 'leaf' or 'added'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact causal unit selection by reduction to Reverse-MAP"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);

  // generate
  auto* gen = app.add_subcommand("generate", "random SCM and (U, X, Y) roles");
  int g_n = 10, g_p = 6;
  std::uint64_t g_seed = 1;
  std::string g_out, g_mode = "leaf";
  gen->add_option("--n", g_n, "skeleton node count")->required();
  gen->add_option("--p", g_p, "maximum parents")->required();
  gen->add_option("--seed", g_seed, "random seed")->required();
  gen->add_option("--out", g_out, "output directory")->required();
  gen->add_option("--outcome-mode", g_mode, "leaf or added");

  // build-objective
  auto* bo = app.add_subcommand("build-objective", "compose the objective model");
  std::string bo_scm, bo_out;
  std::optional<std::string> bo_objective, bo_roles;
  bool bo_benefit = false, bo_keep = false;
  bo->add_option("--scm", bo_scm, "SCM network file")->required();
  auto* bo_obj_opt = bo->add_option("--objective", bo_objective, "objective function file");
  auto* bo_ben_opt = bo->add_flag("--benefit", bo_benefit, "benefit objective from the roles file");
  bo_obj_opt->excludes(bo_ben_opt);
  bo->add_option("--roles", bo_roles, "roles file (default: roles.json next to the SCM)");
  bo->add_option("--out", bo_out, "objective model file")->required();
  bo->add_flag("--keep-barren", bo_keep, "do not prune barren nodes");

  // compile
  auto* co = app.add_subcommand("compile", "compile a model into a decision circuit");
  std::string co_model, co_out;
  std::optional<std::string> co_units;
  bool co_raw = false;
  co->add_option("--model", co_model, "network file")->required();
  co->add_option("--units", co_units, "unit names (A,B) or a query sidecar");
  co->add_option("--out", co_out, "circuit dump file")->required();
  co->add_flag("--no-simplify", co_raw, "keep 0/1 parameters");

  // solve
  auto* so = app.add_subcommand("solve", "solve R-MAP with one engine");
  std::string so_model, so_engine = "ac", so_format = "text";
  std::optional<std::string> so_units, so_e1, so_e2, so_load;
  double so_timeout = 0;
  so->add_option("--model", so_model, "network file")->required();
  so->add_option("--units", so_units, "unit names or a query sidecar");
  so->add_option("--e1", so_e1, "e1 as A=1,B=0 or a query sidecar");
  so->add_option("--e2", so_e2, "e2 as A=1,B=0 or a query sidecar");
  so->add_option("--engine", so_engine, "brute, ve or ac")->check(CLI::IsMember({"brute", "ve", "ac"}));
  so->add_option("--load-circuit", so_load, "use a compiled circuit dump (ac engine)");
  so->add_option("--format", so_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  so->add_option("--timeout", so_timeout, "seconds (0: none)");

  // bench
  auto* be = app.add_subcommand("bench", "benchmark sweep");
  std::string be_nlist = "4,6,8,10", be_engines = "ve,ac", be_csv, be_mode = "leaf";
  int be_p = 6, be_instances = 25, be_jobs = 1;
  std::uint64_t be_seed = 1;
  double be_timeout = 600;
  be->add_option("--n-list", be_nlist, "comma-separated n values");
  be->add_option("--p", be_p, "maximum parents (capped at n-1)");
  be->add_option("--instances", be_instances, "instances per n");
  be->add_option("--seed", be_seed, "base seed");
  be->add_option("--engines", be_engines, "subset of ve,ac,brute");
  be->add_option("--timeout", be_timeout, "seconds per engine");
  be->add_option("--csv", be_csv, "output file (default: stdout)");
  be->add_option("--jobs", be_jobs, "worker threads");
  be->add_option("--outcome-mode", be_mode, "leaf or added");

  // verify
  auto* ve = app.add_subcommand("verify", "run all engines and compare");
  std::string vf_model, vf_format = "text";
  std::optional<std::string> vf_units, vf_e1, vf_e2;
  ve->add_option("--model", vf_model, "network file")->required();
  ve->add_option("--units", vf_units, "unit names or a query sidecar");
  ve->add_option("--e1", vf_e1, "e1 as A=1,B=0 or a query sidecar");
  ve->add_option("--e2", vf_e2, "e2 as A=1,B=0 or a query sidecar");
  ve->add_option("--format", vf_format, "text or json")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      GenConfig cfg;
      cfg.n = g_n;
      cfg.p = g_p;
      cfg.seed = g_seed;
      cfg.outcome_mode = parse_outcome_mode(g_mode);
      validate_config(cfg);
      Rng rng(g_seed);
      for (int attempt = 1; attempt <= 100; ++attempt) {
        auto inst = dag_to_scm(generate_dag(cfg, rng), rng, cfg.outcome_mode);
        auto roles = select_roles(inst, rng);
        if (!roles) continue;
        fs::create_directories(g_out);
        write_file((fs::path(g_out) / "scm.json").string(), serialize_network(inst.scm));
        json units = json::array();
        for (VarId u : roles->units) units.push_back(inst.scm.name(u));
        json r = {{"x", inst.scm.name(roles->x)}, {"y", inst.scm.name(roles->y)}, {"units", units},
                  {"seed", g_seed}, {"n", g_n}, {"p", g_p}, {"n_prime", inst.n_prime}, {"attempts", attempt}};
        write_file((fs::path(g_out) / "roles.json").string(), r.dump(2) + "\n");
        std::cout << "scm: " << inst.n_prime << " nodes, X=" << inst.scm.name(roles->x)
                  << " Y=" << inst.scm.name(roles->y) << " |U|=" << roles->units.size() << "\n";
        return 0;
      }
      throw EngineError("generate: no acceptable role assignment after 100 attempts");
    }

    if (*bo) {
      Network scm = parse_network(read_file(bo_scm));
      ObjectiveFunction obj;
      if (bo_benefit) {
        std::string roles_path = bo_roles ? *bo_roles : (fs::path(bo_scm).parent_path() / "roles.json").string();
        json r = detail::parse_json(read_file(roles_path), "roles");
        Roles roles;
        roles.x = scm.id_of(detail::get_as<std::string>(detail::require_field(r, "x", "roles"), "roles"));
        roles.y = scm.id_of(detail::get_as<std::string>(detail::require_field(r, "y", "roles"), "roles"));
        for (const auto& u : detail::require_field(r, "units", "roles")) {
          roles.units.push_back(scm.id_of(detail::get_as<std::string>(u, "roles")));
        }
        obj = build_benefit_objective(roles);
      } else if (bo_objective) {
        obj = parse_objective(scm, read_file(*bo_objective));
      } else {
        throw InputError("build-objective: give --objective or --benefit");
      }
      auto [shifted, shift] = shift_weights(scm, obj);
      auto model = compose_objective(scm, shifted);
      if (!bo_keep) model = prune_barren(model);
      const Network& net = model.network;
      write_file(bo_out, serialize_network(net));
      json units = json::array();
      for (VarId u : model.units) units.push_back(net.name(u));
      json weights = json::array();
      for (double w : model.weights) weights.push_back(w);
      json side = {{"units", units},
                   {"e1", evidence_to_json(net, model.e1)},
                   {"e2", evidence_to_json(net, model.e2)},
                   {"mixture", model.mixture_node >= 0 ? json(net.name(model.mixture_node)) : json(nullptr)},
                   {"weights", weights},
                   {"weight_sum", model.weight_sum},
                   {"shift", shift.c}};
      write_file(sidecar_path(bo_out), side.dump(2) + "\n");
      std::cout << "objective model: " << net.size() << " nodes, |U|=" << model.units.size()
                << ", |e1|=" << model.e1.size() << ", |e2|=" << model.e2.size() << ", shift c=" << shift.c << "\n";
      return 0;
    }

    if (*co) {
      Network net = parse_network(read_file(co_model));
      auto units = resolve_units(net, co_model, co_units);
      auto ac = compile_ve(net, units);
      if (!co_raw) ac = simplify(ac);
      write_file(co_out, dump_circuit(ac));
      auto report = check_structure(ac, ac.unit_vars());
      std::cout << "circuit: " << ac.node_count() << " nodes, " << ac.edge_count() << " edges\n";
      std::cout << "structure: " << (report.ok() ? "ok" : report.summary()) << "\n";
      return report.ok() ? 0 : kExitEngine;
    }

    if (*so) {
      auto q = load_query(so_model, so_units, so_e1, so_e2);
      auto r = run_engine(so_engine, q, so_load, so_timeout);
      std::optional<double> objective;
      if (q.sidecar && q.sidecar->contains("weight_sum") && !so_units && !so_e1 && !so_e2) {
        objective = q.sidecar->at("weight_sum").get<double>() * r.value - q.sidecar->value("shift", 0.0);
      }
      if (so_format == "json") {
        json j = {{"engine", so_engine}, {"value", r.value}, {"argmax", assignment_json(q.net, r.argmax)},
                  {"stats", stats_json(r.stats)}};
        if (objective) j["objective"] = *objective;
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << "engine: " << so_engine << "\n";
        std::cout << "value: " << detail::format_double(r.value) << "\n";
        if (objective) std::cout << "objective: " << detail::format_double(*objective) << "\n";
        std::cout << "argmax: " << assignment_text(q.net, r.argmax) << "\n";
        std::cout << "stats: ve_size=" << r.stats.ve_size << " width=" << r.stats.width
                  << " ops=" << r.stats.ops << " subnormals=" << r.stats.subnormals
                  << " elapsed=" << detail::fixed3(r.stats.elapsed) << "s\n";
      }
      return 0;
    }

    if (*be) {
      GenConfig cfg;
      cfg.p = be_p;
      cfg.seed = be_seed;
      cfg.instances = be_instances;
      cfg.timeout = be_timeout;
      cfg.outcome_mode = parse_outcome_mode(be_mode);
      auto ns = parse_int_list(be_nlist);
      if (ns.empty()) throw InputError("bench: empty --n-list");
      std::vector<BenchRecord> records;
      for (int n : ns) {
        GenConfig c = cfg;
        c.n = n;
        c.p = std::min(be_p, n - 1);
        auto part = run_bench(c, {n}, parse_engines(be_engines), be_jobs);
        records.insert(records.end(), part.begin(), part.end());
      }
      auto csv = bench_csv(records, ns);
      if (be_csv.empty()) std::cout << csv;
      else write_file(be_csv, csv);
      for (const auto& r : records) {
        if (!r.error.empty()) std::cerr << "seed " << r.seed << " (n=" << r.n << "): " << r.error << "\n";
      }
      return 0;
    }

    if (*ve) {
      auto q = load_query(vf_model, vf_units, vf_e1, vf_e2);
      struct Outcome {
        std::string engine;
        std::optional<RmapResult> result;
        std::string error;
      };
      std::vector<Outcome> outcomes;
      for (const char* engine : {"brute", "ve", "ac"}) {
        Outcome o{engine, std::nullopt, ""};
        try {
          o.result = run_engine(engine, q, std::nullopt, 0);
        } catch (const EngineError& e) {
          o.error = e.what();
        }
        outcomes.push_back(std::move(o));
      }
      std::vector<const Outcome*> done;
      for (const auto& o : outcomes) {
        if (o.result) done.push_back(&o);
      }
      bool agree = !done.empty();
      std::string detail_msg;
      for (const auto* o : done) {
        if (!values_agree(o->result->value, done.front()->result->value)) {
          agree = false;
          detail_msg += o->engine + " value " + detail::format_double(o->result->value) + " vs " +
                        done.front()->engine + " value " + detail::format_double(done.front()->result->value) + "\n";
        }
      }
      // each argmax must reach the optimum, checked by enumeration when feasible
      for (const auto* o : done) {
        try {
          double achieved = brute_conditional(q.net, o->result->argmax, q.e1, q.e2);
          if (!values_agree(achieved, o->result->value)) {
            agree = false;
            detail_msg += o->engine + " argmax achieves " + detail::format_double(achieved) + "\n";
          }
        } catch (const BudgetError&) {
        }
      }
      if (done.empty()) detail_msg = "no engine finished\n";
      if (vf_format == "json") {
        json engines = json::object();
        for (const auto& o : outcomes) {
          if (o.result) {
            engines[o.engine] = {{"value", o.result->value}, {"argmax", assignment_json(q.net, o.result->argmax)},
                                 {"stats", stats_json(o.result->stats)}};
          } else {
            engines[o.engine] = {{"error", o.error}};
          }
        }
        json j = {{"agree", agree}, {"engines", engines}};
        if (!done.empty()) {
          j["value"] = done.front()->result->value;
          j["argmax"] = assignment_json(q.net, done.front()->result->argmax);
          j["stats"] = stats_json(done.front()->result->stats);
        }
        std::cout << j.dump(2) << "\n";
      } else {
        for (const auto& o : outcomes) {
          if (o.result) {
            std::cout << o.engine << ": value " << detail::format_double(o.result->value) << " argmax "
                      << assignment_text(q.net, o.result->argmax) << "\n";
          } else {
            std::cout << o.engine << ": not run (" << o.error << ")\n";
          }
        }
        std::cout << (agree ? "agree" : "DISAGREE") << "\n";
        if (!agree) std::cerr << detail_msg;
      }
      return agree ? 0 : kExitDisagree;
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const EngineError& e) {
    std::cerr << "engine error: " << e.what() << "\n";
    return kExitEngine;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEngine;
  }
  return kExitUsage;
}
