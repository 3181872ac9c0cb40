#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "unitsel/ac_solver.hpp"
#include "unitsel/compile.hpp"
#include "unitsel/objective.hpp"
#include "unitsel/oracle.hpp"
#include "unitsel/ve.hpp"

namespace unitsel {

enum class OutcomeMode { Leaf, Added };

struct GenConfig {
  int n = 10;
  int p = 6;
  std::uint64_t seed = 1;
  int instances = 1;
  double timeout = 600.0;  // seconds per engine
  OutcomeMode outcome_mode = OutcomeMode::Leaf;
};

inline void validate_config(const GenConfig& cfg) {
  if (cfg.n < 3) throw InputError("generator: n must be at least 3");
  if (cfg.p < 1 || cfg.p >= cfg.n) throw InputError("generator: p must satisfy 1 <= p < n");
  if (cfg.instances < 0) throw InputError("generator: negative instance count");
  if (!(cfg.timeout > 0.0)) throw InputError("generator: timeout must be positive");
}

/// Seeded engine with distribution helpers whose output does not depend on
/// the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
  }
  /// Uniform integer in [lo, hi].
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53); }
  bool coin() { return (next() >> 63) != 0; }

  /// k distinct elements of `pool`, in sampled order.
  template <typename T>
  std::vector<T> sample(std::vector<T> pool, std::size_t k) {
    for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
      std::size_t j = i + static_cast<std::size_t>(below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(std::min(k, pool.size()));
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Node i (0-based) lists its parents among 0..i-1.
struct DagSkeleton {
  std::vector<std::vector<int>> parents;
  int size() const { return static_cast<int>(parents.size()); }
};

inline DagSkeleton generate_dag(const GenConfig& cfg, Rng& rng) {
  validate_config(cfg);
  DagSkeleton g;
  g.parents.resize(static_cast<std::size_t>(cfg.n));
  for (int i = 1; i < cfg.n; ++i) {
    const int k = rng.between(1, std::min(cfg.p, i));
    std::vector<int> pool(static_cast<std::size_t>(i));
    for (int j = 0; j < i; ++j) pool[static_cast<std::size_t>(j)] = j;
    auto chosen = rng.sample(std::move(pool), static_cast<std::size_t>(k));
    std::sort(chosen.begin(), chosen.end());
    g.parents[static_cast<std::size_t>(i)] = std::move(chosen);
  }
  return g;
}

inline DagSkeleton generate_dag(const GenConfig& cfg) {
  Rng rng(cfg.seed);
  return generate_dag(cfg, rng);
}

struct ScmInstance {
  Network scm;
  VarId y = -1;
  std::vector<VarId> g0;  // ids of the skeleton nodes, in skeleton order
  int n_prime = 0;
};

/// Picks the outcome, gives every internal skeleton node its own fresh root
/// parent, draws deterministic 0/1 mechanisms and root priors.
inline ScmInstance dag_to_scm(const DagSkeleton& g0, Rng& rng, OutcomeMode mode = OutcomeMode::Leaf) {
  DagSkeleton g = g0;
  const int n = g.size();
  std::vector<char> has_child(static_cast<std::size_t>(n), 0);
  for (const auto& ps : g.parents) {
    for (int p : ps) has_child[static_cast<std::size_t>(p)] = 1;
  }
  std::vector<int> leaves;
  for (int i = 0; i < n; ++i) {
    if (!has_child[static_cast<std::size_t>(i)]) leaves.push_back(i);
  }
  int y = -1;
  if (mode == OutcomeMode::Leaf) {
    y = leaves[static_cast<std::size_t>(rng.below(leaves.size()))];
  } else {
    g.parents.push_back(leaves);
    y = n;
  }

  ScmInstance out;
  Network& net = out.scm;
  std::vector<VarId> id(g.parents.size(), -1);
  std::vector<VarId> noise(g.parents.size(), -1);
  for (std::size_t i = 0; i < g.parents.size(); ++i) {
    const std::string name = static_cast<int>(i) == n ? "Y" : "V" + std::to_string(i + 1);
    if (!g.parents[i].empty()) noise[i] = net.add_variable("R" + std::to_string(i + 1), 2);
    id[i] = net.add_variable(name, 2);
    out.g0.push_back(id[i]);
  }
  for (std::size_t i = 0; i < g.parents.size(); ++i) {
    auto prior = [&]() {
      double a = rng.uniform(0.05, 0.95);
      double b = rng.uniform(0.05, 0.95);
      return std::vector<double>{a / (a + b), b / (a + b)};
    };
    if (g.parents[i].empty()) {
      net.set_cpt(id[i], {}, prior());
      continue;
    }
    net.set_cpt(noise[i], {}, prior());
    std::vector<VarId> parents;
    for (int p : g.parents[i]) parents.push_back(id[static_cast<std::size_t>(p)]);
    parents.push_back(noise[i]);
    std::vector<double> table;
    const std::size_t rows = std::size_t{1} << parents.size();
    for (std::size_t r = 0; r < rows; ++r) {
      const bool one = rng.coin();
      table.push_back(one ? 0.0 : 1.0);
      table.push_back(one ? 1.0 : 0.0);
    }
    net.set_cpt(id[i], std::move(parents), std::move(table));
  }
  if (mode == OutcomeMode::Added) out.g0.pop_back();
  out.y = id[static_cast<std::size_t>(y)];
  out.n_prime = static_cast<int>(net.size());
  require_valid(net);
  return out;
}

/// Strict ancestors of `target`; edges into `cut` are ignored when cut >= 0.
inline std::vector<char> ancestors(const Network& net, VarId target, VarId cut = -1) {
  std::vector<char> seen(net.size(), 0);
  std::vector<VarId> stack{target};
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    if (v == cut) continue;
    for (VarId p : net.parents(v)) {
      if (!seen[static_cast<std::size_t>(p)]) {
        seen[static_cast<std::size_t>(p)] = 1;
        stack.push_back(p);
      }
    }
  }
  return seen;
}

struct Roles {
  std::vector<VarId> units;
  VarId x = -1;
  VarId y = -1;
};

/// Candidate units are causes of both X and Y that stay causes of Y once
/// the edges into X are removed.
inline std::vector<VarId> unit_candidates(const Network& scm, VarId x, VarId y) {
  const auto anc_x = ancestors(scm, x);
  const auto anc_y = ancestors(scm, y);
  const auto anc_y_cut = ancestors(scm, y, x);
  std::vector<VarId> out;
  for (VarId v = 0; v < static_cast<VarId>(scm.size()); ++v) {
    const auto i = static_cast<std::size_t>(v);
    if (anc_x[i] && anc_y[i] && anc_y_cut[i]) out.push_back(v);
  }
  return out;
}

/// X is a uniformly drawn skeleton ancestor of Y; U is a uniformly drawn
/// half (rounded up) of the candidates. nullopt when there is no candidate.
inline std::optional<Roles> select_roles(const ScmInstance& inst, Rng& rng) {
  const auto anc_y = ancestors(inst.scm, inst.y);
  std::vector<VarId> xs;
  for (VarId v : inst.g0) {
    if (anc_y[static_cast<std::size_t>(v)]) xs.push_back(v);
  }
  if (xs.empty()) return std::nullopt;
  Roles r;
  r.y = inst.y;
  r.x = xs[static_cast<std::size_t>(rng.below(xs.size()))];
  auto cand = unit_candidates(inst.scm, r.x, r.y);
  if (cand.empty()) return std::nullopt;
  const std::size_t k = (cand.size() + 1) / 2;
  r.units = rng.sample(std::move(cand), k);
  std::sort(r.units.begin(), r.units.end());
  return r;
}

/// The four response types of the benefit function: (y_x, y'_x'),
/// (y_x, y_x'), (y'_x, y'_x'), (y'_x, y_x') with weights 40, -10, -10, -60,
/// where y and x are value 1. Weights are returned unshifted.
inline ObjectiveFunction build_benefit_objective(const Roles& roles) {
  const int outcomes[4][2] = {{1, 0}, {1, 1}, {0, 0}, {0, 1}};
  const double weights[4] = {40.0, -10.0, -10.0, -60.0};
  ObjectiveFunction obj;
  obj.units = roles.units;
  for (int k = 0; k < 4; ++k) {
    CounterfactualComponent c;
    c.weight = weights[k];
    c.treatments = {{roles.x, 1, 1}, {roles.x, 2, 0}};
    c.outcomes = {{roles.y, 1, outcomes[k][0]}, {roles.y, 2, outcomes[k][1]}};
    obj.components.push_back(std::move(c));
  }
  return obj;
}

/// Benefit objective with the weight shift applied: (100, 50, 50, 0), c = 60.
inline std::pair<ObjectiveFunction, ShiftRecord> build_benefit_instance(const Network& scm, const Roles& roles) {
  return shift_weights(scm, build_benefit_objective(roles));
}

struct BenchInstance {
  std::uint64_t seed = 0;
  int n = 0;
  ScmInstance scm;
  Roles roles;
  ObjectiveFunction objective;  // shifted
  ShiftRecord shift;
  ObjectiveModel model;  // pruned
  int attempts = 0;
};

/// Generates an accepted instance, resampling the whole SCM on rejection.
inline BenchInstance make_instance(const GenConfig& cfg, std::uint64_t seed, int max_attempts = 100) {
  validate_config(cfg);
  Rng rng(seed);
  for (int a = 1; a <= max_attempts; ++a) {
    auto g = generate_dag(cfg, rng);
    auto inst = dag_to_scm(g, rng, cfg.outcome_mode);
    auto roles = select_roles(inst, rng);
    if (!roles) continue;
    BenchInstance b;
    b.seed = seed;
    b.n = cfg.n;
    b.attempts = a;
    b.scm = std::move(inst);
    b.roles = *roles;
    std::tie(b.objective, b.shift) = build_benefit_instance(b.scm.scm, b.roles);
    b.model = prune_barren(compose_objective(b.scm.scm, b.objective));
    return b;
  }
  throw EngineError("generator: no acceptable role assignment after " + std::to_string(max_attempts) +
                    " attempts");
}

inline std::uint64_t instance_seed(std::uint64_t seed, int n, int index) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(index));
}

struct BenchRecord {
  std::uint64_t seed = 0;
  int n = 0;
  int n_prime = 0;
  int u_count = 0;
  int tw = -1;
  std::size_t model_nodes = 0;
  bool done_ve = false, done_ac = false, done_brute = false;
  double time_ve = 0, time_ac = 0, time_brute = 0;
  std::uint64_t ve_size = 0;
  std::size_t ac_nodes = 0, ac_edges = 0;
  double value_ve = 0, value_ac = 0, value_brute = 0;
  std::uint64_t ac_ops = 0;
  std::optional<bool> agree;
  std::string error;
};

struct EngineSet {
  bool ve = true;
  bool ac = true;
  bool brute = false;
};

inline EngineSet parse_engines(const std::string& text) {
  EngineSet e{false, false, false};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "ve") e.ve = true;
    else if (item == "ac") e.ac = true;
    else if (item == "brute" || item == "oracle") e.brute = true;
    else if (item == "all") e = {true, true, true};
    else if (!item.empty()) throw InputError("unknown engine '" + item + "'");
  }
  return e;
}

inline bool values_agree(double a, double b, double tol = 1e-9) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

/// One instance through the whole pipeline. Engine failures are recorded,
/// never thrown.
inline BenchRecord run_instance(const GenConfig& cfg, std::uint64_t seed, const EngineSet& engines) {
  BenchRecord rec;
  rec.seed = seed;
  rec.n = cfg.n;
  BenchInstance inst;
  try {
    inst = make_instance(cfg, seed);
  } catch (const Error& e) {
    rec.error = e.what();
    return rec;
  }
  const auto& model = inst.model;
  rec.n_prime = inst.scm.n_prime;
  rec.u_count = static_cast<int>(inst.roles.units.size());
  rec.model_nodes = model.network.size();
  rec.tw = minfill_order(model.network, model.units).width;
  const auto limit = std::chrono::duration<double>(cfg.timeout);

  auto note = [&](const char* engine, const std::exception& e) {
    if (!rec.error.empty()) rec.error += "; ";
    rec.error += std::string(engine) + ": " + e.what();
  };
  if (engines.ve) {
    try {
      auto r = ve_rmap(model.network, model.units, model.e1, model.e2, Deadline(limit));
      rec.done_ve = true;
      rec.time_ve = r.stats.elapsed;
      rec.ve_size = r.stats.ve_size;
      rec.value_ve = r.value;
    } catch (const Error& e) {
      note("ve", e);
    }
  }
  if (engines.ac) {
    try {
      detail::Timer timer;
      Deadline deadline(limit);
      auto ac = simplify(compile_ve(model.network, model.units, deadline));
      deadline.check();
      auto r = ac_rmap(ac, model.units, model.e1, model.e2);
      rec.done_ac = true;
      rec.time_ac = timer.seconds();
      rec.ac_nodes = ac.node_count();
      rec.ac_edges = ac.edge_count();
      rec.ac_ops = r.stats.ops;
      rec.value_ac = r.value;
    } catch (const Error& e) {
      note("ac", e);
    }
  }
  if (engines.brute) {
    try {
      detail::Timer timer;
      auto r = brute_rmap(model.network, model.units, model.e1, model.e2);
      rec.done_brute = true;
      rec.time_brute = timer.seconds();
      rec.value_brute = r.value;
    } catch (const Error& e) {
      note("brute", e);
    }
  }
  std::vector<double> values;
  if (rec.done_ve) values.push_back(rec.value_ve);
  if (rec.done_ac) values.push_back(rec.value_ac);
  if (rec.done_brute) values.push_back(rec.value_brute);
  if (values.size() >= 2) {
    bool ok = true;
    for (double v : values) ok = ok && values_agree(v, values[0]);
    rec.agree = ok;
  }
  return rec;
}

/// Runs `instances` seeded instances for every n in `ns` on `jobs` workers.
/// Records come back in (n, instance) order regardless of scheduling.
inline std::vector<BenchRecord> run_bench(GenConfig cfg, const std::vector<int>& ns, const EngineSet& engines,
                                          int jobs = 1) {
  struct Task {
    GenConfig cfg;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (int n : ns) {
    GenConfig c = cfg;
    c.n = n;
    validate_config(c);
    for (int i = 0; i < cfg.instances; ++i) tasks.push_back({c, instance_seed(cfg.seed, n, i)});
  }
  std::vector<BenchRecord> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      out[i] = run_instance(tasks[i].cfg, tasks[i].seed, engines);
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

namespace detail {

inline std::string fixed3(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

}  // namespace detail

inline const char* kBenchHeader =
    "seed,n,n_prime,u_count,tw,done_ve,time_ve,ve_size,done_ac,time_ac,ac_nodes,ac_edges,value_ve,value_ac,agree";

inline std::string bench_row(const BenchRecord& r) {
  using detail::format_double;
  std::string s = std::to_string(r.seed) + "," + std::to_string(r.n) + "," + std::to_string(r.n_prime) + "," +
                  std::to_string(r.u_count) + "," + std::to_string(r.tw) + ",";
  s += std::string(r.done_ve ? "1" : "0") + ",";
  s += (r.done_ve ? detail::fixed3(r.time_ve) : "") + ",";
  s += (r.done_ve ? std::to_string(r.ve_size) : "") + ",";
  s += std::string(r.done_ac ? "1" : "0") + ",";
  s += (r.done_ac ? detail::fixed3(r.time_ac) : "") + ",";
  s += (r.done_ac ? std::to_string(r.ac_nodes) : "") + ",";
  s += (r.done_ac ? std::to_string(r.ac_edges) : "") + ",";
  s += (r.done_ve ? format_double(r.value_ve) : "") + ",";
  s += (r.done_ac ? format_double(r.value_ac) : "") + ",";
  s += r.agree ? (*r.agree ? "1" : "0") : "";
  return s;
}

/// Per-n means over instances (each column averaged over the instances
/// where it is defined).
inline std::string bench_summary_row(int n, const std::vector<BenchRecord>& records) {
  auto mean = [&](auto pick, auto defined) {
    double sum = 0;
    int count = 0;
    for (const auto& r : records) {
      if (r.n != n || !defined(r)) continue;
      sum += pick(r);
      ++count;
    }
    return count ? std::optional<double>(sum / count) : std::nullopt;
  };
  auto all = [](const BenchRecord& r) { return r.n_prime > 0; };
  auto ve = [](const BenchRecord& r) { return r.done_ve; };
  auto ac = [](const BenchRecord& r) { return r.done_ac; };
  auto fmt = [](std::optional<double> v, bool three = true) {
    if (!v) return std::string();
    return three ? detail::fixed3(*v) : detail::format_double(*v);
  };
  std::string s = "mean," + std::to_string(n) + ",";
  s += fmt(mean([](auto& r) { return r.n_prime; }, all)) + ",";
  s += fmt(mean([](auto& r) { return r.u_count; }, all)) + ",";
  s += fmt(mean([](auto& r) { return r.tw; }, all)) + ",";
  s += fmt(mean([](auto& r) { return r.done_ve ? 1.0 : 0.0; }, all)) + ",";
  s += fmt(mean([](auto& r) { return r.time_ve; }, ve)) + ",";
  s += fmt(mean([](auto& r) { return static_cast<double>(r.ve_size); }, ve)) + ",";
  s += fmt(mean([](auto& r) { return r.done_ac ? 1.0 : 0.0; }, all)) + ",";
  s += fmt(mean([](auto& r) { return r.time_ac; }, ac)) + ",";
  s += fmt(mean([](auto& r) { return static_cast<double>(r.ac_nodes); }, ac)) + ",";
  s += fmt(mean([](auto& r) { return static_cast<double>(r.ac_edges); }, ac)) + ",";
  s += fmt(mean([](auto& r) { return r.value_ve; }, ve), false) + ",";
  s += fmt(mean([](auto& r) { return r.value_ac; }, ac), false) + ",";
  s += fmt(mean([](auto& r) { return r.agree && *r.agree ? 1.0 : 0.0; },
                [](const BenchRecord& r) { return r.agree.has_value(); }));
  return s;
}

inline std::string bench_csv(const std::vector<BenchRecord>& records, const std::vector<int>& ns) {
  std::string out = std::string(kBenchHeader) + "\n";
  for (const auto& r : records) out += bench_row(r) + "\n";
  for (int n : ns) out += bench_summary_row(n, records) + "\n";
  return out;
}

}  // namespace unitsel
