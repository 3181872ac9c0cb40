#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace unitsel;
using namespace testing_support;

namespace {

DagSkeleton skeleton(std::vector<std::vector<int>> parents) { return DagSkeleton{std::move(parents)}; }

std::set<std::string> names(const Network& net, const std::vector<VarId>& ids) {
  std::set<std::string> out;
  for (VarId v : ids) out.insert(net.name(v));
  return out;
}

}  // namespace

TEST(Rng, Deterministic) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  Rng c(7);
  for (int i = 0; i < 1000; ++i) {
    auto x = c.below(5);
    EXPECT_LT(x, 5u);
    int y = c.between(2, 4);
    EXPECT_GE(y, 2);
    EXPECT_LE(y, 4);
    double z = c.uniform(0.05, 0.95);
    EXPECT_GE(z, 0.05);
    EXPECT_LT(z, 0.95);
  }
  auto s = c.sample(std::vector<int>{1, 2, 3, 4, 5}, 3);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(std::set<int>(s.begin(), s.end()).size(), 3u);
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
}

TEST(GenerateDag, DegreeBounds) {
  GenConfig cfg;
  cfg.n = 30;
  cfg.p = 4;
  double total = 0;
  int nodes = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.seed = seed;
    auto g = generate_dag(cfg);
    ASSERT_EQ(g.size(), 30);
    EXPECT_TRUE(g.parents[0].empty());
    for (int i = 1; i < g.size(); ++i) {
      const auto& ps = g.parents[static_cast<std::size_t>(i)];
      EXPECT_GE(ps.size(), 1u);
      EXPECT_LE(ps.size(), static_cast<std::size_t>(std::min(cfg.p, i)));
      EXPECT_TRUE(std::is_sorted(ps.begin(), ps.end()));
      EXPECT_EQ(std::set<int>(ps.begin(), ps.end()).size(), ps.size());
      for (int p : ps) EXPECT_LT(p, i);
      total += static_cast<double>(ps.size());
      ++nodes;
    }
  }
  // uniform on 1..4 for most nodes: mean in-degree close to 2.5
  EXPECT_NEAR(total / nodes, 2.5, 0.2);
}

TEST(GenerateDag, RejectsBadConfig) {
  GenConfig cfg;
  cfg.n = 2;
  EXPECT_THROW(generate_dag(cfg), InputError);
  cfg.n = 10;
  cfg.p = 10;
  EXPECT_THROW(generate_dag(cfg), InputError);
  cfg.p = 0;
  EXPECT_THROW(generate_dag(cfg), InputError);
}

TEST(DagToScm, NoiseRootsAndCounts) {
  Rng rng(3);
  auto inst = dag_to_scm(skeleton({{}, {0}, {0, 1}}), rng);
  // V1 is a root; V2 and V3 each get a fresh noise root
  EXPECT_EQ(inst.n_prime, 5);
  EXPECT_EQ(inst.scm.name(inst.y), "V3");
  EXPECT_TRUE(inst.scm.is_root(inst.scm.id_of("R2")));
  auto v3 = inst.scm.id_of("V3");
  EXPECT_EQ(names(inst.scm, inst.scm.parents(v3)), (std::set<std::string>{"V1", "V2", "R3"}));
  for (const auto& v : inst.scm.variables()) {
    if (inst.scm.is_root(v.id)) continue;
    for (double p : inst.scm.cpt(v.id).table) EXPECT_TRUE(p == 0.0 || p == 1.0);
  }
  Rng again(3);
  auto added = dag_to_scm(skeleton({{}, {0}, {0, 1}}), again, OutcomeMode::Added);
  EXPECT_EQ(added.n_prime, 7);
  EXPECT_EQ(added.scm.name(added.y), "Y");
  EXPECT_EQ(added.g0.size(), 3u);
}

TEST(DagToScm, NPrimeForGeneratedSkeletons) {
  for (int n : {5, 10, 20}) {
    GenConfig cfg;
    cfg.n = n;
    cfg.p = 3;
    Rng rng(static_cast<std::uint64_t>(n));
    auto g = generate_dag(cfg, rng);
    EXPECT_EQ(dag_to_scm(g, rng).n_prime, 2 * n - 1);
    EXPECT_EQ(dag_to_scm(g, rng, OutcomeMode::Added).n_prime, 2 * n + 1);
  }
}

TEST(Roles, ChainHasNoCandidates) {
  Rng rng(1);
  auto inst = dag_to_scm(skeleton({{}, {0}, {1}}), rng);
  const auto& scm = inst.scm;
  // every cause of V2 reaches V3 only through V2
  EXPECT_TRUE(unit_candidates(scm, scm.id_of("V2"), inst.y).empty());
  EXPECT_EQ(names(scm, unit_candidates(scm, scm.id_of("V1"), inst.y)), std::set<std::string>{});
}

TEST(Roles, DiamondHasConfounder) {
  Rng rng(1);
  auto inst = dag_to_scm(skeleton({{}, {0}, {0, 1}}), rng);
  const auto& scm = inst.scm;
  EXPECT_EQ(names(scm, unit_candidates(scm, scm.id_of("V2"), inst.y)), (std::set<std::string>{"V1"}));
  Rng pick(9);
  for (int k = 0; k < 20; ++k) {
    auto roles = select_roles(inst, pick);
    if (!roles) continue;
    EXPECT_EQ(scm.name(roles->x), "V2");
    EXPECT_EQ(names(scm, roles->units), (std::set<std::string>{"V1"}));
  }
}

TEST(Roles, HalfOfCandidatesRoundedUp) {
  GenConfig cfg;
  cfg.n = 12;
  cfg.p = 4;
  for (int k = 0; k < 10; ++k) {
    auto inst = make_instance(cfg, instance_seed(17, cfg.n, k));
    auto cand = unit_candidates(inst.scm.scm, inst.roles.x, inst.roles.y);
    EXPECT_EQ(inst.roles.units.size(), (cand.size() + 1) / 2);
    for (VarId u : inst.roles.units) EXPECT_TRUE(std::binary_search(cand.begin(), cand.end(), u));
    EXPECT_FALSE(inst.scm.scm.is_root(inst.roles.x));
  }
}

TEST(MakeInstance, Deterministic) {
  GenConfig cfg;
  cfg.n = 10;
  cfg.p = 3;
  auto a = make_instance(cfg, 99);
  auto b = make_instance(cfg, 99);
  EXPECT_EQ(serialize_network(a.scm.scm), serialize_network(b.scm.scm));
  EXPECT_EQ(serialize_network(a.model.network), serialize_network(b.model.network));
  EXPECT_EQ(a.roles.units, b.roles.units);
  EXPECT_EQ(a.roles.x, b.roles.x);
  EXPECT_EQ(a.model.e1, b.model.e1);
  EXPECT_EQ(a.model.e2, b.model.e2);
  auto c = make_instance(cfg, 100);
  EXPECT_NE(serialize_network(a.scm.scm), serialize_network(c.scm.scm));
  EXPECT_TRUE(a.shift.shifted);
  EXPECT_DOUBLE_EQ(a.shift.c, 60.0);
}

TEST(Engines, Parse) {
  auto e = parse_engines("ve,brute");
  EXPECT_TRUE(e.ve);
  EXPECT_FALSE(e.ac);
  EXPECT_TRUE(e.brute);
  auto all = parse_engines("all");
  EXPECT_TRUE(all.ve && all.ac && all.brute);
  EXPECT_THROW(parse_engines("ve,gpu"), InputError);
  EXPECT_TRUE(values_agree(1.0, 1.0 + 1e-12));
  EXPECT_FALSE(values_agree(1.0, 1.001));
}

TEST(RunBench, EnginesAgreeAndCsvIsWellFormed) {
  GenConfig cfg;
  cfg.p = 3;
  cfg.instances = 3;
  cfg.seed = 11;
  cfg.timeout = 60;
  const std::vector<int> ns{5, 6};
  auto records = run_bench(cfg, ns, parse_engines("all"), 1);
  ASSERT_EQ(records.size(), 6u);
  for (const auto& r : records) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_TRUE(r.done_ve && r.done_ac && r.done_brute);
    ASSERT_TRUE(r.agree.has_value());
    EXPECT_TRUE(*r.agree);
    EXPECT_EQ(r.n_prime, 2 * r.n - 1);
    EXPECT_GT(r.ac_edges, 0u);
  }
  EXPECT_EQ(records[3].n, 6);
  auto csv = bench_csv(records, ns);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kBenchHeader);
  const auto columns = std::count(line.begin(), line.end(), ',');
  int rows = 0, means = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), columns) << line;
    if (line.rfind("mean,", 0) == 0) ++means;
    else ++rows;
  }
  EXPECT_EQ(rows, 6);
  EXPECT_EQ(means, 2);

  auto parallel = run_bench(cfg, ns, parse_engines("ve,ac"), 2);
  ASSERT_EQ(parallel.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(parallel[i].seed, records[i].seed);
    EXPECT_EQ(parallel[i].value_ve, records[i].value_ve);
    EXPECT_EQ(parallel[i].ac_edges, records[i].ac_edges);
  }
}
