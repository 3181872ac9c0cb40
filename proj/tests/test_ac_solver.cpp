#include <gtest/gtest.h>

#include <numeric>

#include "support.hpp"

using namespace unitsel;
using namespace testing_support;

namespace {

std::vector<VarId> all_ids(const Network& net) {
  std::vector<VarId> ids(net.size());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

TEST(AcEvaluate, AbTable) {
  auto ac = compile_ve(ab_network(), {});
  EXPECT_DOUBLE_EQ(evaluate(ac, Evidence{{0, 1}, {1, 1}}), 12.0);
  EXPECT_DOUBLE_EQ(evaluate(ac, Evidence{{0, 0}}), 7.0);
  EvalBuffer buf;
  EXPECT_DOUBLE_EQ(evaluate(ac, Evidence{{1, 0}}, &buf), 13.0);
  EXPECT_EQ(buf.values.size(), ac.node_count());
  EXPECT_THROW(evaluate(ac, Evidence{{0, 2}}), InputError);
  EXPECT_THROW(evaluate(ac, Evidence{{9, 0}}), InputError);
}

TEST(AcEvaluate, ParameterOverride) {
  Network net;
  net.add_variable("A");
  net.set_cpt(0, {}, {0.3, 0.7});
  auto ac = compile_ve(net, {});
  std::vector<double> params(ac.node_count(), 0.0);
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    if (ac.node(n).kind == NodeKind::Parameter) params[n] = 2 * ac.node(n).param;
  }
  EXPECT_DOUBLE_EQ(evaluate_with(ac, {}, params), 2.0);
  EXPECT_DOUBLE_EQ(evaluate_with(ac, Evidence{{0, 0}}, params), 0.6);
}

TEST(AcMap, AbTableAndPrior) {
  auto ac = compile_ve(ab_network(), {0});
  auto r = ac_map(ac, {0}, {});
  EXPECT_EQ(r.argmax.at(0), 1);
  EXPECT_DOUBLE_EQ(r.value, 22.0);
  auto s = ac_map(ac, {0}, Evidence{{1, 0}});
  EXPECT_EQ(s.argmax.at(0), 1);
  EXPECT_DOUBLE_EQ(s.value, 10.0);

  Network net;
  net.add_variable("A");
  net.set_cpt(0, {}, {0.3, 0.7});
  auto prior = ac_map(compile_ve(net, {0}), {0}, {});
  EXPECT_EQ(prior.argmax.at(0), 1);
  EXPECT_DOUBLE_EQ(prior.value, 0.7);
  EXPECT_GT(prior.stats.ops, 0u);
}

TEST(AcMap, MatchesVe) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 30; ++trial) {
    auto net = random_network(rng, 9, 3, 3, 0.3);
    auto units = random_subset(rng, all_ids(net), 1 + static_cast<int>(rng() % 3));
    auto e = random_evidence(rng, net, 2, units);
    auto ac = simplify(compile_ve(net, units));
    auto a = ac_map(ac, units, e);
    auto v = ve_map(net, units, e);
    EXPECT_TRUE(close(a.value, v.value, 1e-10));
    EXPECT_TRUE(close(joint_enumerate(net, Evidence::combine(e, a.argmax)), v.value, 1e-10));
  }
}

TEST(AcRmap, MatchesVeAndBruteForce) {
  std::mt19937_64 rng(71);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto net = random_network(rng, 10, 3, 2, 0.3);
    auto units = random_subset(rng, all_ids(net), 1 + static_cast<int>(rng() % 3));
    auto e1 = random_evidence(rng, net, 1 + static_cast<int>(rng() % 2), units);
    std::vector<VarId> skip = units;
    for (const auto& [v, x] : e1) skip.push_back(v);
    auto e2 = random_evidence(rng, net, static_cast<int>(rng() % 3), skip);
    auto ac = simplify(compile_ve(net, units));
    RmapResult expect;
    try {
      expect = brute_rmap(net, units, e1, e2);
    } catch (const InconsistentEvidenceError&) {
      EXPECT_THROW(ac_rmap(ac, units, e1, e2), InconsistentEvidenceError);
      continue;
    }
    auto a = ac_rmap(ac, units, e1, e2);
    auto v = ve_rmap(net, units, e1, e2);
    EXPECT_TRUE(close(a.value, expect.value, 1e-10)) << a.value << " vs " << expect.value;
    EXPECT_TRUE(close(a.value, v.value, 1e-10));
    EXPECT_TRUE(close(brute_conditional(net, a.argmax, e1, e2), expect.value, 1e-10));
    EXPECT_GT(joint_enumerate(net, Evidence::combine(e2, a.argmax)), 0.0);
    EXPECT_LE(a.stats.ops, 4 * ac_size(ac) + 4 * ac.node_count());
    ++checked;
  }
  EXPECT_GT(checked, 40);
}

TEST(AcRmap, DiffersFromMap) {
  Network net;
  VarId u = net.add_variable("U");
  VarId y = net.add_variable("Y");
  net.set_cpt(u, {}, {0.9, 0.1});
  net.set_cpt(y, {u}, {0.5, 0.5, 0.1, 0.9});
  auto ac = compile_ve(net, {u});
  EXPECT_EQ(ac_map(ac, {u}, Evidence{{y, 1}}).argmax.at(u), 0);
  auto r = ac_rmap(ac, {u}, Evidence{{y, 1}}, {});
  EXPECT_EQ(r.argmax.at(u), 1);
  EXPECT_DOUBLE_EQ(r.value, 0.9);
}

TEST(AcRmap, ZeroScoreKeepsFeasibleArgmax) {
  Network net;
  VarId u = net.add_variable("U");
  VarId z = net.add_variable("Z");
  VarId y = net.add_variable("Y");
  net.set_cpt(u, {}, {0.5, 0.5});
  net.set_cpt(z, {u}, {1.0, 0.0, 0.0, 1.0});
  net.set_cpt(y, {}, {1.0, 0.0});
  auto ac = compile_ve(net, {u});
  auto r = ac_rmap(ac, {u}, Evidence{{y, 1}}, Evidence{{z, 1}});
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.argmax.at(u), 1);
  EXPECT_EQ(ac_rmap(simplify(ac), {u}, Evidence{{y, 1}}, Evidence{{z, 1}}).argmax.at(u), 1);
}

TEST(AcRmap, RejectsUncertifiedUnits) {
  // chain A -> B -> C compiled without units: A is eliminated first, so its
  // decision sum sits at the bottom
  Network net;
  VarId a = net.add_variable("A"), b = net.add_variable("B"), c = net.add_variable("C");
  net.set_cpt(a, {}, {0.4, 0.6});
  net.set_cpt(b, {a}, {0.9, 0.1, 0.3, 0.7});
  net.set_cpt(c, {b}, {0.2, 0.8, 0.5, 0.5});
  auto ac = compile_ve(net, {});
  EXPECT_THROW(ac_rmap(ac, {a}, Evidence{{c, 0}}, {}), InputError);
  EXPECT_THROW(ac_map(ac, {a}, {}), InputError);
  EXPECT_THROW(ac_rmap(ac, {7}, {}, {}), InputError);
  auto good = compile_ve(net, {a});
  EXPECT_NO_THROW(ac_rmap(good, {a}, Evidence{{c, 0}}, {}));
}

TEST(DivideParametrizations, FrontierQuotients) {
  auto net = ab_network();
  auto ac = compile_ve(net, {0});
  const auto depends = ac.depends_on({0});
  const auto frontier = projection_frontier(ac, depends);
  std::vector<NodeId> nodes;
  for (NodeId n = 0; n < ac.node_count(); ++n) {
    if (!frontier[n]) continue;
    nodes.push_back(n);
    EXPECT_FALSE(depends[n]);
  }
  ASSERT_GE(nodes.size(), 2u);
  EvalBuffer num(ac.node_count()), den(ac.node_count());
  num.values[nodes[0]] = 0.0;
  den.values[nodes[0]] = 0.0;
  num.values[nodes[1]] = 2.0;
  den.values[nodes[1]] = 8.0;
  std::uint64_t ops = 0;
  auto q = divide_parametrizations(ac, {0}, num, den, &ops);
  EXPECT_EQ(q.values[nodes[0]], 0.0);
  EXPECT_EQ(q.values[nodes[1]], 0.25);
  EXPECT_EQ(ops, nodes.size());
  num.values[nodes[0]] = 1.0;
  EXPECT_THROW(divide_parametrizations(ac, {0}, num, den), SupportError);
  EXPECT_THROW(divide_parametrizations(ac, {0}, EvalBuffer(1), den), InputError);
}

TEST(DivideParametrizations, MatchesConditionalPerUnit) {
  // with U a single root, each unit-decision child gets Pr(e1 | u, e2)
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    auto net = random_network(rng, 6, 2, 2, 0.0);
    VarId u = 0;
    Evidence e1{{5, 1}};
    Evidence e2{{4, 0}};
    auto ac = compile_ve(net, {u});
    auto r = ac_rmap(ac, {u}, e1, e2);
    double best = 0.0;
    for (int x = 0; x < 2; ++x) best = std::max(best, brute_conditional(net, Instantiation{{u, x}}, e1, e2));
    EXPECT_TRUE(close(r.value, best, 1e-10));
  }
}
