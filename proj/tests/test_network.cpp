#include <gtest/gtest.h>

#include "support.hpp"

using namespace unitsel;
using namespace testing_support;

namespace {

const char* kChain = R"({
  "variables": [{"name": "A", "cardinality": 2}, {"name": "B", "cardinality": 2}],
  "cpts": [{"child": "A", "parents": [], "table": [0.3, 0.7]},
           {"child": "B", "parents": ["A"], "table": [0.9, 0.1, 0.2, 0.8]}]
})";

}  // namespace

TEST(ParseNetwork, SingleRoot) {
  auto net = parse_network(R"({"variables": [{"name": "A", "cardinality": 2}],
                               "cpts": [{"child": "A", "parents": [], "table": [0.3, 0.7]}]})");
  ASSERT_EQ(net.size(), 1u);
  EXPECT_EQ(net.cpt(0).table.size(), 2u);
  EXPECT_TRUE(net.is_root(0));
}

TEST(ParseNetwork, ChainTopologicalOrder) {
  auto net = parse_network(kChain);
  EXPECT_EQ(net.cpt(net.id_of("B")).table.size(), 4u);
  EXPECT_EQ(topological_order(net), (std::vector<VarId>{0, 1}));
}

TEST(ParseNetwork, ChildDeclaredBeforeParent) {
  auto net = parse_network(R"({
    "cpts": [{"table": [0.9, 0.1, 0.2, 0.8], "parents": ["A"], "child": "B"},
             {"child": "A", "table": [0.3, 0.7]}],
    "variables": [{"name": "B", "cardinality": 2}, {"name": "A", "cardinality": 2}]})");
  EXPECT_EQ(net.id_of("B"), 0);
  EXPECT_EQ(topological_order(net), (std::vector<VarId>{1, 0}));
}

TEST(ParseNetwork, SyntaxErrorReportsPosition) {
  try {
    parse_network("{\"variables\": [}");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
}

TEST(ParseNetwork, ValidationErrors) {
  EXPECT_THROW(parse_network(R"({"variables": [{"name": "A"}],
                                 "cpts": [{"child": "A", "table": [0.3, 0.6]}]})"),
               InputError);
  EXPECT_THROW(parse_network(R"({"variables": [{"name": "A"}],
                                 "cpts": [{"child": "A", "table": [1.0]}]})"),
               InputError);
  EXPECT_THROW(parse_network(R"({"variables": [{"name": "A"}, {"name": "B"}],
      "cpts": [{"child": "A", "parents": ["B"], "table": [1, 0, 0, 1]},
               {"child": "B", "parents": ["A"], "table": [1, 0, 0, 1]}]})"),
               InputError);
}

TEST(ParseNetwork, RoundTripIsBitExact) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto net = random_network(rng, 8, 3, 3);
    auto text = serialize_network(net);
    auto back = parse_network(text);
    EXPECT_TRUE(back == net);
    EXPECT_EQ(serialize_network(back), text);
  }
}

TEST(ValidateNetwork, ValidChain) { EXPECT_TRUE(validate_network(parse_network(kChain)).ok()); }

TEST(ValidateNetwork, RowNotNormalized) {
  Network net;
  VarId a = net.add_variable("A");
  VarId b = net.add_variable("B");
  net.set_cpt(a, {}, {0.5, 0.5});
  net.set_cpt(b, {a}, {0.5, 0.4, 0.5, 0.5});
  auto report = validate_network(net);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, Violation::Kind::NotNormalized);
  EXPECT_EQ(report.violations[0].var, b);
  EXPECT_NE(report.summary().find("'B'"), std::string::npos);
}

TEST(ValidateNetwork, TwoCycle) {
  Network net;
  VarId a = net.add_variable("A");
  VarId b = net.add_variable("B");
  net.set_cpt(a, {b}, {1, 0, 0, 1});
  net.set_cpt(b, {a}, {1, 0, 0, 1});
  auto report = validate_network(net);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.count(Violation::Kind::Cycle), 1u);
  EXPECT_THROW(topological_order(net), InputError);
}

TEST(ValidateNetwork, StructuralViolations) {
  Network net;
  VarId a = net.add_variable("A");
  VarId b = net.add_variable("B", 3);
  net.set_cpt(a, {}, {0.5, 0.5});
  net.set_cpt(b, {a}, {1, 0, 0});
  EXPECT_EQ(validate_network(net).count(Violation::Kind::TableLength), 1u);
  net.set_cpt(b, {a, a}, {});
  EXPECT_EQ(validate_network(net).count(Violation::Kind::DuplicateParent), 1u);
  net.set_cpt(b, {7}, {});
  EXPECT_EQ(validate_network(net).count(Violation::Kind::UnknownParent), 1u);
  net.set_cpt(b, {}, {1.5, -0.5, 0.0});
  EXPECT_EQ(validate_network(net).count(Violation::Kind::OutOfRange), 1u);
  Network missing;
  missing.add_variable("A");
  EXPECT_EQ(validate_network(missing).count(Violation::Kind::MissingCpt), 1u);
  Network bad_card;
  VarId c = bad_card.add_variable("C", 1);
  bad_card.set_cpt(c, {}, {1.0});
  EXPECT_EQ(validate_network(bad_card).count(Violation::Kind::BadCardinality), 1u);
  EXPECT_THROW(missing.add_variable("A"), InputError);
}

TEST(TopologicalOrder, Chain) {
  Network net;
  VarId a = net.add_variable("A"), b = net.add_variable("B"), c = net.add_variable("C");
  net.set_cpt(a, {}, {0.5, 0.5});
  net.set_cpt(b, {a}, {1, 0, 0, 1});
  net.set_cpt(c, {b}, {1, 0, 0, 1});
  EXPECT_EQ(topological_order(net), (std::vector<VarId>{a, b, c}));
}

TEST(TopologicalOrder, TieBreakById) {
  Network net;
  VarId c = net.add_variable("C"), b = net.add_variable("B"), a = net.add_variable("A");
  net.set_cpt(a, {}, {0.5, 0.5});
  net.set_cpt(b, {}, {0.5, 0.5});
  net.set_cpt(c, {a, b}, {1, 0, 1, 0, 1, 0, 0, 1});
  // ids: C=0, B=1, A=2; the roots come out in id order
  EXPECT_EQ(topological_order(net), (std::vector<VarId>{b, a, c}));
}

TEST(TopologicalOrder, RandomEdgesPointForward) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto base = random_network(rng, 10, 4);
    // relabel in reverse so that id order is not topological
    Network net;
    for (int i = 9; i >= 0; --i) net.add_variable(base.name(i), base.cardinality(i));
    for (const auto& v : base.variables()) {
      std::vector<VarId> ps;
      for (VarId p : base.parents(v.id)) ps.push_back(9 - p);
      net.set_cpt(9 - v.id, ps, base.cpt(v.id).table);
    }
    auto order = topological_order(net);
    std::vector<int> pos(net.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    for (const auto& v : net.variables()) {
      for (VarId p : net.parents(v.id)) EXPECT_LT(pos[static_cast<std::size_t>(p)], pos[static_cast<std::size_t>(v.id)]);
    }
  }
}

TEST(Evidence, DuplicatesAndConflicts) {
  Evidence e;
  e.set(0, 1);
  EXPECT_THROW(e.set(0, 0), InputError);
  Evidence f{{0, 0}};
  EXPECT_THROW(Evidence::combine(e, f), InputError);
  EXPECT_FALSE(e.compatible(f));
  Evidence g = Evidence::combine(e, Evidence{{1, 0}});
  EXPECT_EQ(g.size(), 2u);
  auto net = parse_network(kChain);
  EXPECT_THROW(check_evidence(net, Evidence{{1, 2}}), InputError);
  EXPECT_THROW(check_evidence(net, Evidence{{5, 0}}), InputError);
}

TEST(EvidenceIo, ListAndJsonForms) {
  auto net = parse_network(kChain);
  auto e = parse_evidence_list(net, "A=1,B=0");
  EXPECT_EQ(e.at(0), 1);
  EXPECT_EQ(e.at(1), 0);
  EXPECT_EQ(evidence_from_json(net, evidence_to_json(net, e)), e);
  EXPECT_EQ(evidence_from_json(net, json{{"A", 1}, {"B", 0}}), e);
  EXPECT_TRUE(parse_evidence_list(net, "").empty());
  EXPECT_THROW(parse_evidence_list(net, "A"), InputError);
  EXPECT_THROW(parse_evidence_list(net, "Z=1"), InputError);
}

TEST(Network, JointSumsToOne) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto net = random_network(rng, 9, 3, 3);
    EXPECT_NEAR(joint_enumerate(net, {}), 1.0, 1e-9);
  }
}
