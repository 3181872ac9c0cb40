#include <gtest/gtest.h>

#include <numeric>

#include "support.hpp"

using namespace unitsel;
using namespace testing_support;

namespace {

Factor ab_factor() { return Factor({0, 1}, {2, 2}, {3, 4, 10, 12}); }

// Minimum width over every order that eliminates non-targets first.
int exhaustive_width(const InteractionGraph& g, const std::vector<VarId>& targets) {
  std::vector<VarId> rest, tail;
  for (VarId v = 0; v < static_cast<VarId>(g.size()); ++v) {
    if (std::find(targets.begin(), targets.end(), v) == targets.end()) rest.push_back(v);
    else tail.push_back(v);
  }
  int best = 1 << 30;
  std::sort(rest.begin(), rest.end());
  do {
    std::sort(tail.begin(), tail.end());
    do {
      auto order = rest;
      order.insert(order.end(), tail.begin(), tail.end());
      best = std::min(best, order_width(g, order));
    } while (std::next_permutation(tail.begin(), tail.end()));
  } while (std::next_permutation(rest.begin(), rest.end()));
  return best;
}

}  // namespace

TEST(Factor, AbTableReduce) {
  auto r = reduce(ab_factor(), Evidence{{0, 0}});
  EXPECT_EQ(r.values(), (std::vector<double>{3, 4, 0, 0}));
  EXPECT_EQ(r.scope(), (std::vector<VarId>{0, 1}));
}

TEST(Factor, AbTableSumOut) {
  auto s = sum_out(ab_factor(), 1);
  EXPECT_EQ(s.scope(), (std::vector<VarId>{0}));
  EXPECT_EQ(s.values(), (std::vector<double>{7, 22}));
  auto t = sum_out(ab_factor(), 0);
  EXPECT_EQ(t.values(), (std::vector<double>{13, 16}));
}

TEST(Factor, AbTableMaxOut) {
  auto m = max_out(ab_factor(), 1);
  EXPECT_EQ(m.values.values(), (std::vector<double>{4, 12}));
  EXPECT_EQ(m.argmax, (std::vector<int>{1, 1}));
  auto tie = max_out(Factor({0}, {3}, {2, 5, 5}), 0);
  EXPECT_EQ(tie.argmax, (std::vector<int>{1}));
}

TEST(Factor, MultiplyMatchesPointwise) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> fv(6), gv(8);
  for (auto& x : fv) x = u(rng);
  for (auto& x : gv) x = u(rng);
  Factor f({2, 0}, {3, 2}, fv);
  Factor g({0, 1, 3}, {2, 2, 2}, gv);
  auto h = multiply(f, g);
  EXPECT_EQ(h.scope(), (std::vector<VarId>{2, 0, 1, 3}));
  for (std::size_t i = 0; i < h.size(); ++i) {
    auto d = h.decode(i);
    Evidence full;
    for (std::size_t k = 0; k < d.size(); ++k) full.set(h.scope()[k], d[k]);
    EXPECT_DOUBLE_EQ(h[i], f.at(full) * g.at(full));
  }
}

TEST(Factor, MultiplyIdentity) {
  auto f = ab_factor();
  EXPECT_EQ(multiply(Factor(), f).values(), f.values());
  EXPECT_EQ(multiply(f, Factor::constant(2.0)).values(), (std::vector<double>{6, 8, 20, 24}));
}

TEST(Factor, ReorderPermutesTable) {
  auto f = ab_factor();
  auto g = reorder(f, {1, 0});
  EXPECT_EQ(g.scope(), (std::vector<VarId>{1, 0}));
  EXPECT_EQ(g.values(), (std::vector<double>{3, 10, 4, 12}));
}

TEST(Factor, DivideZeroOverZero) {
  Factor num({0}, {3}, {0, 2, 0});
  Factor den({0}, {3}, {0, 4, 5});
  EXPECT_EQ(divide(num, den).values(), (std::vector<double>{0, 0.5, 0}));
  Factor bad({0}, {3}, {1, 2, 0});
  EXPECT_THROW(divide(bad, den), SupportError);
  EXPECT_THROW(divide(num, Factor({1}, {3}, {1, 1, 1})), InputError);
}

TEST(Factor, ScopeCap) {
  std::vector<VarId> scope(26);
  std::iota(scope.begin(), scope.end(), 0);
  EXPECT_THROW(Factor::zeros(scope, std::vector<int>(26, 2)), ScopeCapError);
  EXPECT_THROW(sum_out(ab_factor(), 5), InputError);
  EXPECT_THROW(Factor({0, 1}, {2, 2}, {1, 2, 3}), InputError);
}

TEST(Factor, FromCptScopeOrder) {
  auto net = ab_network();
  auto f = factor_from_cpt(net, 1);
  EXPECT_EQ(f.scope(), (std::vector<VarId>{0, 1}));
  EXPECT_EQ(f.values(), (std::vector<double>{3, 4, 10, 12}));
}

TEST(MinFill, ConstrainedOrderAndWidth) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    auto net = random_network(rng, 7, 3);
    std::vector<VarId> all(7);
    std::iota(all.begin(), all.end(), 0);
    auto targets = random_subset(rng, all, static_cast<int>(rng() % 4));
    auto g = moral_graph(net);
    auto plan = minfill_order(g, targets);
    ASSERT_EQ(plan.order.size(), 7u);
    EXPECT_TRUE(is_constrained(plan, targets));
    EXPECT_EQ(plan.block_boundary, 7 - targets.size());
    EXPECT_EQ(order_width(g, plan.order), plan.width);
    EXPECT_GE(plan.width, exhaustive_width(g, targets));
  }
}

TEST(MinFill, TreesAndCliques) {
  InteractionGraph path(6);
  for (VarId v = 0; v + 1 < 6; ++v) path.connect(v, v + 1);
  EXPECT_EQ(minfill_order(path, {}).width, 1);
  EXPECT_EQ(exhaustive_width(path, {}), 1);
  InteractionGraph clique(5);
  for (VarId a = 0; a < 5; ++a) {
    for (VarId b = a + 1; b < 5; ++b) clique.connect(a, b);
  }
  EXPECT_EQ(minfill_order(clique, {}).width, 4);
  // a star whose centre is a target: every leaf goes first
  InteractionGraph star(5);
  for (VarId v = 1; v < 5; ++v) star.connect(0, v);
  auto plan = minfill_order(star, {0});
  EXPECT_EQ(plan.order.back(), 0);
  EXPECT_EQ(plan.width, 1);
}
