#pragma once

#include <random>
#include <vector>

#include "unitsel/unitsel.hpp"

namespace testing_support {

using namespace unitsel;

/// Random network over n variables in id order: each variable picks up to
/// `max_parents` earlier parents. With probability `det` a CPT row is a
/// point mass.
inline Network random_network(std::mt19937_64& rng, int n, int max_parents = 3, int max_card = 2,
                              double det = 0.0) {
  Network net;
  std::uniform_int_distribution<int> card(2, max_card);
  for (int i = 0; i < n; ++i) net.add_variable("X" + std::to_string(i), card(rng));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (VarId v = 0; v < n; ++v) {
    std::vector<VarId> pool;
    for (VarId p = 0; p < v; ++p) pool.push_back(p);
    std::shuffle(pool.begin(), pool.end(), rng);
    int k = std::uniform_int_distribution<int>(0, std::min<int>(max_parents, v))(rng);
    pool.resize(static_cast<std::size_t>(k));
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t rows = 1;
    for (VarId p : pool) rows *= static_cast<std::size_t>(net.cardinality(p));
    const int c = net.cardinality(v);
    std::vector<double> table;
    for (std::size_t r = 0; r < rows; ++r) {
      if (u01(rng) < det) {
        int hot = std::uniform_int_distribution<int>(0, c - 1)(rng);
        for (int x = 0; x < c; ++x) table.push_back(x == hot ? 1.0 : 0.0);
        continue;
      }
      std::vector<double> row;
      double sum = 0;
      for (int x = 0; x < c; ++x) {
        row.push_back(0.05 + u01(rng));
        sum += row.back();
      }
      for (double& p : row) table.push_back(p / sum);
    }
    net.set_cpt(v, pool, table);
  }
  require_valid(net);
  return net;
}

/// Random evidence on up to `k` variables outside `skip`.
inline Evidence random_evidence(std::mt19937_64& rng, const Network& net, int k,
                                const std::vector<VarId>& skip = {}) {
  std::vector<VarId> pool;
  for (const auto& v : net.variables()) {
    if (std::find(skip.begin(), skip.end(), v.id) == skip.end()) pool.push_back(v.id);
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  Evidence e;
  for (int i = 0; i < k && i < static_cast<int>(pool.size()); ++i) {
    e.set(pool[static_cast<std::size_t>(i)],
          std::uniform_int_distribution<int>(0, net.cardinality(pool[static_cast<std::size_t>(i)]) - 1)(rng));
  }
  return e;
}

inline std::vector<VarId> random_subset(std::mt19937_64& rng, std::vector<VarId> pool, int k) {
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(k)));
  std::sort(pool.begin(), pool.end());
  return pool;
}

/// The factor f(A, B) with rows (a,b)=3, (a,b̄)=4, (ā,b)=10, (ā,b̄)=12 as an
/// unnormalized two-variable model; value 0 is the unbarred literal.
inline Network ab_network() {
  Network net;
  VarId a = net.add_variable("A");
  VarId b = net.add_variable("B");
  net.set_cpt(a, {}, {1.0, 1.0});
  net.set_cpt(b, {a}, {3.0, 4.0, 10.0, 12.0});
  return net;
}

/// All complete instantiations of the network.
inline std::vector<Instantiation> all_instantiations(const Network& net) {
  std::vector<VarId> vars;
  for (const auto& v : net.variables()) vars.push_back(v.id);
  std::vector<Instantiation> out;
  for_each_instantiation(net, vars, [&](const Instantiation& x) { out.push_back(x); });
  return out;
}

/// Product of CPT entries at a complete instantiation.
inline double joint_at(const Network& net, const Instantiation& x) {
  double p = 1.0;
  for (const auto& v : net.variables()) p *= net.probability(v.id, [&](VarId w) { return x.at(w); });
  return p;
}

inline bool close(double a, double b, double tol = 1e-9) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace testing_support
