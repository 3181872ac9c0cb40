#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "unitsel/network.hpp"

namespace unitsel {

/// Dense tables are capped at 2^25 entries (25 binary variables).
inline constexpr double kMaxFactorEntries = 33554432.0;

/// A dense table over an ordered scope, row-major with the last scope
/// variable fastest (the CPT convention).
class Factor {
 public:
  Factor() : values_{1.0} {}

  Factor(std::vector<VarId> scope, std::vector<int> cards, std::vector<double> values)
      : scope_(std::move(scope)), cards_(std::move(cards)), values_(std::move(values)) {
    if (scope_.size() != cards_.size()) throw InputError("factor: scope/cardinality mismatch");
    if (values_.size() != table_size(cards_)) throw InputError("factor: table length mismatch");
  }

  /// Zero-filled factor; enforces the dense size cap.
  static Factor zeros(std::vector<VarId> scope, std::vector<int> cards) {
    double n = 1.0;
    for (int c : cards) n *= c;
    if (n > kMaxFactorEntries) throw ScopeCapError(scope.size(), n);
    std::vector<double> values(static_cast<std::size_t>(n), 0.0);
    return Factor(std::move(scope), std::move(cards), std::move(values));
  }

  static Factor constant(double value) {
    Factor f;
    f.values_[0] = value;
    return f;
  }

  const std::vector<VarId>& scope() const { return scope_; }
  const std::vector<int>& cards() const { return cards_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  bool contains(VarId v) const { return position(v) >= 0; }
  int position(VarId v) const {
    auto it = std::find(scope_.begin(), scope_.end(), v);
    return it == scope_.end() ? -1 : static_cast<int>(it - scope_.begin());
  }

  /// Entry at an assignment that covers the whole scope.
  double at(const Evidence& full) const {
    std::size_t index = 0;
    for (std::size_t k = 0; k < scope_.size(); ++k) {
      index = index * static_cast<std::size_t>(cards_[k]) + static_cast<std::size_t>(full.at(scope_[k]));
    }
    return values_[index];
  }

  /// Value indices of entry `index`, in scope order.
  std::vector<int> decode(std::size_t index) const {
    std::vector<int> out(scope_.size());
    for (std::size_t k = scope_.size(); k-- > 0;) {
      out[k] = static_cast<int>(index % static_cast<std::size_t>(cards_[k]));
      index /= static_cast<std::size_t>(cards_[k]);
    }
    return out;
  }

  static std::size_t table_size(const std::vector<int>& cards) {
    std::size_t n = 1;
    for (int c : cards) n *= static_cast<std::size_t>(c);
    return n;
  }

 private:
  std::vector<VarId> scope_;
  std::vector<int> cards_;
  std::vector<double> values_;
};

inline Factor factor_from_cpt(const Network& net, VarId var) {
  const Cpt& c = net.cpt(var);
  std::vector<VarId> scope = c.parents;
  scope.push_back(var);
  std::vector<int> cards;
  for (VarId v : scope) cards.push_back(net.cardinality(v));
  return Factor(std::move(scope), std::move(cards), c.table);
}

/// Zeroes entries inconsistent with `e`; the scope is unchanged.
inline Factor reduce(const Factor& f, const Evidence& e) {
  std::vector<std::pair<int, int>> fixed;  // (scope position, value)
  for (std::size_t k = 0; k < f.scope().size(); ++k) {
    if (auto x = e.get(f.scope()[k])) fixed.emplace_back(static_cast<int>(k), *x);
  }
  if (fixed.empty()) return f;
  Factor out = f;
  std::vector<std::size_t> stride(f.scope().size(), 1);
  for (std::size_t k = f.scope().size(); k-- > 1;) {
    stride[k - 1] = stride[k] * static_cast<std::size_t>(f.cards()[k]);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (auto [pos, x] : fixed) {
      auto value = (i / stride[static_cast<std::size_t>(pos)]) %
                   static_cast<std::size_t>(f.cards()[static_cast<std::size_t>(pos)]);
      if (value != static_cast<std::size_t>(x)) {
        out.values()[i] = 0.0;
        break;
      }
    }
  }
  return out;
}

namespace detail {

// Strides of `f`'s variables laid out along `scope` (0 for absent ones).
inline std::vector<std::size_t> strides_in(const Factor& f, const std::vector<VarId>& scope) {
  std::vector<std::size_t> own(f.scope().size(), 1);
  for (std::size_t k = f.scope().size(); k-- > 1;) {
    own[k - 1] = own[k] * static_cast<std::size_t>(f.cards()[k]);
  }
  std::vector<std::size_t> out(scope.size(), 0);
  for (std::size_t k = 0; k < scope.size(); ++k) {
    int pos = f.position(scope[k]);
    if (pos >= 0) out[k] = own[static_cast<std::size_t>(pos)];
  }
  return out;
}

}  // namespace detail

/// Entrywise product over the ordered union of scopes (f1's variables first).
inline Factor multiply(const Factor& f1, const Factor& f2) {
  std::vector<VarId> scope = f1.scope();
  std::vector<int> cards = f1.cards();
  for (std::size_t k = 0; k < f2.scope().size(); ++k) {
    if (!f1.contains(f2.scope()[k])) {
      scope.push_back(f2.scope()[k]);
      cards.push_back(f2.cards()[k]);
    }
  }
  Factor out = Factor::zeros(scope, cards);
  const auto s1 = detail::strides_in(f1, scope);
  const auto s2 = detail::strides_in(f2, scope);
  std::vector<int> digit(scope.size(), 0);
  std::size_t i1 = 0, i2 = 0;
  auto& values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = f1[i1] * f2[i2];
    // odometer increment, last variable fastest
    for (std::size_t k = scope.size(); k-- > 0;) {
      if (++digit[k] < cards[k]) {
        i1 += s1[k];
        i2 += s2[k];
        break;
      }
      digit[k] = 0;
      i1 -= s1[k] * static_cast<std::size_t>(cards[k] - 1);
      i2 -= s2[k] * static_cast<std::size_t>(cards[k] - 1);
    }
  }
  return out;
}

namespace detail {

struct Split {
  std::size_t outer = 1, card = 1, inner = 1;
  std::vector<VarId> scope;
  std::vector<int> cards;
};

inline Split split_at(const Factor& f, VarId x, const char* op) {
  int pos = f.position(x);
  if (pos < 0) throw InputError(std::string(op) + ": variable " + std::to_string(x) + " not in scope");
  Split s;
  for (std::size_t k = 0; k < f.scope().size(); ++k) {
    auto c = static_cast<std::size_t>(f.cards()[k]);
    if (static_cast<int>(k) < pos) s.outer *= c;
    else if (static_cast<int>(k) > pos) s.inner *= c;
    else s.card = c;
    if (static_cast<int>(k) != pos) {
      s.scope.push_back(f.scope()[k]);
      s.cards.push_back(f.cards()[k]);
    }
  }
  return s;
}

}  // namespace detail

inline Factor sum_out(const Factor& f, VarId x) {
  auto s = detail::split_at(f, x, "sum_out");
  Factor out = Factor::zeros(s.scope, s.cards);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t v = 0; v < s.card; ++v) {
      const std::size_t base = (o * s.card + v) * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) out.values()[o * s.inner + i] += f[base + i];
    }
  }
  return out;
}

struct MaxOutResult {
  Factor values;
  /// Smallest maximizing value index per entry of `values`.
  std::vector<int> argmax;
};

inline MaxOutResult max_out(const Factor& f, VarId x) {
  auto s = detail::split_at(f, x, "max_out");
  MaxOutResult r{Factor::zeros(s.scope, s.cards), std::vector<int>(s.outer * s.inner, 0)};
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      double best = f[o * s.card * s.inner + i];
      int arg = 0;
      for (std::size_t v = 1; v < s.card; ++v) {
        double value = f[(o * s.card + v) * s.inner + i];
        if (value > best) {
          best = value;
          arg = static_cast<int>(v);
        }
      }
      r.values.values()[o * s.inner + i] = best;
      r.argmax[o * s.inner + i] = arg;
    }
  }
  return r;
}

/// Entrywise quotient of identically scoped factors with 0/0 = 0.
inline Factor divide(const Factor& num, const Factor& den) {
  if (num.scope() != den.scope()) throw InputError("divide: scope mismatch");
  Factor out = num;
  for (std::size_t i = 0; i < num.size(); ++i) {
    if (den[i] == 0.0) {
      if (num[i] != 0.0) {
        throw SupportError("divide: nonzero numerator " + std::to_string(num[i]) +
                           " over zero denominator at entry " + std::to_string(i));
      }
      out.values()[i] = 0.0;
    } else {
      out.values()[i] = num[i] / den[i];
    }
  }
  return out;
}

/// Same table with its scope permuted into `scope`.
inline Factor reorder(const Factor& f, const std::vector<VarId>& scope) {
  if (scope.size() != f.scope().size()) throw InputError("reorder: scope size mismatch");
  std::vector<int> cards;
  for (VarId v : scope) {
    int pos = f.position(v);
    if (pos < 0) throw InputError("reorder: variable not in scope");
    cards.push_back(f.cards()[static_cast<std::size_t>(pos)]);
  }
  Factor out = Factor::zeros(scope, cards);
  Factor ones = Factor(scope, cards, std::vector<double>(out.size(), 1.0));
  // multiply() lays the result out along its first operand's scope
  Factor product = multiply(ones, f);
  out.values() = std::move(product.values());
  return out;
}

}  // namespace unitsel
