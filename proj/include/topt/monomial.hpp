#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <vector>

#include "topt/errors.hpp"

namespace topt {

/// Exponent vector of a power product t1^e1 * ... * tn^en.
struct Monomial {
  std::vector<std::int32_t> e;

  Monomial() = default;
  explicit Monomial(std::size_t nvars) : e(nvars, 0) {}
  explicit Monomial(std::vector<std::int32_t> exps) : e(std::move(exps)) {}
  Monomial(std::initializer_list<std::int32_t> exps) : e(exps) {}

  static Monomial unit(std::size_t nvars, std::size_t var) {
    Monomial m(nvars);
    m.e[var] = 1;
    return m;
  }

  std::size_t nvars() const { return e.size(); }
  bool is_constant() const {
    return std::all_of(e.begin(), e.end(), [](std::int32_t v) { return v == 0; });
  }
  std::int64_t degree() const {
    return std::accumulate(e.begin(), e.end(), std::int64_t{0});
  }

  bool divides(const Monomial& m) const {
    if (e.size() != m.e.size()) throw DimensionError("monomial: nvars mismatch");
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] > m.e[i]) return false;
    return true;
  }

  Monomial operator*(const Monomial& o) const {
    if (e.size() != o.e.size()) throw DimensionError("monomial: nvars mismatch");
    Monomial r(*this);
    for (std::size_t i = 0; i < e.size(); ++i) r.e[i] += o.e[i];
    return r;
  }

  /// this / d; requires d.divides(*this).
  Monomial quotient(const Monomial& d) const {
    if (e.size() != d.e.size()) throw DimensionError("monomial: nvars mismatch");
    Monomial r(*this);
    for (std::size_t i = 0; i < e.size(); ++i) {
      r.e[i] -= d.e[i];
      if (r.e[i] < 0) throw Error("monomial: quotient of non-divisor");
    }
    return r;
  }

  static Monomial lcm(const Monomial& a, const Monomial& b) {
    if (a.e.size() != b.e.size()) throw DimensionError("monomial: nvars mismatch");
    Monomial r(a);
    for (std::size_t i = 0; i < r.e.size(); ++i) r.e[i] = std::max(r.e[i], b.e[i]);
    return r;
  }

  // Canonical container ordering for use as a map key; this is *not* a
  // monomial order (see order_compare).
  auto operator<=>(const Monomial&) const = default;
};

enum class MonomialOrder { lexicographic, grevlex };

/// Total order on same-length monomials. grevlex compares total degree
/// first, then breaks ties on the reversed exponent comparison.
inline std::strong_ordering order_compare(const Monomial& a, const Monomial& b,
                                          MonomialOrder ord) {
  if (a.nvars() != b.nvars()) throw DimensionError("order_compare: nvars mismatch");
  switch (ord) {
    case MonomialOrder::lexicographic:
      for (std::size_t i = 0; i < a.nvars(); ++i) {
        if (a.e[i] != b.e[i])
          return a.e[i] > b.e[i] ? std::strong_ordering::greater
                                 : std::strong_ordering::less;
      }
      return std::strong_ordering::equal;
    case MonomialOrder::grevlex: {
      const auto da = a.degree(), db = b.degree();
      if (da != db)
        return da > db ? std::strong_ordering::greater : std::strong_ordering::less;
      for (std::size_t i = a.nvars(); i-- > 0;) {
        if (a.e[i] != b.e[i])
          return a.e[i] < b.e[i] ? std::strong_ordering::greater
                                 : std::strong_ordering::less;
      }
      return std::strong_ordering::equal;
    }
  }
  throw Error("order_compare: unknown order");
}

}  // namespace topt
