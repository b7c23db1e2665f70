#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "topt/field.hpp"
#include "topt/monomial.hpp"

namespace topt {

/// Sparse multivariate polynomial over an abstract coefficient field F.
/// Terms are a map from exponent vector to a nonzero coefficient; a zero
/// coefficient is never stored.
template <class F>
class MultiPoly {
 public:
  using Terms = std::map<Monomial, F>;

  explicit MultiPoly(std::size_t nvars) : nvars_(nvars) {}

  static MultiPoly zero(std::size_t nvars) { return MultiPoly(nvars); }

  static MultiPoly constant(std::size_t nvars, const F& c) {
    MultiPoly p(nvars);
    p.add_term(Monomial(nvars), c);
    return p;
  }

  static MultiPoly variable(std::size_t nvars, std::size_t var) {
    if (var >= nvars) throw DimensionError("poly: variable index out of range");
    MultiPoly p(nvars);
    p.add_term(Monomial::unit(nvars, var), FieldOps<F>::one());
    return p;
  }

  static MultiPoly term(std::size_t nvars, const Monomial& m, const F& c) {
    if (m.nvars() != nvars) throw DimensionError("poly: monomial length mismatch");
    MultiPoly p(nvars);
    p.add_term(m, c);
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Total degree; -1 for the zero polynomial.
  std::int64_t total_degree() const {
    std::int64_t d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  F coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? FieldOps<F>::zero() : it->second;
  }

  void add_term(const Monomial& m, const F& c) {
    if (m.nvars() != nvars_) throw DimensionError("poly: monomial length mismatch");
    if (FieldOps<F>::is_zero(c)) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (FieldOps<F>::is_zero(it->second)) terms_.erase(it);
    }
  }

  MultiPoly& operator+=(const MultiPoly& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  MultiPoly& operator-=(const MultiPoly& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  MultiPoly operator-() const {
    MultiPoly r(nvars_);
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
  }

  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }

  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    a.check_same(b);
    MultiPoly r(a.nvars_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
    return r;
  }

  MultiPoly scaled(const F& s) const {
    MultiPoly r(nvars_);
    if (FieldOps<F>::is_zero(s)) return r;
    for (const auto& [m, c] : terms_) r.add_term(m, c * s);
    return r;
  }
  friend MultiPoly operator*(const MultiPoly& p, const F& s) { return p.scaled(s); }
  friend MultiPoly operator*(const F& s, const MultiPoly& p) { return p.scaled(s); }

  friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  /// Term-by-term evaluation. Deterministic summation order (canonical
  /// term order of the map).
  F eval(const std::vector<F>& point) const {
    if (point.size() != nvars_) throw DimensionError("poly: point length mismatch");
    F acc = FieldOps<F>::zero();
    for (const auto& [m, c] : terms_) {
      F t = c;
      for (std::size_t i = 0; i < nvars_; ++i)
        for (std::int32_t k = 0; k < m.e[i]; ++k) t *= point[i];
      acc += t;
    }
    return acc;
  }

 private:
  void check_same(const MultiPoly& o) const {
    if (nvars_ != o.nvars_) throw DimensionError("poly: nvars mismatch");
  }

  std::size_t nvars_;
  Terms terms_;
};

template <class F>
F poly_eval(const MultiPoly<F>& p, const std::vector<F>& point) {
  return p.eval(point);
}

/// Formal partial derivative with respect to variable `var`.
template <class F>
MultiPoly<F> poly_partial(const MultiPoly<F>& p, std::size_t var) {
  if (var >= p.nvars()) throw DimensionError("poly_partial: variable out of range");
  MultiPoly<F> r(p.nvars());
  for (const auto& [m, c] : p.terms()) {
    if (m.e[var] == 0) continue;
    Monomial d = m;
    const std::int32_t k = d.e[var];
    d.e[var] -= 1;
    r.add_term(d, c * FieldOps<F>::from_ratio(k, 1));
  }
  return r;
}

template <class To, class From, class Conv>
MultiPoly<To> convert_poly(const MultiPoly<From>& p, Conv conv) {
  MultiPoly<To> r(p.nvars());
  for (const auto& [m, c] : p.terms()) r.add_term(m, conv(c));
  return r;
}

inline std::string monomial_str(const Monomial& m,
                                const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < m.nvars(); ++i) {
    if (m.e[i] == 0) continue;
    if (!s.empty()) s += "*";
    s += names[i];
    if (m.e[i] > 1) s += "^" + std::to_string(m.e[i]);
  }
  return s.empty() ? "1" : s;
}

inline std::vector<std::string> default_var_names(std::size_t nvars) {
  std::vector<std::string> names;
  names.reserve(nvars);
  for (std::size_t i = 0; i < nvars; ++i) names.push_back("t" + std::to_string(i + 1));
  return names;
}

/// Canonical plain-text rendering, terms in decreasing monomial order,
/// e.g. "1/2*t1^2 + t1*t2 - 1/2*t2^2".
template <class F>
std::string render(const MultiPoly<F>& p,
                   MonomialOrder ord = MonomialOrder::grevlex,
                   const std::vector<std::string>& names_in = {}) {
  if (p.is_zero()) return "0";
  const auto names = names_in.empty() ? default_var_names(p.nvars()) : names_in;

  std::vector<const typename MultiPoly<F>::Terms::value_type*> terms;
  for (const auto& t : p.terms()) terms.push_back(&t);
  std::sort(terms.begin(), terms.end(), [&](const auto* a, const auto* b) {
    return order_compare(a->first, b->first, ord) == std::strong_ordering::greater;
  });

  std::string out;
  bool first = true;
  for (const auto* t : terms) {
    const auto& [m, c] = *t;
    const bool neg = FieldOps<F>::is_negative(c);
    const F a = FieldOps<F>::abs(c);
    if (first) {
      if (neg) out += "-";
      first = false;
    } else {
      out += neg ? " - " : " + ";
    }
    const std::string ms = monomial_str(m, names);
    const std::string cs = FieldOps<F>::str(a);
    if (ms == "1") {
      out += cs;
    } else if (cs == "1") {
      out += ms;
    } else {
      out += cs + "*" + ms;
    }
  }
  return out;
}

}  // namespace topt
