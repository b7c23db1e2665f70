#pragma once

#include <topt/polynomial.hpp>
#include <topt/rng.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

namespace testsupport {

using topt::Monomial;
using topt::MultiPoly;
using topt::Rational;
using topt::Rng;

inline MultiPoly<double> random_poly_d(Rng& rng, std::size_t nvars,
                                       std::size_t max_terms = 5,
                                       std::int32_t max_exp = 3) {
  MultiPoly<double> p(nvars);
  const std::size_t terms = 1 + rng.below(max_terms);
  for (std::size_t t = 0; t < terms; ++t) {
    Monomial m(nvars);
    for (std::size_t i = 0; i < nvars; ++i)
      m.e[i] = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(max_exp) + 1));
    const double c = static_cast<double>(static_cast<long>(rng.below(9)) - 4);
    p.add_term(m, c);
  }
  return p;
}

inline MultiPoly<Rational> random_poly_q(Rng& rng, std::size_t nvars,
                                         std::size_t max_terms = 5,
                                         std::int32_t max_exp = 3) {
  MultiPoly<Rational> p(nvars);
  const std::size_t terms = 1 + rng.below(max_terms);
  for (std::size_t t = 0; t < terms; ++t) {
    Monomial m(nvars);
    for (std::size_t i = 0; i < nvars; ++i)
      m.e[i] = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(max_exp) + 1));
    const long num = static_cast<long>(rng.below(9)) - 4;
    const long den = 1 + static_cast<long>(rng.below(4));
    p.add_term(m, Rational(num, den));
  }
  return p;
}

inline Monomial random_monomial(Rng& rng, std::size_t nvars, std::int32_t max_exp = 4) {
  Monomial m(nvars);
  for (std::size_t i = 0; i < nvars; ++i)
    m.e[i] = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(max_exp) + 1));
  return m;
}

inline double max_abs_coeff(const MultiPoly<double>& p) {
  double m = 0.0;
  for (const auto& [mono, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

inline bool poly_close(const MultiPoly<double>& a, const MultiPoly<double>& b,
                       double rel_tol) {
  const double scale = std::max({1.0, max_abs_coeff(a), max_abs_coeff(b)});
  MultiPoly<double> diff = a - b;
  return max_abs_coeff(diff) <= rel_tol * scale;
}

// Central finite difference of a scalar function of a vector argument.
template <class Fn>
double central_difference(Fn f, std::vector<double> x, std::size_t i, double h) {
  x[i] += h;
  const double fp = f(x);
  x[i] -= 2 * h;
  const double fm = f(x);
  return (fp - fm) / (2 * h);
}

}  // namespace testsupport
