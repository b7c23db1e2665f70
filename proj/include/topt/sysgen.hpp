#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "topt/polynomial.hpp"

namespace topt {

/// Chain-of-integrators time-optimal problem instance: dynamics
/// y' = A y + b u with A the nilpotent Jordan block, initial state x,
/// and initial control sign u0.
template <class F>
struct ProblemSpec {
  std::size_t n = 0;
  std::vector<F> b;  // input vector; b[n-1] != 0 required
  std::vector<F> x;  // initial condition
  int u0 = +1;       // sign of the control on the first interval

  /// b = (0, ..., 0, 1): the n-th order integrator.
  static ProblemSpec integrator(std::size_t n, std::vector<F> x, int u0) {
    ProblemSpec s;
    s.n = n;
    s.b.assign(n, FieldOps<F>::zero());
    if (n > 0) s.b[n - 1] = FieldOps<F>::one();
    s.x = std::move(x);
    s.u0 = u0;
    return s;
  }

  void validate() const {
    if (n < 2) throw DimensionError("problem: dimension must be at least 2");
    if (b.size() != n || x.size() != n)
      throw DimensionError("problem: b and x must have length n");
    if (FieldOps<F>::is_zero(b[n - 1]))
      throw ControllabilityError("problem: b_n = 0 breaks controllability");
    if (u0 != 1 && u0 != -1) throw Error("problem: u0 must be +1 or -1");
  }
};

/// The n switching-time equations in t1..tn plus their symbolic Jacobian.
template <class F>
struct PolySystem {
  ProblemSpec<F> spec;
  std::vector<MultiPoly<F>> equations;               // size n
  std::vector<std::vector<MultiPoly<F>>> jacobian;   // [i][q] = d eq_i / d t_{q+1}
};

namespace detail {

inline std::int64_t factorial(std::int64_t k) {
  std::int64_t f = 1;
  for (std::int64_t i = 2; i <= k; ++i) f *= i;
  return f;
}

// Enumerate all alpha >= 0 with |alpha| = total over nv variables.
inline void for_each_composition(std::size_t nv, std::int32_t total,
                                 const std::function<void(const std::vector<std::int32_t>&)>& fn) {
  std::vector<std::int32_t> alpha(nv, 0);
  std::function<void(std::size_t, std::int32_t)> rec = [&](std::size_t pos,
                                                           std::int32_t rem) {
    if (pos + 1 == nv) {
      alpha[pos] = rem;
      fn(alpha);
      return;
    }
    for (std::int32_t v = 0; v <= rem; ++v) {
      alpha[pos] = v;
      rec(pos + 1, rem - v);
    }
  };
  if (nv == 0) return;
  rec(0, total);
}

// Sign of the multinomial term: the bang-bang signal holds its first value
// on the interval of the lowest active index, so a term picks up
// (-1)^(min{j: alpha_j != 0} - 1). (The iterated integrals of the signal
// sample u on the *smallest* coordinate of the ordered simplex.)
inline int composition_sign(const std::vector<std::int32_t>& alpha) {
  for (std::size_t j = 0; j < alpha.size(); ++j)
    if (alpha[j] != 0) return (j % 2 == 0) ? +1 : -1;
  return +1;
}

}  // namespace detail

/// Builds the switching-time polynomial system for the given problem. Each
/// equation i (1-based) is
///   u0 * sum_{k=1}^{n-i+1} b_{k+i-1} * S_k(t) + sum_{k=i}^{n} T^{k-i}/(k-i)! x_k,
/// where S_k is the signed multinomial sum over |alpha| = k and
/// T = t1 + ... + tn is expanded symbolically. The stored Jacobian is the
/// formal partial-derivative matrix of the equations.
template <class F>
PolySystem<F> build_system(const ProblemSpec<F>& spec) {
  spec.validate();
  const std::size_t n = spec.n;
  const F u0 = FieldOps<F>::from_ratio(spec.u0, 1);

  // Signed multinomial layers S_k, k = 1..n.
  std::vector<MultiPoly<F>> layers;
  layers.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    MultiPoly<F> s(n);
    detail::for_each_composition(n, static_cast<std::int32_t>(k),
                                 [&](const std::vector<std::int32_t>& alpha) {
                                   std::int64_t denom = 1;
                                   for (auto a : alpha) denom *= detail::factorial(a);
                                   s.add_term(Monomial(alpha),
                                              FieldOps<F>::from_ratio(
                                                  detail::composition_sign(alpha), denom));
                                 });
    layers.push_back(std::move(s));
  }

  // Powers of T = t1 + ... + tn.
  MultiPoly<F> T(n);
  for (std::size_t i = 0; i < n; ++i) T += MultiPoly<F>::variable(n, i);
  std::vector<MultiPoly<F>> Tpow;
  Tpow.push_back(MultiPoly<F>::constant(n, FieldOps<F>::one()));
  for (std::size_t k = 1; k < n; ++k) Tpow.push_back(Tpow.back() * T);

  // Equations are stored lowest degree first (the paper's display order):
  // stored index d holds the equation with multinomial layers of degree
  // d+1, i.e. component i = n-d of the underlying vector identity.
  PolySystem<F> sys;
  sys.spec = spec;
  sys.equations.reserve(n);
  for (std::size_t i = n; i >= 1; --i) {
    MultiPoly<F> f(n);
    for (std::size_t k = 1; k + i - 1 <= n; ++k) {
      const F& bk = spec.b[k + i - 2];
      if (FieldOps<F>::is_zero(bk)) continue;
      f += layers[k - 1].scaled(u0 * bk);
    }
    for (std::size_t k = i; k <= n; ++k) {
      const F c = spec.x[k - 1] *
                  FieldOps<F>::from_ratio(1, detail::factorial(static_cast<std::int64_t>(k - i)));
      f += Tpow[k - i].scaled(c);
    }
    sys.equations.push_back(std::move(f));
  }

  sys.jacobian.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sys.jacobian[i].reserve(n);
    for (std::size_t q = 0; q < n; ++q)
      sys.jacobian[i].push_back(poly_partial(sys.equations[i], q));
  }
  return sys;
}

/// Jacobian built directly from the closed-form derivative of the system
/// (term-wise differentiation of the multinomial layers and of the T-tail),
/// independent of poly_partial. Both constructions agree term-for-term.
template <class F>
std::vector<std::vector<MultiPoly<F>>> build_jacobian(const PolySystem<F>& sys) {
  const auto& spec = sys.spec;
  const std::size_t n = spec.n;
  const F u0 = FieldOps<F>::from_ratio(spec.u0, 1);

  MultiPoly<F> T(n);
  for (std::size_t i = 0; i < n; ++i) T += MultiPoly<F>::variable(n, i);
  std::vector<MultiPoly<F>> Tpow;
  Tpow.push_back(MultiPoly<F>::constant(n, FieldOps<F>::one()));
  for (std::size_t k = 1; k < n; ++k) Tpow.push_back(Tpow.back() * T);

  std::vector<std::vector<MultiPoly<F>>> jac;
  jac.reserve(n);
  for (std::size_t i = n; i >= 1; --i) {
    std::vector<MultiPoly<F>> row;
    row.reserve(n);
    for (std::size_t q = 1; q <= n; ++q) {
      MultiPoly<F> d(n);
      for (std::size_t k = 1; k + i - 1 <= n; ++k) {
        const F& bk = spec.b[k + i - 2];
        if (FieldOps<F>::is_zero(bk)) continue;
        detail::for_each_composition(
            n, static_cast<std::int32_t>(k), [&](const std::vector<std::int32_t>& alpha) {
              if (alpha[q - 1] == 0) return;
              std::int64_t denom = 1;
              for (std::size_t j = 0; j < n; ++j)
                denom *= detail::factorial(j == q - 1 ? alpha[j] - 1 : alpha[j]);
              Monomial m(alpha);
              m.e[q - 1] -= 1;
              d.add_term(m, u0 * bk *
                                FieldOps<F>::from_ratio(detail::composition_sign(alpha),
                                                        denom));
            });
      }
      for (std::size_t k = i + 1; k <= n; ++k) {
        const F c = spec.x[k - 1] *
                    FieldOps<F>::from_ratio(
                        1, detail::factorial(static_cast<std::int64_t>(k - i - 1)));
        d += Tpow[k - i - 1].scaled(c);
      }
      row.push_back(std::move(d));
    }
    jac.push_back(std::move(row));
  }
  return jac;
}

inline void check_finite(const std::vector<double>& t) {
  for (double v : t)
    if (!std::isfinite(v)) throw Error("eval: non-finite input");
}

inline std::vector<double> eval_system(const PolySystem<double>& sys,
                                       const std::vector<double>& t) {
  if (t.size() != sys.spec.n) throw DimensionError("eval_system: length mismatch");
  check_finite(t);
  std::vector<double> out(sys.spec.n);
  for (std::size_t i = 0; i < sys.spec.n; ++i) out[i] = sys.equations[i].eval(t);
  return out;
}

inline std::vector<std::vector<double>> eval_jacobian(const PolySystem<double>& sys,
                                                      const std::vector<double>& t) {
  if (t.size() != sys.spec.n) throw DimensionError("eval_jacobian: length mismatch");
  check_finite(t);
  std::vector<std::vector<double>> out(sys.spec.n,
                                       std::vector<double>(sys.spec.n, 0.0));
  for (std::size_t i = 0; i < sys.spec.n; ++i)
    for (std::size_t q = 0; q < sys.spec.n; ++q)
      out[i][q] = sys.jacobian[i][q].eval(t);
  return out;
}

template <class To, class From>
ProblemSpec<To> convert_spec(const ProblemSpec<From>& s) {
  ProblemSpec<To> r;
  r.n = s.n;
  r.u0 = s.u0;
  auto conv = [](const From& v) {
    return FieldOps<To>::from_double(FieldOps<From>::to_double(v));
  };
  for (const auto& v : s.b) r.b.push_back(conv(v));
  for (const auto& v : s.x) r.x.push_back(conv(v));
  return r;
}

}  // namespace topt
