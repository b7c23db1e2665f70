#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "topt/polynomial.hpp"
#include "topt/rational.hpp"
#include "topt/sysgen.hpp"

namespace topt {

struct Ideal {
  std::vector<MultiPoly<Rational>> generators;
  MonomialOrder order = MonomialOrder::grevlex;
};

struct GroebnerBasis {
  std::vector<MultiPoly<Rational>> elements;  // reduced, monic, sorted by LT
  MonomialOrder order = MonomialOrder::grevlex;
};

struct GroebnerOptions {
  // S-pair budget; Groebner degrees can grow double-exponentially in the
  // number of variables, so runaway instances abort instead of thrashing.
  std::size_t spair_budget = 20000;
};

namespace gbdetail {

using Term = std::pair<Monomial, Rational>;

// Terms sorted in strictly decreasing working order; leading term in front.
struct GbPoly {
  std::vector<Term> terms;
  std::int64_t sugar = 0;
  bool is_zero() const { return terms.empty(); }
  const Term& lt() const { return terms.front(); }
};

inline GbPoly to_gb(const MultiPoly<Rational>& p, MonomialOrder ord) {
  GbPoly g;
  g.terms.assign(p.terms().begin(), p.terms().end());
  std::sort(g.terms.begin(), g.terms.end(), [&](const Term& a, const Term& b) {
    return order_compare(a.first, b.first, ord) == std::strong_ordering::greater;
  });
  g.sugar = p.total_degree();
  return g;
}

inline MultiPoly<Rational> from_gb(const GbPoly& g, std::size_t nvars) {
  MultiPoly<Rational> p(nvars);
  for (const auto& [m, c] : g.terms) p.add_term(m, c);
  return p;
}

inline void make_monic(GbPoly& g) {
  if (g.is_zero()) return;
  const Rational lc = g.lt().second;
  if (lc == Rational(1)) return;
  for (auto& [m, c] : g.terms) c /= lc;
}

// f - c * m * g, merged in decreasing order.
inline GbPoly sub_scaled(const GbPoly& f, const Rational& c, const Monomial& m,
                         const GbPoly& g, MonomialOrder ord) {
  GbPoly out;
  out.terms.reserve(f.terms.size() + g.terms.size());
  out.sugar = std::max(f.sugar, g.sugar + m.degree());
  std::size_t i = 0, j = 0;
  while (i < f.terms.size() || j < g.terms.size()) {
    if (j == g.terms.size()) {
      out.terms.push_back(f.terms[i++]);
      continue;
    }
    const Monomial gm = g.terms[j].first * m;
    if (i == f.terms.size()) {
      Rational v = -(c * g.terms[j].second);
      if (!v.is_zero()) out.terms.emplace_back(gm, std::move(v));
      ++j;
      continue;
    }
    const auto cmp = order_compare(f.terms[i].first, gm, ord);
    if (cmp == std::strong_ordering::greater) {
      out.terms.push_back(f.terms[i++]);
    } else if (cmp == std::strong_ordering::less) {
      Rational v = -(c * g.terms[j].second);
      if (!v.is_zero()) out.terms.emplace_back(gm, std::move(v));
      ++j;
    } else {
      Rational v = f.terms[i].second - c * g.terms[j].second;
      if (!v.is_zero()) out.terms.emplace_back(gm, std::move(v));
      ++i;
      ++j;
    }
  }
  return out;
}

// Full normal form: no surviving term is divisible by any basis LT.
inline GbPoly reduce_full(GbPoly f, const std::vector<GbPoly>& basis,
                          MonomialOrder ord) {
  std::size_t i = 0;
  while (i < f.terms.size()) {
    const Monomial& m = f.terms[i].first;
    const GbPoly* red = nullptr;
    for (const auto& g : basis) {
      if (!g.is_zero() && g.lt().first.divides(m)) {
        red = &g;
        break;
      }
    }
    if (red == nullptr) {
      ++i;  // irreducible; joins the remainder
      continue;
    }
    const Rational c = f.terms[i].second / red->lt().second;
    f = sub_scaled(f, c, m.quotient(red->lt().first), *red, ord);
    // terms before i were already irreducible and are untouched by the merge
  }
  return f;
}

inline bool coprime(const Monomial& a, const Monomial& b) {
  for (std::size_t i = 0; i < a.nvars(); ++i)
    if (a.e[i] > 0 && b.e[i] > 0) return false;
  return true;
}

struct Pair {
  std::size_t i, j;
  Monomial lcm;
  std::int64_t sugar;
};

}  // namespace gbdetail

/// Buchberger's algorithm with the sugar selection strategy and the
/// product / chain elimination criteria; returns the reduced Groebner
/// basis (monic elements, pairwise non-divisible leading terms).
inline GroebnerBasis buchberger(const Ideal& ideal, const GroebnerOptions& opts = {}) {
  using namespace gbdetail;
  if (ideal.generators.empty()) throw Error("buchberger: empty generator list");
  const std::size_t nvars = ideal.generators.front().nvars();
  const MonomialOrder ord = ideal.order;

  std::vector<GbPoly> g;
  for (const auto& p : ideal.generators) {
    if (p.nvars() != nvars) throw DimensionError("buchberger: nvars mismatch");
    if (p.is_zero()) continue;
    GbPoly q = to_gb(p, ord);
    make_monic(q);
    g.push_back(std::move(q));
  }
  if (g.empty()) throw Error("buchberger: all generators are zero");

  auto pair_sugar = [&](std::size_t i, std::size_t j, const Monomial& l) {
    return std::max(g[i].sugar + l.degree() - g[i].lt().first.degree(),
                    g[j].sugar + l.degree() - g[j].lt().first.degree());
  };

  std::vector<Pair> queue;
  std::set<std::pair<std::size_t, std::size_t>> pending;
  auto push_pair = [&](std::size_t i, std::size_t j) {
    Monomial l = Monomial::lcm(g[i].lt().first, g[j].lt().first);
    queue.push_back(Pair{i, j, l, pair_sugar(i, j, l)});
    pending.insert({i, j});
  };
  for (std::size_t j = 1; j < g.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) push_pair(i, j);

  auto pick = [&]() {
    std::size_t best = 0;
    for (std::size_t k = 1; k < queue.size(); ++k) {
      const auto& a = queue[k];
      const auto& b = queue[best];
      if (a.sugar != b.sugar) {
        if (a.sugar < b.sugar) best = k;
        continue;
      }
      const auto c = order_compare(a.lcm, b.lcm, ord);
      if (c == std::strong_ordering::less) best = k;
    }
    return best;
  };

  std::size_t processed = 0;
  while (!queue.empty()) {
    const std::size_t idx = pick();
    const Pair pr = queue[idx];
    queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(idx));
    pending.erase({pr.i, pr.j});

    if (coprime(g[pr.i].lt().first, g[pr.j].lt().first)) continue;

    bool chained = false;
    for (std::size_t k = 0; k < g.size() && !chained; ++k) {
      if (k == pr.i || k == pr.j) continue;
      if (!g[k].lt().first.divides(pr.lcm)) continue;
      const auto a = std::minmax(pr.i, k);
      const auto b = std::minmax(pr.j, k);
      if (!pending.count({a.first, a.second}) && !pending.count({b.first, b.second}))
        chained = true;
    }
    if (chained) continue;

    if (++processed > opts.spair_budget)
      throw ResourceLimitError("buchberger: S-pair budget exceeded");

    // S-polynomial: heads cancel by construction.
    const auto& fi = g[pr.i];
    const auto& fj = g[pr.j];
    GbPoly s = sub_scaled(GbPoly{{}, 0}, Rational(1) / fi.lt().second,
                          pr.lcm.quotient(fi.lt().first), fi, ord);
    for (auto& [m, c] : s.terms) c = -c;
    s.sugar = pair_sugar(pr.i, pr.j, pr.lcm);
    s = sub_scaled(s, Rational(1) / fj.lt().second, pr.lcm.quotient(fj.lt().first),
                   fj, ord);
    s.sugar = pair_sugar(pr.i, pr.j, pr.lcm);

    GbPoly h = reduce_full(std::move(s), g, ord);
    if (h.is_zero()) continue;
    make_monic(h);
    g.push_back(std::move(h));
    const std::size_t newest = g.size() - 1;
    for (std::size_t k = 0; k < newest; ++k) push_pair(k, newest);
  }

  // Minimalize: drop elements whose LT is divisible by another kept LT.
  std::vector<bool> keep(g.size(), true);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size() && keep[i]; ++j) {
      if (i == j || !keep[j]) continue;
      if (g[j].lt().first.divides(g[i].lt().first)) {
        if (g[i].lt().first == g[j].lt().first && i < j) continue;
        keep[i] = false;
      }
    }
  }
  std::vector<GbPoly> minimal;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (keep[i]) minimal.push_back(std::move(g[i]));

  // Inter-reduce tails for the canonical reduced basis.
  std::vector<GbPoly> reduced;
  for (std::size_t i = 0; i < minimal.size(); ++i) {
    std::vector<GbPoly> others;
    for (std::size_t j = 0; j < minimal.size(); ++j)
      if (j != i) others.push_back(minimal[j]);
    GbPoly h = reduce_full(minimal[i], others, ord);
    make_monic(h);
    reduced.push_back(std::move(h));
  }
  std::sort(reduced.begin(), reduced.end(), [&](const GbPoly& a, const GbPoly& b) {
    return order_compare(a.lt().first, b.lt().first, ord) == std::strong_ordering::less;
  });

  GroebnerBasis gb;
  gb.order = ord;
  for (const auto& q : reduced) gb.elements.push_back(from_gb(q, nvars));

  // Membership sanity: every input generator must reduce to zero.
  for (const auto& p : ideal.generators) {
    GbPoly r = reduce_full(to_gb(p, ord), reduced, ord);
    if (!r.is_zero()) throw Error("buchberger: generator fails membership check");
  }
  return gb;
}

/// Remainder of f on division by the basis: no term of the result is
/// divisible by any leading term of gb.
inline MultiPoly<Rational> normal_form(const MultiPoly<Rational>& f,
                                       const GroebnerBasis& gb) {
  using namespace gbdetail;
  if (gb.elements.empty()) return f;
  const std::size_t nvars = gb.elements.front().nvars();
  if (f.nvars() != nvars) throw DimensionError("normal_form: nvars mismatch");
  std::vector<GbPoly> basis;
  basis.reserve(gb.elements.size());
  for (const auto& p : gb.elements) basis.push_back(to_gb(p, gb.order));
  return from_gb(reduce_full(to_gb(f, gb.order), basis, gb.order), nvars);
}

/// Standard monomials of R/J: everything outside the leading-term ideal.
/// Errors when the quotient is not finite-dimensional.
inline std::vector<Monomial> quotient_basis(const GroebnerBasis& gb) {
  if (gb.elements.empty())
    throw NotZeroDimensionalError("quotient_basis: zero ideal is not zero-dimensional");
  const std::size_t nvars = gb.elements.front().nvars();

  std::vector<Monomial> lts;
  for (const auto& p : gb.elements) {
    Monomial best;
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
      if (first || order_compare(m, best, gb.order) == std::strong_ordering::greater) {
        best = m;
        first = false;
      }
    }
    lts.push_back(best);
  }

  for (const auto& m : lts)
    if (m.is_constant()) return {};  // unit ideal: empty quotient

  // Zero-dimensionality: every variable needs a pure-power leading term.
  std::vector<std::int32_t> bound(nvars, -1);
  for (const auto& m : lts) {
    std::size_t nz = 0, var = 0;
    for (std::size_t i = 0; i < nvars; ++i)
      if (m.e[i] != 0) {
        ++nz;
        var = i;
      }
    if (nz == 1)
      bound[var] = bound[var] < 0 ? m.e[var] : std::min(bound[var], m.e[var]);
  }
  for (std::size_t i = 0; i < nvars; ++i)
    if (bound[i] < 0)
      throw NotZeroDimensionalError(
          "quotient_basis: no pure power of t" + std::to_string(i + 1) +
          " among leading terms");

  std::vector<Monomial> basis;
  Monomial cur(nvars);
  while (true) {
    bool standard = true;
    for (const auto& m : lts)
      if (m.divides(cur)) {
        standard = false;
        break;
      }
    if (standard) basis.push_back(cur);
    // odometer over the box prod [0, bound_i)
    std::size_t pos = 0;
    while (pos < nvars) {
      if (++cur.e[pos] < bound[pos]) break;
      cur.e[pos] = 0;
      ++pos;
    }
    if (pos == nvars) break;
  }
  std::sort(basis.begin(), basis.end(), [&](const Monomial& a, const Monomial& b) {
    return order_compare(a, b, gb.order) == std::strong_ordering::less;
  });
  return basis;
}

namespace gbdetail {

using RatMatrix = std::vector<std::vector<Rational>>;

// Matrix of multiplication by t_var on R/J in the standard-monomial basis.
inline RatMatrix variable_matrix(const std::vector<GbPoly>& gb_polys,
                                 MonomialOrder ord,
                                 const std::vector<Monomial>& basis,
                                 const std::map<Monomial, std::size_t>& index,
                                 std::size_t var) {
  const std::size_t r = basis.size();
  RatMatrix m(r, std::vector<Rational>(r, Rational(0)));
  const std::size_t nvars = basis.empty() ? 0 : basis.front().nvars();
  for (std::size_t k = 0; k < r; ++k) {
    GbPoly prod;
    prod.terms.emplace_back(basis[k] * Monomial::unit(nvars, var), Rational(1));
    const GbPoly nf = reduce_full(std::move(prod), gb_polys, ord);
    for (const auto& [mono, c] : nf.terms) {
      auto it = index.find(mono);
      if (it == index.end())
        throw Error("hermite: normal form left the standard basis");
      m[it->second][k] = c;
    }
  }
  return m;
}

inline RatMatrix mat_mul(const RatMatrix& a, const RatMatrix& b) {
  const std::size_t r = a.size();
  RatMatrix c(r, std::vector<Rational>(r, Rational(0)));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t k = 0; k < r; ++k) {
      const Rational& aik = a[i][k];
      if (aik.is_zero()) continue;
      for (std::size_t j = 0; j < r; ++j) {
        if (b[k][j].is_zero()) continue;
        c[i][j] += aik * b[k][j];
      }
    }
  return c;
}

}  // namespace gbdetail

/// Hermite quadratic form: H[i][j] = trace of multiplication by
/// basis[i]*basis[j] on R/J. Exact rational, exactly symmetric.
inline std::vector<std::vector<Rational>> hermite_matrix(
    const GroebnerBasis& gb, const std::vector<Monomial>& basis) {
  using namespace gbdetail;
  const std::size_t r = basis.size();
  RatMatrix h(r, std::vector<Rational>(r, Rational(0)));
  if (r == 0) return h;
  const std::size_t nvars = basis.front().nvars();

  std::map<Monomial, std::size_t> index;
  for (std::size_t i = 0; i < r; ++i) index[basis[i]] = i;

  std::vector<GbPoly> gb_polys;
  gb_polys.reserve(gb.elements.size());
  for (const auto& p : gb.elements) gb_polys.push_back(to_gb(p, gb.order));

  std::vector<RatMatrix> var_m;
  var_m.reserve(nvars);
  for (std::size_t q = 0; q < nvars; ++q)
    var_m.push_back(variable_matrix(gb_polys, gb.order, basis, index, q));

  // Multiplication matrix for every basis monomial, assembled bottom-up:
  // each standard monomial's divisor-by-one-variable is standard too.
  std::vector<std::size_t> by_degree(r);
  for (std::size_t i = 0; i < r; ++i) by_degree[i] = i;
  std::sort(by_degree.begin(), by_degree.end(), [&](std::size_t a, std::size_t b) {
    return basis[a].degree() < basis[b].degree();
  });

  std::vector<RatMatrix> mono_m(r);
  for (const std::size_t k : by_degree) {
    const Monomial& m = basis[k];
    if (m.is_constant()) {
      RatMatrix id(r, std::vector<Rational>(r, Rational(0)));
      for (std::size_t i = 0; i < r; ++i) id[i][i] = Rational(1);
      mono_m[k] = std::move(id);
      continue;
    }
    std::size_t var = 0;
    while (m.e[var] == 0) ++var;
    Monomial parent = m;
    parent.e[var] -= 1;
    const auto pit = index.find(parent);
    if (pit == index.end()) throw Error("hermite: non-standard divisor");
    mono_m[k] = gbdetail::mat_mul(mono_m[pit->second], var_m[var]);
  }

  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i; j < r; ++j) {
      Rational tr(0);
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b) {
          if (mono_m[i][a][b].is_zero() || mono_m[j][b][a].is_zero()) continue;
          tr += mono_m[i][a][b] * mono_m[j][b][a];
        }
      h[i][j] = tr;
      h[j][i] = tr;
    }
  }
  return h;
}

/// Exact signature and rank of a rational symmetric matrix. The
/// characteristic polynomial is computed by Faddeev-LeVerrier on the
/// denominator-cleared integer matrix; Descartes' rule on p(lambda) and
/// p(-lambda) is exact because all eigenvalues are real.
inline std::pair<int, int> signature_and_rank(
    const std::vector<std::vector<Rational>>& h) {
  const std::size_t r = h.size();
  for (std::size_t i = 0; i < r; ++i) {
    if (h[i].size() != r) throw DimensionError("signature_and_rank: not square");
    for (std::size_t j = i + 1; j < r; ++j)
      if (!(h[i][j] == h[j][i]))
        throw Error("signature_and_rank: matrix is not symmetric");
  }
  if (r == 0) return {0, 0};

  mpz_class den(1);
  for (const auto& row : h)
    for (const auto& v : row)
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.raw().get_den().get_mpz_t());

  std::vector<std::vector<mpz_class>> b(r, std::vector<mpz_class>(r));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      b[i][j] = h[i][j].raw().get_num() * (den / h[i][j].raw().get_den());

  // Faddeev-LeVerrier: p(l) = l^r - c1 l^(r-1) - ... - cr; divisions exact.
  std::vector<mpz_class> coeff(r + 1);
  coeff[0] = 1;
  std::vector<std::vector<mpz_class>> m = b;
  for (std::size_t k = 1; k <= r; ++k) {
    mpz_class tr(0);
    for (std::size_t i = 0; i < r; ++i) tr += m[i][i];
    mpz_class ck;
    mpz_divexact_ui(ck.get_mpz_t(), tr.get_mpz_t(), static_cast<unsigned long>(k));
    coeff[k] = -ck;
    if (k == r) break;
    for (std::size_t i = 0; i < r; ++i) m[i][i] -= ck;
    std::vector<std::vector<mpz_class>> next(r, std::vector<mpz_class>(r, mpz_class(0)));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t t = 0; t < r; ++t) {
        if (b[i][t] == 0) continue;
        for (std::size_t j = 0; j < r; ++j) next[i][j] += b[i][t] * m[t][j];
      }
    m = std::move(next);
  }

  auto variations = [&](bool negate_odd) {
    int var = 0, last = 0;
    for (std::size_t k = 0; k <= r; ++k) {
      int s = sgn(coeff[k]);
      if (negate_odd && ((r - k) % 2 == 1)) s = -s;
      if (s == 0) continue;
      if (last != 0 && s != last) ++var;
      last = s;
    }
    return var;
  };
  const int pos = variations(false);
  const int neg = variations(true);

  std::size_t zero_mult = 0;
  while (zero_mult < r && coeff[r - zero_mult] == 0) ++zero_mult;
  const int rank = static_cast<int>(r - zero_mult);
  if (pos + neg != rank)
    throw Error("signature_and_rank: Descartes count mismatch");
  return {pos - neg, rank};
}

struct HermiteReport {
  GroebnerBasis gb;
  std::vector<Monomial> quotient_basis;
  std::vector<std::vector<Rational>> H;
  int rank = 0;
  int signature = 0;
};

inline HermiteReport hermite_report(const ProblemSpec<Rational>& spec,
                                    const GroebnerOptions& opts = {}) {
  spec.validate();
  const PolySystem<Rational> sys = build_system(spec);
  HermiteReport rep;
  rep.gb = buchberger(Ideal{sys.equations, MonomialOrder::grevlex}, opts);
  rep.quotient_basis = quotient_basis(rep.gb);
  rep.H = hermite_matrix(rep.gb, rep.quotient_basis);
  const auto [sig, rank] = signature_and_rank(rep.H);
  rep.signature = sig;
  rep.rank = rank;
  return rep;
}

/// Number of distinct real solutions of the switching system, via
/// signature of the Hermite quadratic form.
inline int count_real_roots(const ProblemSpec<Rational>& spec,
                            const GroebnerOptions& opts = {}) {
  return hermite_report(spec, opts).signature;
}

}  // namespace topt
