#include <catch2/catch_amalgamated.hpp>

#include <topt/polynomial.hpp>

#include "test_support.hpp"

using namespace topt;
using testsupport::poly_close;

namespace {

MultiPoly<double> var_d(std::size_t nvars, std::size_t i) {
  return MultiPoly<double>::variable(nvars, i);
}

MultiPoly<Rational> var_q(std::size_t nvars, std::size_t i) {
  return MultiPoly<Rational>::variable(nvars, i);
}

}  // namespace

TEST_CASE("arithmetic basics") {
  const auto t1 = var_d(2, 0);
  const auto t2 = var_d(2, 1);

  SECTION("additive inverse cancels to the zero polynomial") {
    REQUIRE((t1 + (-t1)).is_zero());
  }
  SECTION("difference of squares") {
    const auto prod = (t1 + t2) * (t1 - t2);
    auto expected = MultiPoly<double>(2);
    expected.add_term(Monomial({2, 0}), 1.0);
    expected.add_term(Monomial({0, 2}), -1.0);
    REQUIRE(prod == expected);
  }
  SECTION("field scaling") {
    auto half_sq = MultiPoly<double>(2);
    half_sq.add_term(Monomial({2, 0}), 0.5);
    auto sq = MultiPoly<double>(2);
    sq.add_term(Monomial({2, 0}), 1.0);
    REQUIRE(half_sq.scaled(2.0) == sq);
  }
  SECTION("mismatched nvars is a dimension error") {
    const auto p3 = var_d(3, 0);
    REQUIRE_THROWS_AS(t1 + p3, DimensionError);
    REQUIRE_THROWS_AS(t1 * p3, DimensionError);
  }
}

TEST_CASE("evaluation") {
  const auto t1 = var_d(2, 0);
  const auto t2 = var_d(2, 1);

  SECTION("t1 - t2 vanishes on the diagonal") {
    REQUIRE((t1 - t2).eval({1.0, 1.0}) == 0.0);
  }
  SECTION("t1^2/2 + t1 t2 - t2^2/2 at (1,1) is 1") {
    MultiPoly<double> p(2);
    p.add_term(Monomial({2, 0}), 0.5);
    p.add_term(Monomial({1, 1}), 1.0);
    p.add_term(Monomial({0, 2}), -0.5);
    REQUIRE(p.eval({1.0, 1.0}) == Catch::Approx(1.0));
  }
  SECTION("value at the origin is the constant term") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
      auto p = testsupport::random_poly_d(rng, 3);
      REQUIRE(p.eval({0.0, 0.0, 0.0}) == p.coeff(Monomial(3)));
    }
  }
  SECTION("point length mismatch") {
    REQUIRE_THROWS_AS(t1.eval({1.0}), DimensionError);
  }
}

TEST_CASE("partial derivatives") {
  SECTION("d/dt1 of t1^2/2 is t1") {
    MultiPoly<double> p(2);
    p.add_term(Monomial({2, 0}), 0.5);
    REQUIRE(poly_partial(p, 0) == var_d(2, 0));
  }
  SECTION("d/dt2 of t1 t2 is t1") {
    MultiPoly<double> p(2);
    p.add_term(Monomial({1, 1}), 1.0);
    REQUIRE(poly_partial(p, 1) == var_d(2, 0));
  }
  SECTION("derivative in an absent variable vanishes") {
    const auto p = var_d(3, 0) - var_d(3, 1);
    REQUIRE(poly_partial(p, 2).is_zero());
  }
  SECTION("variable index out of range") {
    const auto p = var_d(2, 0);
    REQUIRE_THROWS_AS(poly_partial(p, 2), DimensionError);
  }
}

TEST_CASE("monomial orders") {
  const Monomial t1sq({2, 0});
  const Monomial t1t2({1, 1});

  SECTION("grevlex tie-break: t1^2 beats t1*t2") {
    REQUIRE(order_compare(t1sq, t1t2, MonomialOrder::grevlex) ==
            std::strong_ordering::greater);
  }
  SECTION("reflexive equality") {
    REQUIRE(order_compare(t1t2, t1t2, MonomialOrder::grevlex) ==
            std::strong_ordering::equal);
    REQUIRE(order_compare(t1t2, t1t2, MonomialOrder::lexicographic) ==
            std::strong_ordering::equal);
  }
  SECTION("lex ignores total degree") {
    REQUIRE(order_compare(Monomial({1, 0}), Monomial({0, 3}),
                          MonomialOrder::lexicographic) ==
            std::strong_ordering::greater);
  }
  SECTION("length mismatch") {
    REQUIRE_THROWS_AS(order_compare(Monomial(2), Monomial(3), MonomialOrder::grevlex),
                      DimensionError);
  }
}

TEST_CASE("ring axioms on random polynomials") {
  SECTION("exact over the rationals") {
    Rng rng(11);
    for (int rep = 0; rep < 60; ++rep) {
      const std::size_t nvars = 1 + rng.below(3);
      const auto p = testsupport::random_poly_q(rng, nvars);
      const auto q = testsupport::random_poly_q(rng, nvars);
      const auto r = testsupport::random_poly_q(rng, nvars);
      REQUIRE((p + q) * r == p * r + q * r);
      REQUIRE(p * q == q * p);
      REQUIRE((p + q) + r == p + (q + r));
    }
  }
  SECTION("within 1e-12 relative over floats") {
    Rng rng(13);
    for (int rep = 0; rep < 60; ++rep) {
      const std::size_t nvars = 1 + rng.below(3);
      const auto p = testsupport::random_poly_d(rng, nvars);
      const auto q = testsupport::random_poly_d(rng, nvars);
      const auto r = testsupport::random_poly_d(rng, nvars);
      REQUIRE(poly_close((p + q) * r, p * r + q * r, 1e-12));
      REQUIRE(poly_close(p * q, q * p, 1e-12));
    }
  }
}

TEST_CASE("partial derivative agrees with central differences") {
  Rng rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t nvars = 1 + rng.below(3);
    const auto p = testsupport::random_poly_d(rng, nvars);
    std::vector<double> x(nvars);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < nvars; ++i) {
      const double exact = poly_partial(p, i).eval(x);
      const double fd = testsupport::central_difference(
          [&](const std::vector<double>& pt) { return p.eval(pt); }, x, i, 1e-5);
      const double scale = std::max({1.0, std::abs(exact), std::abs(fd)});
      REQUIRE(std::abs(exact - fd) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("orders are strict, total and multiplicative") {
  for (const auto ord : {MonomialOrder::lexicographic, MonomialOrder::grevlex}) {
    Rng rng(ord == MonomialOrder::grevlex ? 19u : 23u);
    for (int rep = 0; rep < 1000; ++rep) {
      const std::size_t nvars = 1 + rng.below(4);
      const auto a = testsupport::random_monomial(rng, nvars);
      const auto b = testsupport::random_monomial(rng, nvars);
      const auto m = testsupport::random_monomial(rng, nvars);

      const auto ab = order_compare(a, b, ord);
      const auto ba = order_compare(b, a, ord);
      if (ab == std::strong_ordering::equal) {
        REQUIRE(a == b);
        REQUIRE(ba == std::strong_ordering::equal);
      } else {
        REQUIRE(ab != ba);
      }
      // compatibility with multiplication
      REQUIRE(order_compare(a * m, b * m, ord) == ab);
      // 1 is minimal: a*m >= a
      if (!m.is_constant())
        REQUIRE(order_compare(a * m, a, ord) == std::strong_ordering::greater);
    }
  }
}

TEST_CASE("canonical text rendering") {
  MultiPoly<Rational> p(2);
  p.add_term(Monomial({2, 0}), Rational(1, 2));
  p.add_term(Monomial({1, 1}), Rational(1));
  p.add_term(Monomial({0, 2}), Rational(-1, 2));
  REQUIRE(render(p) == "1/2*t1^2 + t1*t2 - 1/2*t2^2");

  MultiPoly<Rational> q(2);
  REQUIRE(render(q) == "0");

  q.add_term(Monomial({0, 0}), Rational(-3, 7));
  q.add_term(Monomial({1, 0}), Rational(1));
  REQUIRE(render(q) == "t1 - 3/7");

  const auto leading_negative = -var_q(2, 0);
  REQUIRE(render(leading_negative) == "-t1");
}
