#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <topt/newton.hpp>

#include <algorithm>

#include "test_support.hpp"

using namespace topt;

namespace {

// t^2 - 1 as a one-variable system.
std::vector<MultiPoly<double>> scalar_benchmark() {
  MultiPoly<double> p(1);
  p.add_term(Monomial({2}), 1.0);
  p.add_term(Monomial({0}), -1.0);
  return {p};
}

std::vector<std::vector<double>> sorted_roots(std::vector<std::vector<double>> roots) {
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

TEST_CASE("deflated residual values") {
  SECTION("no roots found and zero shift is the identity") {
    DeflationState ds;
    ds.xi = 0.0;
    const auto g = deflate({3.0, -2.0}, {0.5, 0.5}, ds);
    REQUIRE(g == std::vector<double>{3.0, -2.0});
  }
  SECTION("scalar benchmark with one deflated root") {
    DeflationState ds;
    ds.roots = {{1.0}};
    ds.p = 2;
    ds.xi = 0.0;
    REQUIRE(deflate({8.0}, {3.0}, ds)[0] == Catch::Approx(2.0));
    ds.xi = 1.0;
    REQUIRE(deflate({8.0}, {3.0}, ds)[0] == Catch::Approx(10.0));
  }
  SECTION("evaluating at a deflated root is an error") {
    DeflationState ds;
    ds.roots = {{1.0, 2.0}};
    REQUIRE_THROWS_AS(deflate({1.0, 1.0}, {1.0, 2.0}, ds), DeflationSingularityError);
  }
}

TEST_CASE("deflated jacobian") {
  const auto bench = scalar_benchmark();
  const auto& f = bench[0];
  const auto df = poly_partial(f, 0);

  SECTION("no deflation and zero shift reproduces the raw jacobian") {
    DeflationState ds;
    ds.xi = 0.0;
    const auto j = deflated_jacobian({8.0}, {{6.0}}, {3.0}, ds);
    REQUIRE(j[0][0] == Catch::Approx(6.0));
  }
  SECTION("scalar derivative matches central differences") {
    DeflationState ds;
    ds.roots = {{1.0}};
    ds.p = 2;
    ds.xi = 0.0;
    const double t = 3.0;
    const auto j = deflated_jacobian({f.eval({t})}, {{df.eval({t})}}, {t}, ds);
    const double h = 1e-6;
    const double gp = deflate({f.eval({t + h})}, {t + h}, ds)[0];
    const double gm = deflate({f.eval({t - h})}, {t - h}, ds)[0];
    const double fd = (gp - gm) / (2 * h);
    REQUIRE(j[0][0] == Catch::Approx(fd).epsilon(1e-6));
    REQUIRE(j[0][0] == Catch::Approx(-0.5).epsilon(1e-6));
  }
  SECTION("stored root order does not matter") {
    DeflationState a, b;
    a.roots = {{1.0, 0.0}, {0.0, 1.0}};
    b.roots = {{0.0, 1.0}, {1.0, 0.0}};
    const std::vector<double> t{2.0, 2.0};
    const std::vector<double> fv{1.0, -1.0};
    const std::vector<std::vector<double>> jv{{1.0, 2.0}, {3.0, 4.0}};
    REQUIRE(deflate(fv, t, a) == deflate(fv, t, b));
    REQUIRE(deflated_jacobian(fv, jv, t, a) == deflated_jacobian(fv, jv, t, b));
  }
}

TEST_CASE("scalar benchmark exhausts both roots for all parameter choices") {
  for (int p : {1, 2, 3}) {
    for (double xi : {0.0, 1.0}) {
      SolveOptions opts;
      opts.guess = {3.0};
      opts.n_roots = 2;
      opts.p = p;
      opts.xi = xi;
      const auto res = deflated_solve(scalar_benchmark(), opts);
      INFO("p=" << p << " xi=" << xi);
      REQUIRE(res.status == SolveStatus::exhausted);
      const auto roots = sorted_roots(res.roots);
      REQUIRE(roots.size() == 2);
      REQUIRE(roots[0][0] == Catch::Approx(-1.0).margin(1e-9));
      REQUIRE(roots[1][0] == Catch::Approx(1.0).margin(1e-9));
    }
  }
}

TEST_CASE("switching system roots for the double integrator") {
  SECTION("x = (-1, 0) has the two symmetric roots") {
    const auto sys = build_system(ProblemSpec<double>::integrator(2, {-1.0, 0.0}, +1));
    SolveOptions opts;
    opts.n_roots = 2;
    const auto res = deflated_solve(sys, opts);
    REQUIRE(res.status == SolveStatus::exhausted);
    const auto roots = sorted_roots(res.roots);
    REQUIRE(roots[0][0] == Catch::Approx(-1.0).margin(1e-8));
    REQUIRE(roots[0][1] == Catch::Approx(-1.0).margin(1e-8));
    REQUIRE(roots[1][0] == Catch::Approx(1.0).margin(1e-8));
    REQUIRE(roots[1][1] == Catch::Approx(1.0).margin(1e-8));

    // every returned root survives an undeflated residual check
    for (const auto& r : res.roots) {
      double resid = 0.0;
      for (double v : eval_system(sys, r)) resid = std::max(resid, std::abs(v));
      REQUIRE(resid <= 1e-8);
    }
    // pairwise separation
    for (std::size_t i = 0; i < roots.size(); ++i)
      for (std::size_t j = i + 1; j < roots.size(); ++j) {
        double d = 0.0;
        for (std::size_t k = 0; k < 2; ++k)
          d += (roots[i][k] - roots[j][k]) * (roots[i][k] - roots[j][k]);
        REQUIRE(std::sqrt(d) > opts.dedup_tol);
      }
  }
  SECTION("asking for zero roots returns immediately") {
    const auto sys = build_system(ProblemSpec<double>::integrator(2, {-1.0, 0.0}, +1));
    SolveOptions opts;
    opts.n_roots = 0;
    const auto res = deflated_solve(sys, opts);
    REQUIRE(res.roots.empty());
    REQUIRE(res.status == SolveStatus::exhausted);
    REQUIRE(res.iterations == 0);
  }
  SECTION("x = (1, 0) with u0 = +1 has no real roots and stalls") {
    const auto sys = build_system(ProblemSpec<double>::integrator(2, {1.0, 0.0}, +1));
    SolveOptions opts;
    opts.n_roots = 2;
    opts.max_iteration = 200;  // keep the stall cheap
    const auto res = deflated_solve(sys, opts);
    REQUIRE(res.roots.empty());
    REQUIRE(res.status != SolveStatus::exhausted);
  }
}

TEST_CASE("linear systems reproduce plain Newton exactly") {
  // 2 t1 + t2 = 3, t1 - t2 = 0
  MultiPoly<double> f1(2), f2(2);
  f1.add_term(Monomial({1, 0}), 2.0);
  f1.add_term(Monomial({0, 1}), 1.0);
  f1.add_term(Monomial({0, 0}), -3.0);
  f2.add_term(Monomial({1, 0}), 1.0);
  f2.add_term(Monomial({0, 1}), -1.0);
  const std::vector<MultiPoly<double>> eqs{f1, f2};

  std::vector<double> plain{0.3, 0.7};
  for (int step = 0; step < 3; ++step) {
    Eigen::Matrix2d j;
    j << 2.0, 1.0, 1.0, -1.0;
    Eigen::Vector2d f(f1.eval(plain), f2.eval(plain));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.solve(f);
    plain[0] -= s(0);
    plain[1] -= s(1);
  }

  SolveOptions opts;
  opts.guess = {0.3, 0.7};
  opts.n_roots = 1;
  const auto res = deflated_solve(eqs, opts);
  REQUIRE(res.status == SolveStatus::exhausted);
  REQUIRE(res.roots.size() == 1);
  REQUIRE(res.roots[0][0] == plain[0]);
  REQUIRE(res.roots[0][1] == plain[1]);
}

TEST_CASE("admissibility check") {
  REQUIRE(is_admissible({1.0, 1.0}, 1e-9));
  REQUIRE_FALSE(is_admissible({-1.0, -1.0}, 1e-9));
  REQUIRE(is_admissible({-1e-12, 0.5}, 1e-9));
  REQUIRE_FALSE(is_admissible({-1e-6, 0.5}, 1e-9));
}
