#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "topt/rng.hpp"
#include "topt/sysgen.hpp"

namespace topt {

/// Roots found so far plus the deflation parameters (power p, shift xi).
struct DeflationState {
  std::vector<std::vector<double>> roots;
  int p = 2;          // deflation power, positive integer
  double xi = 1.0;    // non-negative shift; keeps the residual alive at infinity
  double dedup_tol = 1e-6;
};

namespace detail {

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline void check_not_deflated_root(const std::vector<double>& t,
                                    const DeflationState& ds) {
  for (const auto& r : ds.roots)
    if (distance(t, r) <= ds.dedup_tol)
      throw DeflationSingularityError("deflate: point coincides with a found root");
}

}  // namespace detail

/// Deflated residual (1/eta(t) + xi) * F(t) with eta(t) the product of
/// ||t - r_i||^p over the found roots. With no roots found, eta = 1 and
/// the shift still applies.
inline std::vector<double> deflate(const std::vector<double>& f_val,
                                   const std::vector<double>& t,
                                   const DeflationState& ds) {
  detail::check_not_deflated_root(t, ds);
  double eta = 1.0;
  for (const auto& r : ds.roots) eta *= std::pow(detail::distance(t, r), ds.p);
  const double scale = 1.0 / eta + ds.xi;
  std::vector<double> g(f_val.size());
  for (std::size_t i = 0; i < f_val.size(); ++i) g[i] = scale * f_val[i];
  return g;
}

/// Jacobian of the deflated residual: product rule on (1/eta + xi) F, i.e.
/// (1/eta + xi) F' - (F (grad eta)^T) / eta^2. Includes the xi*F' part.
inline std::vector<std::vector<double>> deflated_jacobian(
    const std::vector<double>& f_val, const std::vector<std::vector<double>>& j_val,
    const std::vector<double>& t, const DeflationState& ds) {
  detail::check_not_deflated_root(t, ds);
  const std::size_t n = t.size();
  double eta = 1.0;
  std::vector<double> grad_log(n, 0.0);  // grad eta / eta
  for (const auto& r : ds.roots) {
    const double d = detail::distance(t, r);
    eta *= std::pow(d, ds.p);
    for (std::size_t i = 0; i < n; ++i)
      grad_log[i] += ds.p * (t[i] - r[i]) / (d * d);
  }
  const double scale = 1.0 / eta + ds.xi;
  std::vector<std::vector<double>> g(f_val.size(), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < f_val.size(); ++i)
    for (std::size_t q = 0; q < n; ++q)
      g[i][q] = scale * j_val[i][q] - f_val[i] * grad_log[q] / eta;
  return g;
}

struct SolveOptions {
  std::vector<double> guess;  // empty: vector of ones
  std::size_t n_roots = 1;    // expected number of roots to exhaust
  double eps = 1e-10;         // convergence tolerance on the update norm
  int max_iteration = 1000;
  int p = 2;
  double xi = 1.0;
  double dedup_tol = 1e-6;
  double residual_tol = 1e-8;
  double admissibility_tol = 1e-9;
  int restarts = 5;           // randomized retries after the fixed guess stalls
  double restart_lo = 0.0;
  double restart_hi = 2.0;
  std::uint64_t seed = 0x5eed001dull;
  /// Optional early exit: when set, the search stops as soon as a stored
  /// root satisfies this predicate (used by callers that only need one
  /// qualifying root, e.g. an admissible switching sequence).
  std::function<bool(const std::vector<double>&)> accept_root;
};

enum class SolveStatus { exhausted, stalled, diverged };

struct SolveResult {
  std::vector<std::vector<double>> roots;
  SolveStatus status = SolveStatus::exhausted;
  std::int64_t iterations = 0;         // deflated Newton iterations consumed
  std::int64_t polish_iterations = 0;  // undeflated refinement iterations
};

/// Square nonlinear system with an evaluable Jacobian.
struct NewtonSystem {
  std::size_t dim = 0;
  std::function<std::vector<double>(const std::vector<double>&)> eval_f;
  std::function<std::vector<std::vector<double>>(const std::vector<double>&)> eval_j;
};

inline bool is_admissible(const std::vector<double>& root, double tol) {
  for (double v : root)
    if (v < -tol) return false;
  return true;
}

namespace detail {

// Least-squares Newton step via the pseudoinverse; ridge-damped fallback
// when the SVD path yields a non-finite step.
inline Eigen::VectorXd pinv_step(const Eigen::MatrixXd& j, const Eigen::VectorXd& g) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd step = svd.solve(g);
  if (step.allFinite()) return step;
  const double damping = 1e-12;
  Eigen::MatrixXd a = j.transpose() * j;
  a.diagonal().array() += damping;
  return a.ldlt().solve(j.transpose() * g);
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

/// Deflated Newton iteration exhausting up to opts.n_roots distinct roots.
/// Each converged point is re-refined on the undeflated system, then
/// accepted only when its max-norm residual passes residual_tol and it is
/// separated from all previously found roots. A round that fails to
/// converge from the fixed guess and from every randomized restart ends
/// the search with the roots found so far.
inline SolveResult deflated_solve(const NewtonSystem& sys, const SolveOptions& opts) {
  const std::size_t n = sys.dim;
  SolveResult result;
  DeflationState ds{{}, opts.p, opts.xi, opts.dedup_tol};
  Rng rng(opts.seed);
  std::vector<double> base_guess =
      opts.guess.empty() ? std::vector<double>(n, 1.0) : opts.guess;
  if (base_guess.size() != n) throw DimensionError("deflated_solve: bad guess length");

  const double blowup = 1e12;
  bool last_round_diverged = false;

  while (result.roots.size() < opts.n_roots) {
    bool stored = false;
    last_round_diverged = false;

    for (int attempt = 0; attempt <= opts.restarts && !stored; ++attempt) {
      std::vector<double> t(n);
      if (attempt == 0) {
        t = base_guess;
      } else {
        for (auto& v : t) v = rng.uniform(opts.restart_lo, opts.restart_hi);
      }

      bool converged = false;
      bool diverged = false;
      for (int iteration = 1; iteration <= opts.max_iteration; ++iteration) {
        bool near_found = false;
        for (const auto& r : ds.roots)
          if (detail::distance(t, r) <= opts.dedup_tol) near_found = true;
        if (near_found || !detail::all_finite(t)) {
          diverged = !near_found;
          break;
        }
        double tnorm = 0.0;
        for (double v : t) tnorm = std::max(tnorm, std::abs(v));
        if (tnorm > blowup) {
          diverged = true;
          break;
        }

        const auto f = sys.eval_f(t);
        const auto j = sys.eval_j(t);
        if (!detail::all_finite(f)) {
          diverged = true;
          break;
        }
        const auto g = deflate(f, t, ds);
        const auto gj = deflated_jacobian(f, j, t, ds);

        Eigen::VectorXd gv(n);
        Eigen::MatrixXd jm(n, n);
        for (std::size_t i = 0; i < n; ++i) {
          gv(static_cast<Eigen::Index>(i)) = g[i];
          for (std::size_t q = 0; q < n; ++q)
            jm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = gj[i][q];
        }
        const Eigen::VectorXd step = detail::pinv_step(jm, gv);
        ++result.iterations;
        if (!step.allFinite()) {
          diverged = true;
          break;
        }
        for (std::size_t i = 0; i < n; ++i) t[i] -= step(static_cast<Eigen::Index>(i));
        if (step.norm() <= opts.eps) {
          converged = true;
          break;
        }
      }

      if (!converged) {
        last_round_diverged = diverged;
        continue;
      }

      // Undeflated polish: deflation distorts the residual landscape
      // near roots, so re-refine on the raw system.
      for (int k = 0; k < 25; ++k) {
        const auto f = sys.eval_f(t);
        const auto j = sys.eval_j(t);
        if (!detail::all_finite(f)) break;
        Eigen::VectorXd fv(n);
        Eigen::MatrixXd jm(n, n);
        for (std::size_t i = 0; i < n; ++i) {
          fv(static_cast<Eigen::Index>(i)) = f[i];
          for (std::size_t q = 0; q < n; ++q)
            jm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = j[i][q];
        }
        const Eigen::VectorXd step = detail::pinv_step(jm, fv);
        ++result.polish_iterations;
        if (!step.allFinite()) break;
        for (std::size_t i = 0; i < n; ++i) t[i] -= step(static_cast<Eigen::Index>(i));
        if (step.norm() <= opts.eps) break;
      }

      if (!detail::all_finite(t)) continue;
      double res = 0.0;
      for (double v : sys.eval_f(t)) res = std::max(res, std::abs(v));
      if (res > opts.residual_tol) continue;
      bool dup = false;
      for (const auto& r : ds.roots)
        if (detail::distance(t, r) <= opts.dedup_tol) dup = true;
      if (dup) continue;

      ds.roots.push_back(t);
      result.roots.push_back(t);
      stored = true;
      if (opts.accept_root && opts.accept_root(t)) return result;
    }

    if (!stored) break;  // every start stalled; Alg. 1 break
  }

  if (result.roots.size() >= opts.n_roots)
    result.status = SolveStatus::exhausted;
  else
    result.status = last_round_diverged ? SolveStatus::diverged : SolveStatus::stalled;
  return result;
}

inline NewtonSystem as_newton_system(const PolySystem<double>& sys) {
  return NewtonSystem{
      sys.spec.n,
      [&sys](const std::vector<double>& t) { return eval_system(sys, t); },
      [&sys](const std::vector<double>& t) { return eval_jacobian(sys, t); }};
}

inline SolveResult deflated_solve(const PolySystem<double>& sys,
                                  const SolveOptions& opts) {
  return deflated_solve(as_newton_system(sys), opts);
}

/// Convenience overload for ad-hoc square systems given as polynomials;
/// the Jacobian comes from formal partial derivatives.
inline SolveResult deflated_solve(const std::vector<MultiPoly<double>>& equations,
                                  const SolveOptions& opts) {
  if (equations.empty()) throw DimensionError("deflated_solve: empty system");
  const std::size_t n = equations[0].nvars();
  if (equations.size() != n)
    throw DimensionError("deflated_solve: system must be square");
  auto jac = std::make_shared<std::vector<std::vector<MultiPoly<double>>>>();
  jac->resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t q = 0; q < n; ++q)
      (*jac)[i].push_back(poly_partial(equations[i], q));
  auto eqs = std::make_shared<std::vector<MultiPoly<double>>>(equations);
  NewtonSystem sys{
      n,
      [eqs](const std::vector<double>& t) {
        std::vector<double> out;
        out.reserve(eqs->size());
        for (const auto& e : *eqs) out.push_back(e.eval(t));
        return out;
      },
      [jac, n](const std::vector<double>& t) {
        std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t q = 0; q < n; ++q) out[i][q] = (*jac)[i][q].eval(t);
        return out;
      }};
  return deflated_solve(sys, opts);
}

}  // namespace topt
