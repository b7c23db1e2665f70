#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "topt/hermite.hpp"
#include "topt/newton.hpp"
#include "topt/sysgen.hpp"

namespace topt {

/// Admissible switching sequence: initial sign u0, non-negative increments
/// t1..tn, horizon T = sum t_i, and the max-norm residual of the system at t.
struct SwitchingSolution {
  int u0 = +1;
  std::vector<double> t;
  double T = 0.0;
  double residual = 0.0;
};

struct TrajectoryPoint {
  double tau = 0.0;
  std::vector<double> y;
  int u = +1;
};

struct OpenLoopOptions {
  /// Hermite root counts bound the deflation per sign. Default (unset):
  /// enabled for n <= 4, disabled for n = 5 and above, where the algebra
  /// costs more than the uninformed deflation it saves.
  std::optional<bool> use_hermite;
  SolveOptions newton;
  GroebnerOptions groebner;
  double clamp_tol = 1e-9;  // components in [-clamp_tol, 0) snap to 0
  /// Return the first admissible root instead of exhausting both signs.
  /// Skips the min-horizon comparison, which only matters on switching
  /// surfaces; meant for callers that need the sign at high rate.
  bool stop_at_admissible = false;

  bool hermite_enabled(std::size_t n) const {
    return use_hermite.value_or(n <= 4);
  }
};

namespace detail {

inline std::int64_t factorial_bound(std::size_t n) {
  std::int64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<std::int64_t>(i);
  return f;
}

}  // namespace detail

/// Piecewise-constant optimal control value at time tau, right-continuous
/// on [0, T]; zero-length intervals are skipped and the last interval is
/// closed.
inline int control_at(const SwitchingSolution& sol, double tau) {
  const double slack = 1e-12 * std::max(1.0, sol.T);
  if (tau < -slack || tau > sol.T + slack)
    throw Error("control_at: tau outside [0, T]");
  int sign = sol.u0;
  int last_active = sol.u0;
  double acc = 0.0;
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    if (sol.t[i] == 0.0) {
      sign = -sign;
      continue;
    }
    if (tau < acc + sol.t[i]) return sign;
    acc += sol.t[i];
    last_active = sign;
    sign = -sign;
  }
  return last_active;
}

/// Closed-form propagation of the integrator chain under the bang-bang
/// signal of `sol`, segment by segment; each segment applies the exact
/// polynomial flow y_i <- sum_k h^(k-i)/(k-i)! y_k + u h^(n-i+1)/(n-i+1)!.
inline std::vector<double> propagate_exact(const std::vector<double>& x,
                                           const SwitchingSolution& sol, double tau) {
  const std::size_t n = x.size();
  const double slack = 1e-12 * std::max(1.0, sol.T);
  if (tau < -slack || tau > sol.T + slack)
    throw Error("propagate_exact: tau outside [0, T]");
  tau = std::min(std::max(tau, 0.0), sol.T);

  std::vector<double> y = x;
  auto step = [&](double h, int u) {
    if (h == 0.0) return;
    std::vector<double> hp(n + 2, 1.0);  // hp[k] = h^k / k!
    for (std::size_t k = 1; k <= n + 1; ++k) hp[k] = hp[k - 1] * h / static_cast<double>(k);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (std::size_t k = i; k < n; ++k) v += hp[k - i] * y[k];
      v += static_cast<double>(u) * hp[n - i];
      out[i] = v;
    }
    y = std::move(out);
  };

  double remaining = tau;
  int sign = sol.u0;
  for (std::size_t i = 0; i < sol.t.size() && remaining > 0.0; ++i) {
    const double h = std::min(sol.t[i], remaining);
    step(h, sign);
    remaining -= h;
    sign = -sign;
  }
  return y;
}

namespace detail {

struct Candidate {
  SwitchingSolution sol;
};

inline std::optional<SwitchingSolution> admissible_candidate(
    const PolySystem<double>& sys, const std::vector<double>& root, int u0,
    const OpenLoopOptions& opts) {
  if (!is_admissible(root, opts.clamp_tol)) return std::nullopt;
  std::vector<double> t = root;
  for (auto& v : t)
    if (v < 0.0) v = 0.0;
  double res = 0.0;
  for (double v : eval_system(sys, t)) res = std::max(res, std::abs(v));
  if (res > opts.newton.residual_tol) return std::nullopt;
  SwitchingSolution sol;
  sol.u0 = u0;
  sol.t = t;
  sol.T = 0.0;
  for (double v : t) sol.T += v;
  sol.residual = res;
  return sol;
}

}  // namespace detail

struct TimeOptimalStats {
  std::int64_t deflation_iterations = 0;   // across both signs
  std::array<int, 2> hermite_counts{-1, -1};  // [u0=+1, u0=-1]; -1 = not computed
};

/// Solves the time-optimal problem for initial state x: exhausts the roots
/// of the switching system for each admissible initial sign (bounded by the
/// Hermite count when enabled, by n! otherwise) and returns the unique
/// non-negative switching sequence. When a sign has Hermite count zero the
/// other sign is taken without solving. Boundary states where both signs
/// admit a root resolve to the smaller horizon, ties to u0 = +1.
inline SwitchingSolution solve_time_optimal(const std::vector<double>& x,
                                            const OpenLoopOptions& opts = {},
                                            TimeOptimalStats* stats = nullptr) {
  const std::size_t n = x.size();
  if (n < 2) throw DimensionError("solve_time_optimal: dimension must be >= 2");
  check_finite(x);

  bool all_zero = true;
  for (double v : x) all_zero &= (v == 0.0);
  if (all_zero) {
    SwitchingSolution sol;
    sol.u0 = +1;
    sol.t.assign(n, 0.0);
    return sol;
  }

  const bool hermite = opts.hermite_enabled(n);
  std::array<int, 2> counts{-1, -1};
  if (hermite) {
    std::vector<Rational> xr;
    xr.reserve(n);
    for (double v : x) xr.push_back(Rational::from_double(v));
    for (int si = 0; si < 2; ++si) {
      const int u0 = si == 0 ? +1 : -1;
      try {
        counts[si] = count_real_roots(
            ProblemSpec<Rational>::integrator(n, xr, u0), opts.groebner);
      } catch (const ResourceLimitError&) {
        counts[si] = -1;  // budget blown: fall back to the factorial bound
      }
    }
  }
  if (stats != nullptr) stats->hermite_counts = counts;

  std::vector<SwitchingSolution> candidates;
  for (int si = 0; si < 2; ++si) {
    const int u0 = si == 0 ? +1 : -1;
    if (counts[si] == 0) continue;
    const auto spec = ProblemSpec<double>::integrator(n, x, u0);
    const PolySystem<double> sys = build_system(spec);
    SolveOptions nopts = opts.newton;
    nopts.n_roots = counts[si] > 0 ? static_cast<std::size_t>(counts[si])
                                   : static_cast<std::size_t>(detail::factorial_bound(n));
    nopts.seed = derive_seed(opts.newton.seed, "solve", static_cast<std::uint64_t>(si));
    if (opts.stop_at_admissible) {
      const double tol = opts.clamp_tol;
      nopts.accept_root = [tol](const std::vector<double>& r) {
        return is_admissible(r, tol);
      };
    }
    const SolveResult res = deflated_solve(sys, nopts);
    if (stats != nullptr) stats->deflation_iterations += res.iterations;
    for (const auto& root : res.roots) {
      auto cand = detail::admissible_candidate(sys, root, u0, opts);
      if (cand) candidates.push_back(*cand);
    }
    if (opts.stop_at_admissible && !candidates.empty()) return candidates.front();
  }

  if (candidates.empty())
    throw SolverStalledError("solve_time_optimal: no admissible root found");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto& a = candidates[i];
    const auto& b = candidates[best];
    if (a.T < b.T || (a.T == b.T && a.u0 > b.u0)) best = i;
  }
  return candidates[best];
}

}  // namespace topt
