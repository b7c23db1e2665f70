#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "topt/nn.hpp"
#include "topt/openloop.hpp"
#include "topt/parallel.hpp"
#include "topt/rng.hpp"

namespace topt {

enum class NoiseScaling {
  sqrt_dt,   // Euler-Maruyama: per-step std = sigma * sqrt(dt)
  per_step,  // literal per-step injection: per-step std = sigma
};

struct SimConfig {
  double dt = 5e-4;
  double confidence_eps = 0.0;  // fallback threshold; 0 disables the fallback
  double stop_radius = 1e-2;    // max-norm termination ball
  double max_time = 20.0;
  double noise_sigma = 0.0;     // std of the Gaussian injected into y_n
  NoiseScaling noise_scaling = NoiseScaling::sqrt_dt;
  std::uint64_t seed = 0;
  OpenLoopOptions fallback;     // solver used at low-confidence points

  SimConfig() {
    // The fallback only needs the admissible sign, at potentially high
    // call rates: skip the exhaustive sweep and the Hermite counting.
    fallback.stop_at_admissible = true;
    fallback.use_hermite = false;
    fallback.newton.restarts = 2;
    fallback.newton.max_iteration = 250;
  }
};

struct StepRecord {
  double tau = 0.0;
  std::vector<double> y;
  int u = +1;
  bool fallback = false;  // control came from the open-loop solver
};

struct TrajectoryRecord {
  std::vector<StepRecord> points;
  std::optional<double> T_NN;      // reach time; empty when max_time hit
  double fallback_fraction = 0.0;
};

namespace detail {

inline double max_norm(const std::vector<double>& y) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return m;
}

inline double norm2(const std::vector<double>& y) {
  double s = 0.0;
  for (double v : y) s += v * v;
  return std::sqrt(s);
}

// y <- y + dt (A y + b u) for the integrator chain.
inline void euler_step(std::vector<double>& y, double dt, int u) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i + 1 < n; ++i) y[i] += dt * y[i + 1];
  y[n - 1] += dt * static_cast<double>(u);
}

inline double effective_sigma(const SimConfig& cfg) {
  if (cfg.noise_sigma <= 0.0) return 0.0;
  return cfg.noise_scaling == NoiseScaling::sqrt_dt ? cfg.noise_sigma * std::sqrt(cfg.dt)
                                                    : cfg.noise_sigma;
}

}  // namespace detail

/// Explicit Euler closed loop under the classifier, with the open-loop
/// solver substituted whenever the confidence drops below the threshold.
/// Terminates inside the stop ball (T_NN recorded) or at max_time.
inline TrajectoryRecord simulate_closed_loop(const nn::MlpModel& model,
                                             const std::vector<double>& x,
                                             const SimConfig& cfg) {
  if (x.size() != model.input_dim())
    throw DimensionError("simulate_closed_loop: model input dim mismatch");
  if (!(cfg.dt > 0.0)) throw Error("simulate_closed_loop: dt must be positive");

  TrajectoryRecord rec;
  std::vector<double> y = x;
  if (detail::max_norm(y) < cfg.stop_radius) {
    rec.T_NN = 0.0;
    return rec;
  }

  Rng noise_rng(derive_seed(cfg.seed, "sim-noise"));
  const double sigma = detail::effective_sigma(cfg);
  std::size_t fallback_steps = 0;
  double tau = 0.0;
  while (tau < cfg.max_time) {
    auto [u, confidence] = nn::classify(model, y);
    bool used_fallback = false;
    if (confidence < cfg.confidence_eps) {
      try {
        u = solve_time_optimal(y, cfg.fallback).u0;
        used_fallback = true;
      } catch (const SolverStalledError&) {
        // keep the network label for this step
      }
    }
    rec.points.push_back(StepRecord{tau, y, u, used_fallback});
    if (used_fallback) ++fallback_steps;

    detail::euler_step(y, cfg.dt, u);
    if (sigma > 0.0) y.back() += noise_rng.normal(sigma);
    tau += cfg.dt;
    if (detail::max_norm(y) < cfg.stop_radius) {
      rec.T_NN = tau;
      break;
    }
  }
  if (!rec.points.empty())
    rec.fallback_fraction =
        static_cast<double>(fallback_steps) / static_cast<double>(rec.points.size());
  return rec;
}

enum class ControllerMode { open_loop, network, network_fallback };

struct MonteCarloStats {
  std::size_t runs = 0;
  std::vector<double> taus;                  // per recorded step (after update)
  std::vector<std::vector<double>> mean;     // [step][component]
  std::vector<std::vector<double>> variance; // population variance per component
  std::vector<double> final_norms;           // per-run ||y(T)||_2
  double mean_final_norm = 0.0;
};

namespace detail {

struct Accumulator {
  std::size_t count = 0;
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> m2;

  void init(std::size_t steps, std::size_t n) {
    count = 0;
    mean.assign(steps, std::vector<double>(n, 0.0));
    m2.assign(steps, std::vector<double>(n, 0.0));
  }
  void add(const std::vector<std::vector<double>>& traj) {
    ++count;
    for (std::size_t s = 0; s < traj.size(); ++s)
      for (std::size_t c = 0; c < traj[s].size(); ++c) {
        const double delta = traj[s][c] - mean[s][c];
        mean[s][c] += delta / static_cast<double>(count);
        m2[s][c] += delta * (traj[s][c] - mean[s][c]);
      }
  }
  // Chan pairwise merge; order-independent up to float rounding, applied
  // in fixed block order for bit-stable results.
  void merge(const Accumulator& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
    for (std::size_t s = 0; s < mean.size(); ++s)
      for (std::size_t c = 0; c < mean[s].size(); ++c) {
        const double delta = o.mean[s][c] - mean[s][c];
        mean[s][c] += delta * nb / (na + nb);
        m2[s][c] += o.m2[s][c] + delta * delta * na * nb / (na + nb);
      }
    count += o.count;
  }
};

}  // namespace detail

/// Monte Carlo over M seeded noisy runs on the horizon of the noise-free
/// optimal solve. Open-loop mode replays the precomputed signal without
/// re-solving; the network modes evaluate the classifier on the drifting
/// state. Runs are processed in fixed blocks so the statistics do not
/// depend on the worker count.
inline MonteCarloStats monte_carlo(ControllerMode mode, const nn::MlpModel* model,
                                   const std::vector<double>& x, const SimConfig& cfg,
                                   std::size_t runs, unsigned threads = 1) {
  if (runs < 1) throw Error("monte_carlo: need at least one run");
  if (mode != ControllerMode::open_loop && model == nullptr)
    throw Error("monte_carlo: network modes need a model");
  if (!(cfg.dt > 0.0)) throw Error("monte_carlo: dt must be positive");

  OpenLoopOptions plan_opts = cfg.fallback;
  plan_opts.stop_at_admissible = false;
  plan_opts.use_hermite.reset();
  const SwitchingSolution sol = solve_time_optimal(x, plan_opts);
  const std::size_t steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(sol.T / cfg.dt)));
  const std::size_t n = x.size();
  const double sigma = detail::effective_sigma(cfg);

  const std::size_t block_size = 32;
  const std::size_t n_blocks = (runs + block_size - 1) / block_size;
  std::vector<detail::Accumulator> blocks(n_blocks);
  std::vector<std::vector<double>> final_norms(n_blocks);

  parallel_for(n_blocks, threads, [&](std::size_t bi) {
    auto& acc = blocks[bi];
    acc.init(steps, n);
    std::vector<std::vector<double>> traj(steps, std::vector<double>(n, 0.0));
    const std::size_t lo = bi * block_size;
    const std::size_t hi = std::min(runs, lo + block_size);
    for (std::size_t run = lo; run < hi; ++run) {
      Rng rng(derive_seed(cfg.seed, "mc-run", run));
      std::vector<double> y = x;
      for (std::size_t s = 0; s < steps; ++s) {
        int u;
        if (mode == ControllerMode::open_loop) {
          u = control_at(sol, std::min(static_cast<double>(s) * cfg.dt, sol.T));
        } else {
          auto [label, confidence] = nn::classify(*model, y);
          u = label;
          if (mode == ControllerMode::network_fallback &&
              confidence < cfg.confidence_eps) {
            try {
              u = solve_time_optimal(y, cfg.fallback).u0;
            } catch (const SolverStalledError&) {
            }
          }
        }
        detail::euler_step(y, cfg.dt, u);
        if (sigma > 0.0) y.back() += rng.normal(sigma);
        traj[s] = y;
      }
      acc.add(traj);
      final_norms[bi].push_back(detail::norm2(y));
    }
  });

  detail::Accumulator total;
  total.init(steps, n);
  MonteCarloStats stats;
  for (std::size_t bi = 0; bi < n_blocks; ++bi) {
    total.merge(blocks[bi]);
    for (double v : final_norms[bi]) stats.final_norms.push_back(v);
  }

  stats.runs = runs;
  stats.taus.resize(steps);
  for (std::size_t s = 0; s < steps; ++s)
    stats.taus[s] = static_cast<double>(s + 1) * cfg.dt;
  stats.mean = total.mean;
  stats.variance.assign(steps, std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < steps; ++s)
    for (std::size_t c = 0; c < n; ++c)
      stats.variance[s][c] = total.m2[s][c] / static_cast<double>(total.count);
  double acc = 0.0;
  for (double v : stats.final_norms) acc += v;
  stats.mean_final_norm = acc / static_cast<double>(stats.final_norms.size());
  return stats;
}

}  // namespace topt
