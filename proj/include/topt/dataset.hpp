#pragma once

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "topt/openloop.hpp"
#include "topt/parallel.hpp"
#include "topt/rng.hpp"

namespace topt {

/// One labeled training pair: state z, optimal control label u in {-1,+1}.
struct Sample {
  std::vector<double> z;
  int u = +1;
};

struct DatasetMeta {
  std::size_t n = 2;
  std::size_t n_samples = 50;        // initial conditions (N_s)
  std::size_t points_per_traj = 100; // samples along each trajectory (K)
  std::uint64_t seed = 0;
  double lo = -1.0;
  double hi = 1.0;
  /// Initial conditions are drawn on a dyadic grid of this resolution so
  /// that exact rationalization (Hermite counting) stays cheap; 0 draws
  /// full-resolution doubles.
  int grid_bits = 16;
  std::optional<bool> use_hermite;   // forwarded to the open-loop solver
  // Filled in by build_dataset:
  std::size_t skipped = 0;
  std::size_t total_samples = 0;
};

inline void to_json(nlohmann::json& j, const DatasetMeta& m) {
  j = nlohmann::json{{"n", m.n},
                     {"ns", m.n_samples},
                     {"k", m.points_per_traj},
                     {"seed", m.seed},
                     {"lo", m.lo},
                     {"hi", m.hi},
                     {"grid_bits", m.grid_bits},
                     {"skipped", m.skipped},
                     {"samples", m.total_samples},
                     {"format", 1}};
  if (m.use_hermite.has_value()) j["hermite"] = *m.use_hermite;
}

inline void from_json(const nlohmann::json& j, DatasetMeta& m) {
  j.at("n").get_to(m.n);
  j.at("ns").get_to(m.n_samples);
  j.at("k").get_to(m.points_per_traj);
  j.at("seed").get_to(m.seed);
  j.at("lo").get_to(m.lo);
  j.at("hi").get_to(m.hi);
  j.at("grid_bits").get_to(m.grid_bits);
  j.at("skipped").get_to(m.skipped);
  j.at("samples").get_to(m.total_samples);
  if (j.contains("hermite")) m.use_hermite = j.at("hermite").get<bool>();
}

/// Uniform i.i.d. initial conditions in [lo, hi]^n, deterministic per seed;
/// each index draws from its own derived sub-stream so generation order
/// never affects the values.
inline std::vector<std::vector<double>> sample_initial_conditions(
    std::size_t n, std::size_t n_samples, std::uint64_t seed, double lo, double hi,
    int grid_bits = 16) {
  if (n_samples < 1) throw Error("sample_initial_conditions: need at least one sample");
  if (!(lo < hi)) throw Error("sample_initial_conditions: empty bounds");
  std::vector<std::vector<double>> out(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng(derive_seed(seed, "ic", i));
    std::vector<double> x(n);
    for (std::size_t c = 0; c < n; ++c) x[c] = rng.uniform_grid(lo, hi, grid_bits);
    out[i] = std::move(x);
  }
  return out;
}

/// The initial pair (x, u0) followed by K samples at tau_k = k T / K,
/// k = 1..K, labeled by the right-continuous control. T = 0 collapses to
/// the initial pair alone.
inline std::vector<Sample> generate_trajectory_samples(const std::vector<double>& x,
                                                       const SwitchingSolution& sol,
                                                       std::size_t k_points) {
  std::vector<Sample> out;
  out.push_back(Sample{x, sol.u0});
  if (sol.T == 0.0 || k_points == 0) return out;
  for (std::size_t k = 1; k <= k_points; ++k) {
    const double tau =
        sol.T * (static_cast<double>(k) / static_cast<double>(k_points));
    out.push_back(Sample{propagate_exact(x, sol, tau), control_at(sol, tau)});
  }
  return out;
}

struct BuildLogEntry {
  std::size_t index = 0;
  std::string reason;
};

struct BuildResult {
  DatasetMeta meta;
  std::vector<BuildLogEntry> skipped_log;
};

/// Generates the dataset to a JSONL file: one header line {"meta": ...},
/// then one sample per line. Initial conditions whose solve stalls are
/// skipped and logged. Per-index solves may run in parallel; the file is
/// written in index order, so output bytes do not depend on thread count.
inline BuildResult build_dataset(const DatasetMeta& meta_in, const std::string& path,
                                 const OpenLoopOptions& solver_opts = {},
                                 unsigned threads = 1) {
  DatasetMeta meta = meta_in;
  OpenLoopOptions opts = solver_opts;
  if (meta.use_hermite.has_value()) opts.use_hermite = meta.use_hermite;

  const auto ics = sample_initial_conditions(meta.n, meta.n_samples, meta.seed,
                                             meta.lo, meta.hi, meta.grid_bits);

  std::vector<std::optional<std::vector<Sample>>> results(ics.size());
  std::vector<std::string> reasons(ics.size());
  parallel_for(ics.size(), threads, [&](std::size_t i) {
    try {
      const SwitchingSolution sol = solve_time_optimal(ics[i], opts);
      results[i] = generate_trajectory_samples(ics[i], sol, meta.points_per_traj);
    } catch (const SolverStalledError& e) {
      reasons[i] = e.what();
    }
  });

  BuildResult out;
  meta.skipped = 0;
  meta.total_samples = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].has_value()) {
      meta.total_samples += results[i]->size();
    } else {
      ++meta.skipped;
      out.skipped_log.push_back(BuildLogEntry{i, reasons[i]});
    }
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("build_dataset: cannot open '" + path + "' for writing");
  file << nlohmann::json{{"meta", meta}}.dump() << "\n";
  for (const auto& r : results) {
    if (!r.has_value()) continue;
    for (const Sample& s : *r)
      file << nlohmann::json{{"z", s.z}, {"u", s.u}}.dump() << "\n";
  }
  if (!file.good()) throw IoError("build_dataset: write failed for '" + path + "'");
  out.meta = meta;
  return out;
}

inline std::pair<DatasetMeta, std::vector<Sample>> read_dataset(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("read_dataset: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(file, line)) throw IoError("read_dataset: empty file '" + path + "'");
  DatasetMeta meta;
  std::vector<Sample> samples;
  try {
    meta = nlohmann::json::parse(line).at("meta").get<DatasetMeta>();
    while (std::getline(file, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      Sample s;
      j.at("z").get_to(s.z);
      j.at("u").get_to(s.u);
      samples.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("read_dataset: bad record in '" + path + "': " + e.what());
  }
  return {meta, samples};
}

}  // namespace topt
