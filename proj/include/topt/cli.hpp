#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "topt/feedback.hpp"
#include "topt/hermite.hpp"
#include "topt/version.hpp"

namespace topt {
namespace cli {

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

inline std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) {
    try {
      out.push_back(std::stod(p));
    } catch (const std::exception&) {
      throw ParseError("cannot parse number '" + p + "'");
    }
  }
  return out;
}

inline std::vector<Rational> parse_rationals(const std::string& s) {
  std::vector<Rational> out;
  for (const auto& p : split(s, ',')) out.push_back(Rational::parse(p));
  return out;
}

inline std::vector<std::size_t> parse_dims(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& p : split(s, ',')) {
    const long v = std::stol(p);
    if (v <= 0) throw ParseError("layer widths must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline std::string fmt(double v) { return FieldOps<double>::str(v); }

inline std::optional<bool> tristate(const std::string& v) {
  if (v == "auto") return std::nullopt;
  if (v == "on") return true;
  if (v == "off") return false;
  throw ParseError("expected auto|on|off, got '" + v + "'");
}

struct Manifest {
  std::string command;
  std::string config_text;
  std::vector<std::string> outputs;
  double seconds = 0.0;

  void write(const std::string& out_dir) const {
    std::filesystem::create_directories(out_dir);
    nlohmann::json j{{"command", command},
                     {"config", config_text},
                     {"outputs", outputs},
                     {"seconds", seconds},
                     {"versions", {{"topt", kVersion}, {"compiler", __VERSION__}}}};
    const std::string path = out_dir + "/manifest-" + command + ".json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("manifest: cannot open '" + path + "'");
    f << j.dump(2) << "\n";
  }
};

}  // namespace detail

/// Entry point behind the `topt` binary; kept callable for tests.
/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"time-optimal bang-bang synthesis toolkit"};
  app.set_config("--config", "", "flat key=value config file");
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out_dir = ".";
  app.add_option("--seed", seed, "root seed; every stage derives sub-streams");
  app.add_option("--threads", threads, "worker cap, 0 = hardware");
  app.add_option("--out-dir", out_dir, "directory for run manifests");
  app.require_subcommand(0, 1);

  // dump-system
  auto* c_dump = app.add_subcommand("dump-system", "print the switching-time system");
  std::size_t dump_n = 2;
  std::string dump_x, dump_b;
  int dump_u0 = +1;
  c_dump->add_option("--n", dump_n, "state dimension")->required();
  c_dump->add_option("--x", dump_x, "initial state, e.g. \"1,0\" or \"1/2,-1/3\"")->required();
  c_dump->add_option("--u0", dump_u0, "initial control sign (+1/-1)");
  c_dump->add_option("--b", dump_b, "input vector (default integrator e_n)");

  // solve
  auto* c_solve = app.add_subcommand("solve", "exhaust roots and pick the admissible sequence");
  std::size_t solve_n = 2;
  std::string solve_x, solve_hermite = "auto";
  int solve_u0 = 0;
  long solve_nroots = 0;
  int solve_p = 2;
  double solve_xi = 1.0;
  c_solve->add_option("--n", solve_n, "state dimension")->required();
  c_solve->add_option("--x", solve_x, "initial state")->required();
  c_solve->add_option("--u0", solve_u0, "restrict to one sign (+1/-1); 0 = both");
  c_solve->add_option("--n-roots", solve_nroots, "override the root-count bound");
  c_solve->add_option("--p", solve_p, "deflation power");
  c_solve->add_option("--xi", solve_xi, "deflation shift");
  c_solve->add_option("--hermite", solve_hermite, "auto|on|off root-count bounding");

  // count-roots
  auto* c_count = app.add_subcommand("count-roots", "exact real-root count via the Hermite form");
  std::size_t count_n = 2;
  std::string count_x;
  int count_u0 = +1;
  c_count->add_option("--n", count_n, "state dimension")->required();
  c_count->add_option("--x", count_x, "rational initial state, e.g. \"-1,0\" or \"1/2,1\"")->required();
  c_count->add_option("--u0", count_u0, "initial control sign")->required();

  // trajectory
  auto* c_traj = app.add_subcommand("trajectory", "sample the optimal trajectory as CSV");
  std::size_t traj_n = 2, traj_k = 100;
  std::string traj_x, traj_out;
  c_traj->add_option("--n", traj_n, "state dimension")->required();
  c_traj->add_option("--x", traj_x, "initial state")->required();
  c_traj->add_option("--samples", traj_k, "points along the trajectory");
  c_traj->add_option("--out", traj_out, "CSV path (default stdout)");

  // gen-data
  auto* c_gen = app.add_subcommand("gen-data", "generate the labeled training set");
  DatasetMeta gen_meta;
  std::string gen_out, gen_hermite = "auto";
  c_gen->add_option("--n", gen_meta.n, "state dimension")->required();
  c_gen->add_option("--ns", gen_meta.n_samples, "number of initial conditions")->required();
  c_gen->add_option("--k", gen_meta.points_per_traj, "points per trajectory");
  c_gen->add_option("--lo", gen_meta.lo, "domain lower bound");
  c_gen->add_option("--hi", gen_meta.hi, "domain upper bound");
  c_gen->add_option("--grid-bits", gen_meta.grid_bits, "dyadic sampling grid bits, 0 = off");
  c_gen->add_option("--out", gen_out, "output JSONL path")->required();
  c_gen->add_option("--hermite", gen_hermite, "auto|on|off root-count bounding");

  // train
  auto* c_train = app.add_subcommand("train", "train the classifier on a dataset");
  std::string train_data, train_layers, train_out, train_curve;
  nn::TrainConfig train_cfg;
  c_train->add_option("--data", train_data, "dataset JSONL")->required();
  c_train->add_option("--layers", train_layers, "widths, e.g. \"2,100,1\"")->required();
  c_train->add_option("--lr", train_cfg.learning_rate, "Adam learning rate");
  c_train->add_option("--batch", train_cfg.batch_size, "mini-batch size");
  c_train->add_option("--epochs", train_cfg.epochs, "training epochs");
  c_train->add_option("--split", train_cfg.split_fraction, "train fraction");
  c_train->add_option("--out", train_out, "model JSON path")->required();
  c_train->add_option("--curve-out", train_curve, "per-epoch metrics CSV");

  // eval
  auto* c_eval = app.add_subcommand("eval", "evaluate a model on a dataset");
  std::string eval_model, eval_data;
  c_eval->add_option("--model", eval_model, "model JSON")->required();
  c_eval->add_option("--data", eval_data, "dataset JSONL")->required();

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "closed-loop rollout with the classifier");
  std::string sim_model, sim_x, sim_out, sim_scaling = "sqrt-dt";
  SimConfig sim_cfg;
  c_sim->add_option("--model", sim_model, "model JSON")->required();
  c_sim->add_option("--x", sim_x, "initial state")->required();
  c_sim->add_option("--dt", sim_cfg.dt, "Euler step");
  c_sim->add_option("--eps", sim_cfg.confidence_eps, "confidence fallback threshold");
  c_sim->add_option("--stop-radius", sim_cfg.stop_radius, "termination ball (max-norm)");
  c_sim->add_option("--max-time", sim_cfg.max_time, "time cap");
  c_sim->add_option("--noise-sigma", sim_cfg.noise_sigma, "noise std on the last component");
  c_sim->add_option("--noise-scaling", sim_scaling, "sqrt-dt|step");
  c_sim->add_option("--out", sim_out, "trajectory CSV (default stdout)");

  // montecarlo
  auto* c_mc = app.add_subcommand("montecarlo", "noise robustness statistics");
  std::string mc_model, mc_x, mc_out, mc_mode = "net-fallback", mc_scaling = "sqrt-dt";
  SimConfig mc_cfg;
  std::size_t mc_runs = 1000;
  c_mc->add_option("--mode", mc_mode, "open|net|net-fallback")->required();
  c_mc->add_option("--model", mc_model, "model JSON (network modes)");
  c_mc->add_option("--x", mc_x, "initial state")->required();
  c_mc->add_option("--m", mc_runs, "number of Monte Carlo runs");
  c_mc->add_option("--dt", mc_cfg.dt, "Euler step");
  c_mc->add_option("--eps", mc_cfg.confidence_eps, "confidence fallback threshold");
  c_mc->add_option("--noise-sigma", mc_cfg.noise_sigma, "noise std on the last component");
  c_mc->add_option("--noise-scaling", mc_scaling, "sqrt-dt|step");
  c_mc->add_option("--out", mc_out, "stats CSV (default stdout)");

  args.insert(args.begin(), "topt");
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }
  if (app.get_subcommands().empty()) {
    out << app.help();
    return 2;
  }

  const auto started = std::chrono::steady_clock::now();
  detail::Manifest manifest;
  manifest.config_text = app.config_to_str(true, false);

  try {
    if (c_dump->parsed()) {
      manifest.command = "dump-system";
      const auto x = detail::parse_rationals(dump_x);
      ProblemSpec<Rational> spec =
          dump_b.empty()
              ? ProblemSpec<Rational>::integrator(dump_n, x, dump_u0)
              : ProblemSpec<Rational>{dump_n, detail::parse_rationals(dump_b), x, dump_u0};
      const auto sys = build_system(spec);
      out << "# n=" << dump_n << " u0=" << dump_u0 << " x=" << dump_x << "\n";
      for (std::size_t i = 0; i < sys.equations.size(); ++i)
        out << "f" << (i + 1) << " = " << render(sys.equations[i]) << "\n";
    } else if (c_solve->parsed()) {
      manifest.command = "solve";
      const auto x = detail::parse_doubles(solve_x);
      if (x.size() != solve_n) throw DimensionError("solve: --x length must equal --n");
      OpenLoopOptions opts;
      opts.use_hermite = detail::tristate(solve_hermite);
      opts.newton.p = solve_p;
      opts.newton.xi = solve_xi;
      opts.newton.seed = derive_seed(seed, "cli-solve");
      nlohmann::json roots_json = nlohmann::json::object();
      for (int u0 : {+1, -1}) {
        if (solve_u0 != 0 && u0 != solve_u0) continue;
        const auto sys = build_system(ProblemSpec<double>::integrator(solve_n, x, u0));
        SolveOptions nopts = opts.newton;
        nopts.n_roots = solve_nroots > 0
                            ? static_cast<std::size_t>(solve_nroots)
                            : static_cast<std::size_t>(topt::detail::factorial_bound(solve_n));
        const auto res = deflated_solve(sys, nopts);
        nlohmann::json sign_json;
        sign_json["status"] = res.status == SolveStatus::exhausted ? "exhausted"
                              : res.status == SolveStatus::stalled ? "stalled"
                                                                   : "diverged";
        sign_json["iterations"] = res.iterations;
        sign_json["roots"] = nlohmann::json::array();
        for (const auto& r : res.roots) {
          double resid = 0.0;
          for (double v : eval_system(sys, r)) resid = std::max(resid, std::abs(v));
          sign_json["roots"].push_back(
              {{"t", r},
               {"admissible", is_admissible(r, opts.newton.admissibility_tol)},
               {"residual", resid}});
        }
        roots_json[u0 > 0 ? "+1" : "-1"] = sign_json;
      }
      nlohmann::json j{{"x", x}, {"roots", roots_json}};
      if (solve_u0 == 0) {
        const auto sol = solve_time_optimal(x, opts);
        j["u0"] = sol.u0;
        j["t"] = sol.t;
        j["T"] = sol.T;
        j["residual"] = sol.residual;
      }
      out << j.dump(2) << "\n";
    } else if (c_count->parsed()) {
      manifest.command = "count-roots";
      const auto x = detail::parse_rationals(count_x);
      if (x.size() != count_n) throw DimensionError("count-roots: --x length must equal --n");
      const auto rep =
          hermite_report(ProblemSpec<Rational>::integrator(count_n, x, count_u0));
      out << nlohmann::json{{"rank", rep.rank},
                            {"signature", rep.signature},
                            {"quotient_dim", rep.quotient_basis.size()}}
                 .dump(2)
          << "\n";
    } else if (c_traj->parsed()) {
      manifest.command = "trajectory";
      const auto x = detail::parse_doubles(traj_x);
      if (x.size() != traj_n) throw DimensionError("trajectory: --x length must equal --n");
      OpenLoopOptions opts;
      opts.newton.seed = derive_seed(seed, "cli-traj");
      const auto sol = solve_time_optimal(x, opts);
      std::ofstream file;
      std::ostream* os = &out;
      if (!traj_out.empty()) {
        file.open(traj_out, std::ios::binary);
        if (!file) throw IoError("trajectory: cannot open '" + traj_out + "'");
        os = &file;
        manifest.outputs.push_back(traj_out);
      }
      *os << "tau";
      for (std::size_t i = 1; i <= traj_n; ++i) *os << ",y" << i;
      *os << ",u\n";
      for (std::size_t k = 0; k <= traj_k; ++k) {
        const double tau =
            sol.T * (static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(traj_k, 1)));
        const auto y = propagate_exact(x, sol, tau);
        *os << detail::fmt(tau);
        for (double v : y) *os << "," << detail::fmt(v);
        *os << "," << control_at(sol, tau) << "\n";
      }
    } else if (c_gen->parsed()) {
      manifest.command = "gen-data";
      gen_meta.seed = derive_seed(seed, "gen-data");
      gen_meta.use_hermite = detail::tristate(gen_hermite);
      const auto result = build_dataset(gen_meta, gen_out, OpenLoopOptions{}, threads);
      manifest.outputs.push_back(gen_out);
      for (const auto& entry : result.skipped_log)
        err << "skipped initial condition " << entry.index << ": " << entry.reason << "\n";
      out << nlohmann::json{{"meta", result.meta}}.dump(2) << "\n";
    } else if (c_train->parsed()) {
      manifest.command = "train";
      train_cfg.seed = derive_seed(seed, "train");
      const auto [meta, samples] = read_dataset(train_data);
      const auto dims = detail::parse_dims(train_layers);
      const auto result = nn::train(samples, dims, train_cfg);
      nn::save_model(result.model, train_out);
      manifest.outputs.push_back(train_out);
      if (!train_curve.empty()) {
        std::ofstream f(train_curve, std::ios::binary);
        if (!f) throw IoError("train: cannot open '" + train_curve + "'");
        f << "epoch,train_loss,test_loss,test_accuracy\n";
        for (const auto& e : result.curve)
          f << e.epoch << "," << detail::fmt(e.train_loss) << ","
            << detail::fmt(e.test_loss) << "," << detail::fmt(e.test_accuracy) << "\n";
        manifest.outputs.push_back(train_curve);
      }
      out << nlohmann::json{
                 {"train", {{"loss", result.train.loss}, {"accuracy", result.train.accuracy}}},
                 {"test", {{"loss", result.test.loss}, {"accuracy", result.test.accuracy}}}}
                 .dump(2)
          << "\n";
    } else if (c_eval->parsed()) {
      manifest.command = "eval";
      const auto model = nn::load_model(eval_model);
      const auto [meta, samples] = read_dataset(eval_data);
      const auto m = nn::evaluate(model, samples);
      out << nlohmann::json{{"loss", m.loss}, {"accuracy", m.accuracy}}.dump(2) << "\n";
    } else if (c_sim->parsed()) {
      manifest.command = "simulate";
      const auto model = nn::load_model(sim_model);
      const auto x = detail::parse_doubles(sim_x);
      sim_cfg.seed = derive_seed(seed, "simulate");
      sim_cfg.noise_scaling = sim_scaling == "step" ? NoiseScaling::per_step
                                                    : NoiseScaling::sqrt_dt;
      const auto rec = simulate_closed_loop(model, x, sim_cfg);
      std::ofstream file;
      std::ostream* os = &out;
      if (!sim_out.empty()) {
        file.open(sim_out, std::ios::binary);
        if (!file) throw IoError("simulate: cannot open '" + sim_out + "'");
        os = &file;
        manifest.outputs.push_back(sim_out);
      }
      *os << "tau";
      for (std::size_t i = 1; i <= x.size(); ++i) *os << ",y" << i;
      *os << ",u,source\n";
      for (const auto& p : rec.points) {
        *os << detail::fmt(p.tau);
        for (double v : p.y) *os << "," << detail::fmt(v);
        *os << "," << p.u << "," << (p.fallback ? "fallback" : "network") << "\n";
      }
      nlohmann::json j{{"fallback_fraction", rec.fallback_fraction},
                       {"steps", rec.points.size()}};
      if (rec.T_NN.has_value())
        j["T_NN"] = *rec.T_NN;
      else
        j["T_NN"] = nullptr;
      out << j.dump(2) << "\n";
    } else if (c_mc->parsed()) {
      manifest.command = "montecarlo";
      const auto x = detail::parse_doubles(mc_x);
      mc_cfg.seed = derive_seed(seed, "montecarlo");
      mc_cfg.noise_scaling =
          mc_scaling == "step" ? NoiseScaling::per_step : NoiseScaling::sqrt_dt;
      ControllerMode mode;
      if (mc_mode == "open")
        mode = ControllerMode::open_loop;
      else if (mc_mode == "net")
        mode = ControllerMode::network;
      else if (mc_mode == "net-fallback")
        mode = ControllerMode::network_fallback;
      else
        throw ParseError("montecarlo: --mode must be open|net|net-fallback");
      std::optional<nn::MlpModel> model;
      if (mode != ControllerMode::open_loop) {
        if (mc_model.empty()) throw ParseError("montecarlo: network modes need --model");
        model = nn::load_model(mc_model);
      }
      const auto stats =
          monte_carlo(mode, model ? &*model : nullptr, x, mc_cfg, mc_runs, threads);
      std::ofstream file;
      std::ostream* os = &out;
      if (!mc_out.empty()) {
        file.open(mc_out, std::ios::binary);
        if (!file) throw IoError("montecarlo: cannot open '" + mc_out + "'");
        os = &file;
        manifest.outputs.push_back(mc_out);
      }
      *os << "tau";
      for (std::size_t i = 1; i <= x.size(); ++i) *os << ",mean_y" << i;
      for (std::size_t i = 1; i <= x.size(); ++i) *os << ",var_y" << i;
      *os << "\n";
      for (std::size_t s = 0; s < stats.taus.size(); ++s) {
        *os << detail::fmt(stats.taus[s]);
        for (double v : stats.mean[s]) *os << "," << detail::fmt(v);
        for (double v : stats.variance[s]) *os << "," << detail::fmt(v);
        *os << "\n";
      }
      out << nlohmann::json{{"mean_final_norm", stats.mean_final_norm},
                            {"runs", stats.runs}}
                 .dump(2)
          << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  manifest.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    manifest.write(out_dir);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args), out, err);
}

}  // namespace cli
}  // namespace topt
