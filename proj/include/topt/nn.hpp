#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "topt/dataset.hpp"
#include "topt/rng.hpp"

namespace topt {
namespace nn {

/// Feedforward binary classifier: tanh hidden layers, sigmoid output head.
/// weights[m] is row-major (layer_dims[m+1] x layer_dims[m]).
struct MlpModel {
  std::vector<std::size_t> layer_dims;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::string hidden_activation = "tanh";

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t num_layers() const { return layer_dims.size() - 1; }
};

namespace detail {

inline double sigmoid(double z) {
  // Clamp keeps the output strictly inside (0,1) in double precision.
  z = std::clamp(z, -36.0, 36.0);
  return 1.0 / (1.0 + std::exp(-z));
}

inline void affine(const std::vector<double>& w, const std::vector<double>& b,
                   const std::vector<double>& in, std::vector<double>& out) {
  const std::size_t rows = b.size();
  const std::size_t cols = in.size();
  out.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b[r];
    const double* wr = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * in[c];
    out[r] = acc;
  }
}

}  // namespace detail

inline void validate_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw DimensionError("mlp: need at least input and output layers");
  if (dims.back() != 1) throw DimensionError("mlp: output layer must have one unit");
  for (std::size_t d : dims)
    if (d == 0) throw DimensionError("mlp: zero-width layer");
}

/// Symmetric uniform init scaled by 1/sqrt(fan-in), seeded.
inline MlpModel init_model(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  validate_dims(dims);
  MlpModel m;
  m.layer_dims = dims;
  Rng rng(derive_seed(seed, "mlp-init"));
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    std::vector<double> w(dims[l + 1] * dims[l]);
    for (auto& v : w) v = rng.uniform(-scale, scale);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(dims[l + 1], 0.0);
  }
  return m;
}

/// Probability that the optimal control at z is +1; strictly in (0,1).
inline double forward(const MlpModel& model, const std::vector<double>& z) {
  if (z.size() != model.input_dim()) throw DimensionError("forward: input size mismatch");
  std::vector<double> a = z, next;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    detail::affine(model.weights[l], model.biases[l], a, next);
    if (l + 1 < model.num_layers()) {
      for (auto& v : next) v = std::tanh(v);
    } else {
      for (auto& v : next) v = detail::sigmoid(v);
    }
    std::swap(a, next);
  }
  return a[0];
}

/// Label by the 0.5 threshold (ties go to +1) and distance of the
/// probability from 0.5 as the confidence.
inline std::pair<int, double> classify(const MlpModel& model,
                                       const std::vector<double>& z) {
  const double p = forward(model, z);
  return p >= 0.5 ? std::make_pair(+1, p - 0.5) : std::make_pair(-1, 0.5 - p);
}

/// Mean binary cross-entropy; probabilities are clipped to
/// [1e-12, 1 - 1e-12] before the logarithms.
inline double bce_loss_probability(double p, int label) {
  const double clipped = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return label == 1 ? -std::log(clipped) : -std::log(1.0 - clipped);
}

template <class SampleRange>
double bce_loss(const MlpModel& model, const SampleRange& samples) {
  if (samples.empty()) throw DegenerateDataError("bce_loss: empty sample set");
  double acc = 0.0;
  for (const auto& s : samples) acc += bce_loss_probability(forward(model, s.z), s.u);
  return acc / static_cast<double>(samples.size());
}

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

inline Gradients zero_gradients(const MlpModel& model) {
  Gradients g;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    g.weights.emplace_back(model.weights[l].size(), 0.0);
    g.biases.emplace_back(model.biases[l].size(), 0.0);
  }
  return g;
}

/// Reverse-mode gradients of the mean BCE over the batch.
template <class SampleRange>
Gradients gradients(const MlpModel& model, const SampleRange& batch) {
  if (batch.empty()) throw DegenerateDataError("gradients: empty batch");
  Gradients g = zero_gradients(model);
  const std::size_t layers = model.num_layers();

  std::vector<std::vector<double>> act(layers + 1);
  std::vector<double> delta, delta_prev;
  for (const auto& s : batch) {
    act[0] = s.z;
    for (std::size_t l = 0; l < layers; ++l) {
      detail::affine(model.weights[l], model.biases[l], act[l], act[l + 1]);
      if (l + 1 < layers) {
        for (auto& v : act[l + 1]) v = std::tanh(v);
      } else {
        for (auto& v : act[l + 1]) v = detail::sigmoid(v);
      }
    }
    const double lambda = s.u == 1 ? 1.0 : 0.0;
    delta.assign(1, act[layers][0] - lambda);  // d BCE / d pre-activation
    for (std::size_t l = layers; l-- > 0;) {
      const auto& a_in = act[l];
      auto& gw = g.weights[l];
      for (std::size_t r = 0; r < delta.size(); ++r) {
        g.biases[l][r] += delta[r];
        double* gwr = gw.data() + r * a_in.size();
        for (std::size_t c = 0; c < a_in.size(); ++c) gwr[c] += delta[r] * a_in[c];
      }
      if (l == 0) break;
      delta_prev.assign(a_in.size(), 0.0);
      for (std::size_t r = 0; r < delta.size(); ++r) {
        const double* wr = model.weights[l].data() + r * a_in.size();
        for (std::size_t c = 0; c < a_in.size(); ++c) delta_prev[c] += wr[c] * delta[r];
      }
      for (std::size_t c = 0; c < a_in.size(); ++c)
        delta_prev[c] *= 1.0 - a_in[c] * a_in[c];  // tanh'
      std::swap(delta, delta_prev);
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& w : g.weights)
    for (auto& v : w) v *= inv;
  for (auto& b : g.biases)
    for (auto& v : b) v *= inv;
  return g;
}

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double split_fraction = 0.9;  // train share; remainder is the test split
  std::uint64_t seed = 0;
};

struct AdamState {
  Gradients m;
  Gradients v;
  std::int64_t step = 0;
};

inline AdamState init_adam(const MlpModel& model) {
  return AdamState{zero_gradients(model), zero_gradients(model), 0};
}

/// One Adam update with bias correction; deterministic.
inline void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
                      const TrainConfig& cfg) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& theta, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps_adam);
    }
  };
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    update(model.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l]);
    update(model.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l]);
  }
}

struct Metrics {
  double loss = 0.0;
  double accuracy = 0.0;
};

template <class SampleRange>
Metrics evaluate(const MlpModel& model, const SampleRange& samples) {
  if (samples.empty()) throw DegenerateDataError("evaluate: empty sample set");
  double loss = 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    const double p = forward(model, s.z);
    loss += bce_loss_probability(p, s.u);
    const int label = p >= 0.5 ? +1 : -1;
    if (label == s.u) ++correct;
  }
  return Metrics{loss / static_cast<double>(samples.size()),
                 static_cast<double>(correct) / static_cast<double>(samples.size())};
}

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
};

struct TrainResult {
  MlpModel model;
  Metrics train;
  Metrics test;
  std::vector<EpochLog> curve;
};

/// Seeded shuffle-split, mini-batch Adam training, per-epoch metrics on
/// both splits. Deterministic for a fixed config.
inline TrainResult train(const std::vector<Sample>& samples,
                         const std::vector<std::size_t>& layer_dims,
                         const TrainConfig& cfg) {
  if (samples.empty()) throw DegenerateDataError("train: empty dataset");
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0))
    throw Error("train: split_fraction must be in (0,1)");
  bool pos = false, neg = false;
  for (const auto& s : samples) (s.u == 1 ? pos : neg) = true;
  if (!pos || !neg)
    throw DegenerateDataError("train: both labels must be present");
  validate_dims(layer_dims);
  if (layer_dims.front() != samples.front().z.size())
    throw DimensionError("train: input layer width does not match the data");

  // Fisher-Yates with explicit bound mapping keeps the split reproducible
  // across standard libraries.
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng(derive_seed(cfg.seed, "split"));
  for (std::size_t i = order.size(); i-- > 1;)
    std::swap(order[i], order[split_rng.below(i + 1)]);

  std::size_t n_train = static_cast<std::size_t>(
      std::llround(cfg.split_fraction * static_cast<double>(samples.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, samples.size() - 1);

  std::vector<Sample> train_set, test_set;
  train_set.reserve(n_train);
  test_set.reserve(samples.size() - n_train);
  for (std::size_t i = 0; i < samples.size(); ++i)
    (i < n_train ? train_set : test_set).push_back(samples[order[i]]);

  TrainResult result;
  result.model = init_model(layer_dims, cfg.seed);
  AdamState adam = init_adam(result.model);
  Rng epoch_rng(derive_seed(cfg.seed, "epochs"));

  std::vector<std::size_t> idx(train_set.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<Sample> batch;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = idx.size(); i-- > 1;)
      std::swap(idx[i], idx[epoch_rng.below(i + 1)]);
    for (std::size_t start = 0; start < idx.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, idx.size());
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[idx[i]]);
      const Gradients g = gradients(result.model, batch);
      adam_step(result.model, g, adam, cfg);
    }
    const Metrics tr = evaluate(result.model, train_set);
    const Metrics te = evaluate(result.model, test_set);
    result.curve.push_back(EpochLog{epoch, tr.loss, te.loss, te.accuracy});
    result.train = tr;
    result.test = te;
  }
  return result;
}

inline void save_model(const MlpModel& model, const std::string& path) {
  nlohmann::json j{{"format", 1},
                   {"layer_dims", model.layer_dims},
                   {"hidden_activation", model.hidden_activation},
                   {"weights", model.weights},
                   {"biases", model.biases}};
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("save_model: cannot open '" + path + "'");
  file << j.dump(2) << "\n";
  if (!file.good()) throw IoError("save_model: write failed for '" + path + "'");
}

inline MlpModel load_model(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("load_model: cannot open '" + path + "'");
  MlpModel m;
  try {
    const auto j = nlohmann::json::parse(file);
    if (j.at("format").get<int>() != 1)
      throw ParseError("load_model: unsupported format in '" + path + "'");
    j.at("layer_dims").get_to(m.layer_dims);
    j.at("hidden_activation").get_to(m.hidden_activation);
    j.at("weights").get_to(m.weights);
    j.at("biases").get_to(m.biases);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_model: bad model file '" + path + "': " + e.what());
  }
  validate_dims(m.layer_dims);
  return m;
}

}  // namespace nn
}  // namespace topt
