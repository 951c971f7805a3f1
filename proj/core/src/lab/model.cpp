#include "semtarget/lab/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "lab/rng.hpp"
#include "semtarget/error.hpp"

namespace semtarget::lab {

std::string_view to_string(Architecture a) {
  return a == Architecture::kLinearSoftmax ? "linear" : "mlp";
}

Architecture parse_architecture(std::string_view s) {
  if (s == "linear" || s == "linear-softmax") return Architecture::kLinearSoftmax;
  if (s == "mlp" || s == "tanh-mlp") return Architecture::kTanhMlp;
  throw ValidationError("unknown architecture '" + std::string(s) + "' (expected linear or mlp)");
}

ToyClassifier::ToyClassifier(Architecture arch, std::size_t input_dim, std::size_t classes,
                             std::size_t hidden)
    : arch_(arch), input_dim_(input_dim), classes_(classes), hidden_(hidden) {
  if (input_dim == 0 || classes < 2) throw ValidationError("classifier needs d >= 1 and C >= 2");
  if (arch == Architecture::kTanhMlp) {
    if (hidden == 0) throw ValidationError("mlp needs a positive hidden width");
    hidden_w_.assign(hidden * input_dim, 0.0);
    hidden_b_.assign(hidden, 0.0);
  } else {
    hidden_ = 0;
  }
  out_w_.assign(classes * final_input_dim(), 0.0);
  out_b_.assign(classes, 0.0);
}

std::vector<double> ToyClassifier::hidden_activations(std::span<const double> x) const {
  std::vector<double> h(hidden_);
  for (std::size_t u = 0; u < hidden_; ++u) {
    double a = hidden_b_[u];
    const double* w = &hidden_w_[u * input_dim_];
    for (std::size_t k = 0; k < input_dim_; ++k) a += w[k] * x[k];
    h[u] = std::tanh(a);
  }
  return h;
}

std::vector<double> ToyClassifier::logits(std::span<const double> x) const {
  if (x.size() != input_dim_) throw ValidationError("input dimension mismatch");
  std::vector<double> h;
  std::span<const double> features = x;
  if (arch_ == Architecture::kTanhMlp) {
    h = hidden_activations(x);
    features = h;
  }
  const std::size_t f = final_input_dim();
  std::vector<double> z(classes_);
  for (std::size_t c = 0; c < classes_; ++c) {
    double a = out_b_[c];
    const double* w = &out_w_[c * f];
    for (std::size_t k = 0; k < f; ++k) a += w[k] * features[k];
    z[c] = a;
  }
  return z;
}

std::size_t ToyClassifier::predict(std::span<const double> x) const {
  const auto z = logits(x);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

std::vector<double> ToyClassifier::input_gradient(std::span<const double> x,
                                                  std::span<const double> dlogits) const {
  if (x.size() != input_dim_ || dlogits.size() != classes_)
    throw ValidationError("gradient shape mismatch");
  const std::size_t f = final_input_dim();
  std::vector<double> dfeat(f, 0.0);
  for (std::size_t c = 0; c < classes_; ++c) {
    if (dlogits[c] == 0.0) continue;
    const double* w = &out_w_[c * f];
    for (std::size_t k = 0; k < f; ++k) dfeat[k] += dlogits[c] * w[k];
  }
  if (arch_ == Architecture::kLinearSoftmax) return dfeat;

  const auto h = hidden_activations(x);
  std::vector<double> dx(input_dim_, 0.0);
  for (std::size_t u = 0; u < hidden_; ++u) {
    const double da = dfeat[u] * (1.0 - h[u] * h[u]);
    const double* w = &hidden_w_[u * input_dim_];
    for (std::size_t k = 0; k < input_dim_; ++k) dx[k] += da * w[k];
  }
  return dx;
}

EmbeddingSet ToyClassifier::templates(std::string model_name) const {
  EmbeddingSet set;
  set.source_name = std::move(model_name);
  set.dim = final_input_dim();
  set.attributes["architecture"] = "\"" + std::string(to_string(arch_)) + "\"";
  for (std::size_t c = 0; c < classes_; ++c) {
    const auto first = out_w_.begin() + static_cast<std::ptrdiff_t>(c * set.dim);
    set.entries.push_back(EmbeddingEntry{c, "class_" + std::to_string(c),
                                         std::vector<double>(first, first + static_cast<std::ptrdiff_t>(set.dim))});
  }
  return set;
}

namespace {

std::vector<double> softmax(std::span<const double> z) {
  const double peak = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double total = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) total += p[c] = std::exp(z[c] - peak);
  for (double& v : p) v /= total;
  return p;
}

double log_sum_exp(std::span<const double> z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - peak);
  return peak + std::log(total);
}

// dL/dz for each loss.
std::vector<double> logit_gradient(std::span<const double> z, const LossSpec& spec) {
  std::vector<double> dz(z.size(), 0.0);
  if (spec.label >= z.size()) throw ValidationError("loss label out of range");
  if (spec.kind == LossSpec::Kind::kCrossEntropy) {
    dz = softmax(z);
    dz[spec.label] -= 1.0;
    return dz;
  }
  std::size_t rival = spec.label == 0 ? 1 : 0;
  for (std::size_t j = 0; j < z.size(); ++j)
    if (j != spec.label && z[j] > z[rival]) rival = j;
  if (z[rival] - z[spec.label] > -spec.kappa) {
    dz[rival] = 1.0;
    dz[spec.label] = -1.0;
  }
  return dz;
}

}  // namespace

double loss(const ToyClassifier& model, std::span<const double> x, const LossSpec& spec) {
  const auto z = model.logits(x);
  if (spec.label >= z.size()) throw ValidationError("loss label out of range");
  if (spec.kind == LossSpec::Kind::kCrossEntropy) return log_sum_exp(z) - z[spec.label];
  double rival = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < z.size(); ++j)
    if (j != spec.label) rival = std::max(rival, z[j]);
  return std::max(rival - z[spec.label], -spec.kappa);
}

std::vector<double> grad_input(const ToyClassifier& model, std::span<const double> x, const LossSpec& spec) {
  const auto z = model.logits(x);
  return model.input_gradient(x, logit_gradient(z, spec));
}

double accuracy(const ToyClassifier& model, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : samples) hits += model.predict(s.x) == s.label;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

TrainedModel train(const SyntheticTask& task, const TrainConfig& config) {
  if (task.train.empty()) throw ValidationError("no training samples");
  if (config.learning_rate <= 0.0 || config.steps == 0)
    throw ValidationError("learning_rate and steps must be positive");
  const std::size_t d = task.dim();
  const std::size_t classes = task.classes();
  ToyClassifier model(config.architecture, d, classes, config.hidden);
  const bool mlp = config.architecture == Architecture::kTanhMlp;
  const std::size_t f = mlp ? config.hidden : d;

  if (mlp) {
    std::mt19937_64 rng(detail::derive_seed(config.seed, 0x6d6c70));
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
    for (double& w : model.hidden_weights()) w = gauss(rng);
    // Centre the pre-activations on the [0,1] input box.
    for (std::size_t u = 0; u < config.hidden; ++u) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += model.hidden_weights()[u * d + k];
      model.hidden_bias()[u] = -0.5 * s;
    }
    std::normal_distribution<double> out_gauss(0.0, 0.01);
    for (double& w : model.output_weights()) w = out_gauss(rng);
  }

  const double inv_n = 1.0 / static_cast<double>(task.train.size());
  std::vector<double> g_out(model.output_weights().size());
  std::vector<double> g_out_b(classes);
  std::vector<double> g_hid(model.hidden_weights().size());
  std::vector<double> g_hid_b(model.hidden_bias().size());

  for (std::size_t step = 0; step < config.steps; ++step) {
    std::fill(g_out.begin(), g_out.end(), 0.0);
    std::fill(g_out_b.begin(), g_out_b.end(), 0.0);
    std::fill(g_hid.begin(), g_hid.end(), 0.0);
    std::fill(g_hid_b.begin(), g_hid_b.end(), 0.0);

    for (const auto& s : task.train) {
      std::vector<double> features = s.x;
      std::vector<double> h;
      if (mlp) {
        h.resize(config.hidden);
        for (std::size_t u = 0; u < config.hidden; ++u) {
          double a = model.hidden_bias()[u];
          for (std::size_t k = 0; k < d; ++k) a += model.hidden_weights()[u * d + k] * s.x[k];
          h[u] = std::tanh(a);
        }
        features = h;
      }
      auto dz = softmax(model.logits(s.x));
      dz[s.label] -= 1.0;
      std::vector<double> dfeat(mlp ? f : 0, 0.0);
      for (std::size_t c = 0; c < classes; ++c) {
        g_out_b[c] += dz[c];
        for (std::size_t k = 0; k < f; ++k) {
          g_out[c * f + k] += dz[c] * features[k];
          if (mlp) dfeat[k] += dz[c] * model.output_weights()[c * f + k];
        }
      }
      if (mlp) {
        for (std::size_t u = 0; u < config.hidden; ++u) {
          const double da = dfeat[u] * (1.0 - h[u] * h[u]);
          g_hid_b[u] += da;
          for (std::size_t k = 0; k < d; ++k) g_hid[u * d + k] += da * s.x[k];
        }
      }
    }

    const double lr = config.learning_rate;
    auto& w = model.output_weights();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * (g_out[i] * inv_n + config.weight_decay * w[i]);
    for (std::size_t c = 0; c < classes; ++c) model.output_bias()[c] -= lr * g_out_b[c] * inv_n;
    if (mlp) {
      auto& u = model.hidden_weights();
      for (std::size_t i = 0; i < u.size(); ++i)
        u[i] -= lr * (g_hid[i] * inv_n + config.weight_decay * u[i]);
      for (std::size_t i = 0; i < g_hid_b.size(); ++i) model.hidden_bias()[i] -= lr * g_hid_b[i] * inv_n;
    }
  }

  const double acc = accuracy(model, task.test);
  if (acc < config.accuracy_gate) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "classifier test accuracy %.4f is below the %.4f gate", acc,
                  config.accuracy_gate);
    throw QualityGateError(buf);
  }
  return TrainedModel{std::move(model), acc};
}

}  // namespace semtarget::lab
