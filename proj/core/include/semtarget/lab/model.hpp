#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semtarget/embedding.hpp"
#include "semtarget/lab/task.hpp"

namespace semtarget::lab {

enum class Architecture { kLinearSoftmax, kTanhMlp };

std::string_view to_string(Architecture a);  // "linear" / "mlp"
Architecture parse_architecture(std::string_view s);

/// Small differentiable classifier over [0,1]^d inputs.
///
/// linear: z = W x + b
/// mlp:    z = V tanh(U x + c) + b
///
/// Weights are row-major. The final layer (W or V) provides the class
/// templates used by the dissimilarity metric.
class ToyClassifier {
 public:
  ToyClassifier(Architecture arch, std::size_t input_dim, std::size_t classes, std::size_t hidden = 0);

  Architecture architecture() const { return arch_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t classes() const { return classes_; }
  std::size_t hidden() const { return hidden_; }

  std::vector<double> logits(std::span<const double> x) const;
  std::size_t predict(std::span<const double> x) const;

  /// Backpropagates dL/dz through the network to the input.
  std::vector<double> input_gradient(std::span<const double> x, std::span<const double> dlogits) const;

  /// Final-layer weight rows as an `.embjsonl`-compatible set.
  EmbeddingSet templates(std::string model_name) const;

  // Parameter access for training and hand-set tests.
  std::vector<double>& hidden_weights() { return hidden_w_; }
  std::vector<double>& hidden_bias() { return hidden_b_; }
  std::vector<double>& output_weights() { return out_w_; }
  std::vector<double>& output_bias() { return out_b_; }
  const std::vector<double>& output_weights() const { return out_w_; }

 private:
  std::vector<double> hidden_activations(std::span<const double> x) const;
  std::size_t final_input_dim() const { return arch_ == Architecture::kLinearSoftmax ? input_dim_ : hidden_; }

  Architecture arch_;
  std::size_t input_dim_;
  std::size_t classes_;
  std::size_t hidden_;
  std::vector<double> hidden_w_;  // hidden_ x input_dim_
  std::vector<double> hidden_b_;
  std::vector<double> out_w_;     // classes_ x final_input_dim()
  std::vector<double> out_b_;
};

struct TrainConfig {
  Architecture architecture = Architecture::kLinearSoftmax;
  std::size_t hidden = 32;
  double learning_rate = 1.0;
  std::size_t steps = 1000;
  double weight_decay = 0.01;
  // Minimum test accuracy; train() throws QualityGateError below it.
  double accuracy_gate = 0.95;
  std::uint64_t seed = 7;
};

struct TrainedModel {
  ToyClassifier model;
  double test_accuracy = 0.0;
};

/// Full-batch gradient descent on mean cross-entropy for a fixed number of
/// steps. Deterministic given config.seed.
TrainedModel train(const SyntheticTask& task, const TrainConfig& config);

double accuracy(const ToyClassifier& model, std::span<const Sample> samples);

struct LossSpec {
  enum class Kind { kCrossEntropy, kCwMargin };
  Kind kind = Kind::kCrossEntropy;
  std::size_t label = 0;  // class the loss pulls toward
  double kappa = 0.0;     // CW confidence

  static LossSpec cross_entropy(std::size_t label) { return {Kind::kCrossEntropy, label, 0.0}; }
  static LossSpec cw_margin(std::size_t target, double kappa) { return {Kind::kCwMargin, target, kappa}; }
};

/// Cross-entropy: -log softmax(z)_label.
/// CW margin: max(max_{j != t} z_j - z_t, -kappa).
double loss(const ToyClassifier& model, std::span<const double> x, const LossSpec& spec);

/// Analytic gradient of `loss` with respect to the input.
std::vector<double> grad_input(const ToyClassifier& model, std::span<const double> x, const LossSpec& spec);

}  // namespace semtarget::lab
