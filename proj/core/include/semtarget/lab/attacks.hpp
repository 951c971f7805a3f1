#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semtarget/lab/model.hpp"

namespace semtarget::lab {

enum class AttackKind { kFgsm, kPgd, kMim, kSpsa, kCw };

std::string_view to_string(AttackKind k);  // "fgsm", "pgd", "mim", "spsa", "cw"
AttackKind parse_attack_kind(std::string_view s);

struct AttackConfig {
  AttackKind kind = AttackKind::kFgsm;
  std::string name;  // tag written to prediction logs; defaults to to_string(kind)
  double epsilon = 0.05;
  double step_size = 0.01;
  std::size_t iterations = 10;
  double mim_decay = 1.0;
  std::size_t spsa_samples = 32;
  double spsa_perturbation = 0.01;
  double cw_confidence = 0.0;
  double cw_penalty = 1.0;
  double cw_learning_rate = 0.01;
  std::size_t cw_iterations = 100;
  std::uint64_t seed = 0;

  std::string tag() const { return name.empty() ? std::string(to_string(kind)) : name; }
  /// Throws ValidationError when a parameter is out of its domain.
  void validate() const;

  static AttackConfig fgsm(double epsilon);
  static AttackConfig pgd(double epsilon, double step_size, std::size_t iterations);
  static AttackConfig mim(double epsilon, double step_size, std::size_t iterations, double decay);
  static AttackConfig spsa(double epsilon, double step_size, std::size_t iterations,
                           std::size_t samples, double perturbation);
  static AttackConfig cw(double penalty, double confidence, double learning_rate, std::size_t iterations);
};

/// Clips x into the l-inf ball of radius epsilon around origin and into [0,1].
void project(std::span<double> x, std::span<const double> origin, double epsilon);

// All targeted attacks descend the loss toward `target`.

/// x' = clip(x - eps * sign(grad CE(x, target))).
std::vector<double> fgsm(const ToyClassifier& model, std::span<const double> x, std::size_t target,
                         const AttackConfig& cfg);

/// Iterated sign steps on targeted CE from x, projected after every step.
std::vector<double> pgd(const ToyClassifier& model, std::span<const double> x, std::size_t target,
                        const AttackConfig& cfg);

/// Sign steps on the accumulator g <- decay * g + grad / |grad|_1.
std::vector<double> mim(const ToyClassifier& model, std::span<const double> x, std::size_t target,
                        const AttackConfig& cfg);

/// Gradient-free estimate of grad CE(x, target) from `samples` symmetric
/// Rademacher probes of size `perturbation`. Forward passes only.
std::vector<double> spsa_gradient(const ToyClassifier& model, std::span<const double> x,
                                  std::size_t target, std::size_t samples, double perturbation,
                                  std::mt19937_64& rng);

/// PGD-style sign steps on the SPSA estimate.
std::vector<double> spsa(const ToyClassifier& model, std::span<const double> x, std::size_t target,
                         const AttackConfig& cfg, std::uint64_t stream_seed);

struct CwResult {
  std::vector<double> x;
  bool reached = false;
  double objective = 0.0;
  // Objective of every iterate that improved on the best so far, starting
  // with the unperturbed input.
  std::vector<double> accepted_objectives;
};

/// Simplified Carlini-Wagner: plain gradient descent on
/// c * |delta|_2^2 + max(max_{j != t} z_j - z_t, -kappa), with x + delta kept
/// inside [0,1]. Returns the iterate with the lowest objective.
CwResult cw(const ToyClassifier& model, std::span<const double> x, std::size_t target,
            const AttackConfig& cfg);

/// Dispatches on cfg.kind. stream_seed feeds SPSA's probes.
std::vector<double> run_attack(const ToyClassifier& model, std::span<const double> x,
                               std::size_t target, const AttackConfig& cfg, std::uint64_t stream_seed);

}  // namespace semtarget::lab
