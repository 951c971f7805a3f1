#include "semtarget/lab/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "semtarget/error.hpp"

namespace semtarget::lab {

std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::kFgsm: return "fgsm";
    case AttackKind::kPgd: return "pgd";
    case AttackKind::kMim: return "mim";
    case AttackKind::kSpsa: return "spsa";
    case AttackKind::kCw: return "cw";
  }
  return "?";
}

AttackKind parse_attack_kind(std::string_view s) {
  if (s == "fgsm" || s == "fgm") return AttackKind::kFgsm;
  if (s == "pgd") return AttackKind::kPgd;
  if (s == "mim") return AttackKind::kMim;
  if (s == "spsa") return AttackKind::kSpsa;
  if (s == "cw") return AttackKind::kCw;
  throw ValidationError("unknown attack '" + std::string(s) + "'");
}

void AttackConfig::validate() const {
  auto fail = [&](const char* what) {
    throw ValidationError(tag() + ": " + what);
  };
  if (kind == AttackKind::kCw) {
    if (cw_iterations < 1) fail("cw_iterations must be >= 1");
    if (cw_penalty < 0.0) fail("cw_penalty must be >= 0");
    if (cw_learning_rate <= 0.0) fail("cw_learning_rate must be positive");
    return;
  }
  if (!(epsilon >= 0.0)) fail("epsilon must be >= 0");
  if (kind == AttackKind::kFgsm) return;
  if (iterations < 1) fail("iterations must be >= 1");
  if (!(step_size > 0.0)) fail("step_size must be positive");
  if (kind == AttackKind::kMim && mim_decay < 0.0) fail("mim_decay must be >= 0");
  if (kind == AttackKind::kSpsa) {
    if (spsa_samples < 1) fail("spsa_samples must be >= 1");
    if (!(spsa_perturbation > 0.0)) fail("spsa_perturbation must be positive");
  }
}

AttackConfig AttackConfig::fgsm(double epsilon) {
  AttackConfig c;
  c.kind = AttackKind::kFgsm;
  c.epsilon = epsilon;
  c.step_size = epsilon;
  c.iterations = 1;
  return c;
}

AttackConfig AttackConfig::pgd(double epsilon, double step_size, std::size_t iterations) {
  AttackConfig c;
  c.kind = AttackKind::kPgd;
  c.epsilon = epsilon;
  c.step_size = step_size;
  c.iterations = iterations;
  return c;
}

AttackConfig AttackConfig::mim(double epsilon, double step_size, std::size_t iterations, double decay) {
  AttackConfig c = pgd(epsilon, step_size, iterations);
  c.kind = AttackKind::kMim;
  c.mim_decay = decay;
  return c;
}

AttackConfig AttackConfig::spsa(double epsilon, double step_size, std::size_t iterations,
                                std::size_t samples, double perturbation) {
  AttackConfig c = pgd(epsilon, step_size, iterations);
  c.kind = AttackKind::kSpsa;
  c.spsa_samples = samples;
  c.spsa_perturbation = perturbation;
  return c;
}

AttackConfig AttackConfig::cw(double penalty, double confidence, double learning_rate,
                              std::size_t iterations) {
  AttackConfig c;
  c.kind = AttackKind::kCw;
  c.cw_penalty = penalty;
  c.cw_confidence = confidence;
  c.cw_learning_rate = learning_rate;
  c.cw_iterations = iterations;
  return c;
}

void project(std::span<double> x, std::span<const double> origin, double epsilon) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lo = std::max(0.0, origin[k] - epsilon);
    const double hi = std::min(1.0, origin[k] + epsilon);
    x[k] = std::clamp(x[k], lo, hi);
  }
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void sign_step(std::span<double> x, std::span<const double> direction, double step) {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] -= step * sign(direction[k]);
}

void check_target(const ToyClassifier& model, std::span<const double> x, std::size_t target) {
  if (x.size() != model.input_dim()) throw ValidationError("attack input has the wrong dimension");
  if (target >= model.classes()) throw ValidationError("attack target out of range");
}

}  // namespace

std::vector<double> fgsm(const ToyClassifier& model, std::span<const double> x, std::size_t target,
                         const AttackConfig& cfg) {
  check_target(model, x, target);
  std::vector<double> adv(x.begin(), x.end());
  const auto g = grad_input(model, x, LossSpec::cross_entropy(target));
  sign_step(adv, g, cfg.epsilon);
  project(adv, x, cfg.epsilon);
  return adv;
}

std::vector<double> pgd(const ToyClassifier& model, std::span<const double> x, std::size_t target,
                        const AttackConfig& cfg) {
  check_target(model, x, target);
  std::vector<double> adv(x.begin(), x.end());
  const auto spec = LossSpec::cross_entropy(target);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const auto g = grad_input(model, adv, spec);
    sign_step(adv, g, cfg.step_size);
    project(adv, x, cfg.epsilon);
  }
  return adv;
}

std::vector<double> mim(const ToyClassifier& model, std::span<const double> x, std::size_t target,
                        const AttackConfig& cfg) {
  check_target(model, x, target);
  std::vector<double> adv(x.begin(), x.end());
  std::vector<double> momentum(x.size(), 0.0);
  const auto spec = LossSpec::cross_entropy(target);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const auto g = grad_input(model, adv, spec);
    double l1 = 0.0;
    for (double v : g) l1 += std::abs(v);
    for (std::size_t k = 0; k < g.size(); ++k)
      momentum[k] = cfg.mim_decay * momentum[k] + (l1 > 0.0 ? g[k] / l1 : 0.0);
    sign_step(adv, momentum, cfg.step_size);
    project(adv, x, cfg.epsilon);
  }
  return adv;
}

std::vector<double> spsa_gradient(const ToyClassifier& model, std::span<const double> x,
                                  std::size_t target, std::size_t samples, double perturbation,
                                  std::mt19937_64& rng) {
  check_target(model, x, target);
  const auto spec = LossSpec::cross_entropy(target);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> estimate(x.size(), 0.0);
  std::vector<double> probe(x.size());
  std::vector<double> plus(x.size());
  std::vector<double> minus(x.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      probe[k] = coin(rng) ? 1.0 : -1.0;
      plus[k] = x[k] + perturbation * probe[k];
      minus[k] = x[k] - perturbation * probe[k];
    }
    const double slope = (loss(model, plus, spec) - loss(model, minus, spec)) / (2.0 * perturbation);
    for (std::size_t k = 0; k < x.size(); ++k) estimate[k] += slope * probe[k];
  }
  for (double& v : estimate) v /= static_cast<double>(samples);
  return estimate;
}

std::vector<double> spsa(const ToyClassifier& model, std::span<const double> x, std::size_t target,
                         const AttackConfig& cfg, std::uint64_t stream_seed) {
  check_target(model, x, target);
  std::mt19937_64 rng(stream_seed);
  std::vector<double> adv(x.begin(), x.end());
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const auto g = spsa_gradient(model, adv, target, cfg.spsa_samples, cfg.spsa_perturbation, rng);
    sign_step(adv, g, cfg.step_size);
    project(adv, x, cfg.epsilon);
  }
  return adv;
}

CwResult cw(const ToyClassifier& model, std::span<const double> x, std::size_t target,
            const AttackConfig& cfg) {
  check_target(model, x, target);
  const auto spec = LossSpec::cw_margin(target, cfg.cw_confidence);
  auto objective = [&](std::span<const double> candidate) {
    double dist = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) dist += (candidate[k] - x[k]) * (candidate[k] - x[k]);
    return cfg.cw_penalty * dist + loss(model, candidate, spec);
  };

  CwResult result;
  result.x.assign(x.begin(), x.end());
  result.objective = objective(result.x);
  result.accepted_objectives.push_back(result.objective);

  std::vector<double> current(x.begin(), x.end());
  for (std::size_t it = 0; it < cfg.cw_iterations; ++it) {
    const auto g = grad_input(model, current, spec);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double step = 2.0 * cfg.cw_penalty * (current[k] - x[k]) + g[k];
      current[k] = std::clamp(current[k] - cfg.cw_learning_rate * step, 0.0, 1.0);
    }
    const double value = objective(current);
    if (!std::isfinite(value)) break;
    if (value < result.objective) {
      result.objective = value;
      result.x = current;
      result.accepted_objectives.push_back(value);
    }
  }
  result.reached = model.predict(result.x) == target;
  return result;
}

std::vector<double> run_attack(const ToyClassifier& model, std::span<const double> x,
                               std::size_t target, const AttackConfig& cfg, std::uint64_t stream_seed) {
  switch (cfg.kind) {
    case AttackKind::kFgsm: return fgsm(model, x, target, cfg);
    case AttackKind::kPgd: return pgd(model, x, target, cfg);
    case AttackKind::kMim: return mim(model, x, target, cfg);
    case AttackKind::kSpsa: return spsa(model, x, target, cfg, stream_seed);
    case AttackKind::kCw: return cw(model, x, target, cfg).x;
  }
  throw ValidationError("unknown attack kind");
}

}  // namespace semtarget::lab
