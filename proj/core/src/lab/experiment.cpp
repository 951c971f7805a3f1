#include "semtarget/lab/experiment.hpp"

#include "lab/rng.hpp"
#include "semtarget/error.hpp"

namespace semtarget::lab {

PredictionLog run_experiment(const SyntheticTask& task, const ToyClassifier& model,
                             const TargetTable& table, std::span<const AttackConfig> attacks,
                             const ExperimentOptions& options) {
  if (table.size() != task.classes() || model.classes() != task.classes())
    throw ValidationError("target table has " + std::to_string(table.size()) +
                          " classes but the task has " + std::to_string(task.classes()));
  for (const auto& cfg : attacks) cfg.validate();

  PredictionLog log;
  log.reserve(task.test.size() * attacks.size() * options.variants.size());
  for (const auto& sample : task.test) {
    const std::size_t pre = model.predict(sample.x);
    const std::uint64_t sample_salt = detail::hash_text(sample.id);
    for (const auto& cfg : attacks) {
      const std::string tag = cfg.tag();
      for (Variant variant : options.variants) {
        const std::size_t target = table.rows[sample.label].target(variant);
        // Per-sample stream so results do not depend on evaluation order.
        const std::uint64_t stream = detail::derive_seed(
            cfg.seed, sample_salt ^ detail::hash_text(tag) ^ (variant == Variant::kMostSimilar ? 0x4d53 : 0x4c53));
        const auto adv = run_attack(model, sample.x, target, cfg, stream);
        log.push_back(PredictionRecord{sample.id, sample.label, pre, model.predict(adv), target, tag,
                                       table.source_name, variant, options.model_name});
      }
    }
  }
  return log;
}

}  // namespace semtarget::lab
