#pragma once

#include <span>
#include <string>
#include <vector>

#include "semtarget/lab/attacks.hpp"
#include "semtarget/lab/task.hpp"
#include "semtarget/metrics.hpp"
#include "semtarget/targets.hpp"

namespace semtarget::lab {

struct ExperimentOptions {
  std::string model_name = "linear";
  std::vector<Variant> variants{Variant::kMostSimilar, Variant::kLeastSimilar};
};

/// Attacks every test sample with every attack, once per variant, toward the
/// table's target for the sample's ground truth. Record order is
/// sample-major, then attack, then variant.
PredictionLog run_experiment(const SyntheticTask& task, const ToyClassifier& model,
                             const TargetTable& table, std::span<const AttackConfig> attacks,
                             const ExperimentOptions& options = {});

}  // namespace semtarget::lab
