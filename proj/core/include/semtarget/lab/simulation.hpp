#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semtarget/lab/attacks.hpp"
#include "semtarget/lab/model.hpp"
#include "semtarget/lab/task.hpp"
#include "semtarget/metrics.hpp"

namespace semtarget::lab {

/// Everything needed to replay a desk-scale run. Serializes to a canonical
/// `key = value` text form that `apply` reads back.
struct SimulationConfig {
  std::uint64_t seed = 7;
  TaskConfig task;
  TrainConfig train;
  AttackConfig fgsm = AttackConfig::fgsm(0.05);
  AttackConfig pgd = AttackConfig::pgd(0.3, 0.025, 40);
  AttackConfig mim = AttackConfig::mim(0.05, 0.01, 10, 1.0);
  AttackConfig spsa = AttackConfig::spsa(0.05, 0.01, 10, 32, 0.01);
  AttackConfig cw = AttackConfig::cw(4.0, 0.0, 0.01, 100);
  std::vector<AttackKind> attacks{AttackKind::kFgsm, AttackKind::kPgd, AttackKind::kMim,
                                  AttackKind::kSpsa, AttackKind::kCw};
  std::vector<Variant> variants{Variant::kMostSimilar, Variant::kLeastSimilar};
  // Similarity sources: wup, means, means-noisy, random.
  std::vector<std::string> sources{"wup", "means", "means-noisy", "random"};
  double noisy_source_sd = 0.15;

  /// Sets one key; throws ValidationError for unknown keys or bad values.
  void apply(std::string_view key, std::string_view value);
  /// Applies every `key = value` line; `#` starts a comment.
  void apply_text(std::string_view text);
  std::string to_text() const;

  /// Propagates `seed` into task, training and attack seeds.
  void set_seed(std::uint64_t value);

  std::vector<AttackConfig> selected_attacks() const;
};

struct SourceResult {
  std::string name;
  std::optional<EmbeddingSet> embeddings;  // absent for the taxonomy source
  TargetTable table;
  double static_dm_ms = 0.0;
  double static_dm_ls = 0.0;
};

struct SimulationResult {
  SimulationConfig config;
  SyntheticTask task;
  TrainedModel trained;
  EmbeddingSet templates;
  std::vector<SourceResult> sources;
  PredictionLog log;
  std::vector<MetricsReport> reports;
};

/// generate_task -> train -> build_targets per source -> run_experiment ->
/// report. Throws QualityGateError when the classifier misses its gate.
SimulationResult run_simulation(const SimulationConfig& config);

/// Static DM CSV: `source,variant,static_dm`, MS then LS for each table.
std::string write_static_dm_csv(const std::vector<SourceResult>& sources);

/// Writes the full artifact set into out_dir (created if needed) and returns
/// the relative paths written, in write order.
std::vector<std::string> write_simulation(const SimulationResult& result,
                                          const std::filesystem::path& out_dir);

}  // namespace semtarget::lab
