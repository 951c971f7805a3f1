#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semtarget/embedding.hpp"
#include "semtarget/targets.hpp"

namespace semtarget {

/// One attacked image: labels before and after the attack plus the target
/// it was steered toward.
struct PredictionRecord {
  std::string image_id;
  std::size_t gt_index = 0;
  std::size_t pre_index = 0;
  std::size_t post_index = 0;
  std::size_t target_index = 0;
  std::string attack;
  std::string source;
  Variant variant = Variant::kMostSimilar;
  std::string model;  // optional in files; empty when absent

  bool operator==(const PredictionRecord&) const = default;
};

using PredictionLog = std::vector<PredictionRecord>;

/// `.predjsonl`: one JSON object per record.
PredictionLog load_prediction_log(std::string_view stream);
std::string serialize_prediction_log(std::span<const PredictionRecord> log);

/// Throws ValidationError if any index is outside [0, class_count).
void validate_log(std::span<const PredictionRecord> log, std::size_t class_count);

/// Class templates of the attacked model: row i is class i's final-layer
/// weight vector. Loaded from the same `.embjsonl` format as embeddings.
class ClassTemplates {
 public:
  explicit ClassTemplates(EmbeddingSet templates);

  const std::string& model_name() const { return set_.source_name; }
  std::size_t size() const { return set_.size(); }
  std::size_t dim() const { return set_.dim; }
  std::span<const double> row(std::size_t i) const { return set_.vector(i); }
  const EmbeddingSet& embeddings() const { return set_; }

  /// Rank of every class when all classes are ordered by descending cosine
  /// to template(gt). gt is rank 0; ties go to the lower index.
  std::vector<std::size_t> ranks_from(std::size_t gt) const;

 private:
  EmbeddingSet set_;
};

std::size_t template_rank(const ClassTemplates& ct, std::size_t gt, std::size_t other);

struct EvalOptions {
  /// Drop records whose clean prediction was already wrong before computing
  /// any metric.
  bool drop_misclassified = true;
};

/// Applies EvalOptions filtering; the result keeps the input order.
PredictionLog filter_log(std::span<const PredictionRecord> log, const EvalOptions& opts = {});

// Each metric throws ValidationError when the (filtered) log is empty.
double fooling_rate(std::span<const PredictionRecord> log, const EvalOptions& opts = {});
double targeted_success_rate(std::span<const PredictionRecord> log, const EvalOptions& opts = {});

/// Mean of rank(gt -> post) / (C - 1) over the log.
double dissimilarity_metric(std::span<const PredictionRecord> log, const ClassTemplates& ct,
                            const EvalOptions& opts = {});

/// DM between each class and its table target, averaged over all classes.
double static_dm(const TargetTable& table, Variant variant, const ClassTemplates& ct);

enum class GroupKey { kAttack, kSource, kVariant, kModel };

std::vector<GroupKey> parse_group_keys(std::string_view csv_list);

struct MetricsReport {
  // Keys not selected for grouping hold "*".
  std::string attack;
  std::string source;
  std::string variant;
  std::string model;
  std::size_t n = 0;
  double fr = 0.0;
  double tsr = 0.0;
  std::optional<double> dm;
};

/// One report per distinct key combination present in the filtered log,
/// sorted by (attack, source, variant, model).
std::vector<MetricsReport> report(std::span<const PredictionRecord> log, const ClassTemplates* ct,
                                  std::span<const GroupKey> group_by, const EvalOptions& opts = {});

/// `attack,source,variant,model,n,fr,tsr[,dm]`; the dm column is present iff
/// `with_dm`.
std::string write_report_csv(std::span<const MetricsReport> reports, bool with_dm);

/// Long-format plot input: `metric,variant,source,value`.
std::string write_plot_data(std::span<const MetricsReport> reports);

}  // namespace semtarget
