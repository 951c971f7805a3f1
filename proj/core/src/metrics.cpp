#include "semtarget/metrics.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "csv.hpp"
#include "semtarget/error.hpp"

namespace semtarget {

using nlohmann::json;

PredictionLog load_prediction_log(std::string_view stream) {
  PredictionLog log;
  std::size_t line_no = 0;
  for (std::string_view raw : detail::split_lines(stream)) {
    ++line_no;
    if (detail::trim(raw).empty()) continue;
    const std::string where = "prediction log line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& err) {
      throw ValidationError(where + ": " + err.what());
    }
    if (!obj.is_object()) throw ValidationError(where + ": expected an object");

    auto text = [&](const char* key, bool required) -> std::string {
      if (!obj.contains(key)) {
        if (required) throw ValidationError(where + ": missing '" + key + "'");
        return {};
      }
      if (!obj[key].is_string()) throw ValidationError(where + ": '" + key + "' must be a string");
      return obj[key].get<std::string>();
    };
    auto index = [&](const char* key) -> std::size_t {
      if (!obj.contains(key) || !obj[key].is_number_integer())
        throw ValidationError(where + ": missing integer '" + key + "'");
      const long long v = obj[key].get<long long>();
      if (v < 0) throw ValidationError(where + ": negative '" + key + "'");
      return static_cast<std::size_t>(v);
    };

    PredictionRecord r;
    r.image_id = text("image_id", true);
    r.gt_index = index("gt_index");
    r.pre_index = index("pre_index");
    r.post_index = index("post_index");
    r.target_index = index("target_index");
    r.attack = text("attack", true);
    r.source = text("source", true);
    try {
      r.variant = parse_variant(text("variant", true));
    } catch (const ValidationError& err) {
      throw ValidationError(where + ": " + err.what());
    }
    r.model = text("model", false);
    if (r.target_index == r.gt_index) throw ValidationError(where + ": target_index equals gt_index");
    log.push_back(std::move(r));
  }
  return log;
}

std::string serialize_prediction_log(std::span<const PredictionRecord> log) {
  std::string out;
  for (const auto& r : log) {
    json obj = json::object();
    obj["image_id"] = r.image_id;
    obj["gt_index"] = r.gt_index;
    obj["pre_index"] = r.pre_index;
    obj["post_index"] = r.post_index;
    obj["target_index"] = r.target_index;
    obj["attack"] = r.attack;
    obj["source"] = r.source;
    obj["variant"] = std::string(to_string(r.variant));
    if (!r.model.empty()) obj["model"] = r.model;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void validate_log(std::span<const PredictionRecord> log, std::size_t class_count) {
  for (const auto& r : log) {
    for (std::size_t v : {r.gt_index, r.pre_index, r.post_index, r.target_index}) {
      if (v >= class_count)
        throw ValidationError("record '" + r.image_id + "' has class index " + std::to_string(v) +
                              " outside [0, " + std::to_string(class_count) + ")");
    }
    if (r.target_index == r.gt_index)
      throw ValidationError("record '" + r.image_id + "' targets its own ground truth");
  }
}

ClassTemplates::ClassTemplates(EmbeddingSet templates) : set_(std::move(templates)) {
  validate(set_);
}

std::vector<std::size_t> ClassTemplates::ranks_from(std::size_t gt) const {
  const std::size_t n = size();
  if (gt >= n) throw ValidationError("class index " + std::to_string(gt) + " out of range");
  std::vector<double> sim(n);
  for (std::size_t j = 0; j < n; ++j) sim[j] = cosine(row(gt), row(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if ((a == gt) != (b == gt)) return a == gt;
    if (sim[a] != sim[b]) return sim[a] > sim[b];
    return a < b;
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
  return rank;
}

std::size_t template_rank(const ClassTemplates& ct, std::size_t gt, std::size_t other) {
  if (other >= ct.size())
    throw ValidationError("class index " + std::to_string(other) + " out of range");
  return ct.ranks_from(gt)[other];
}

PredictionLog filter_log(std::span<const PredictionRecord> log, const EvalOptions& opts) {
  PredictionLog out;
  out.reserve(log.size());
  for (const auto& r : log)
    if (!opts.drop_misclassified || r.pre_index == r.gt_index) out.push_back(r);
  return out;
}

namespace {

PredictionLog filtered_nonempty(std::span<const PredictionRecord> log, const EvalOptions& opts) {
  if (log.empty()) throw ValidationError("prediction log is empty");
  auto kept = filter_log(log, opts);
  if (kept.empty())
    throw ValidationError("prediction log is empty after dropping misclassified records");
  return kept;
}

// Integer rank total; the DM is this divided by (C-1) * N.
std::size_t rank_total(std::span<const PredictionRecord> log, const ClassTemplates& ct) {
  if (ct.size() < 2) throw ValidationError("dissimilarity metric needs at least 2 classes");
  validate_log(log, ct.size());
  std::unordered_map<std::size_t, std::vector<std::size_t>> cache;
  std::size_t total = 0;
  for (const auto& r : log) {
    auto it = cache.find(r.gt_index);
    if (it == cache.end()) it = cache.emplace(r.gt_index, ct.ranks_from(r.gt_index)).first;
    total += it->second[r.post_index];
  }
  return total;
}

double normalised(std::size_t rank_sum, std::size_t classes, std::size_t count) {
  return static_cast<double>(rank_sum) /
         (static_cast<double>(classes - 1) * static_cast<double>(count));
}

}  // namespace

double fooling_rate(std::span<const PredictionRecord> log, const EvalOptions& opts) {
  const auto kept = filtered_nonempty(log, opts);
  const auto changed = std::count_if(kept.begin(), kept.end(),
                                     [](const auto& r) { return r.pre_index != r.post_index; });
  return static_cast<double>(changed) / static_cast<double>(kept.size());
}

double targeted_success_rate(std::span<const PredictionRecord> log, const EvalOptions& opts) {
  const auto kept = filtered_nonempty(log, opts);
  const auto hits = std::count_if(kept.begin(), kept.end(),
                                  [](const auto& r) { return r.post_index == r.target_index; });
  return static_cast<double>(hits) / static_cast<double>(kept.size());
}

double dissimilarity_metric(std::span<const PredictionRecord> log, const ClassTemplates& ct,
                            const EvalOptions& opts) {
  const auto kept = filtered_nonempty(log, opts);
  return normalised(rank_total(kept, ct), ct.size(), kept.size());
}

double static_dm(const TargetTable& table, Variant variant, const ClassTemplates& ct) {
  if (table.size() != ct.size())
    throw ValidationError("target table has " + std::to_string(table.size()) +
                          " classes but templates have " + std::to_string(ct.size()));
  if (ct.size() < 2) throw ValidationError("static DM needs at least 2 classes");
  std::size_t total = 0;
  for (const auto& row : table.rows) total += template_rank(ct, row.gt_index, row.target(variant));
  return normalised(total, ct.size(), table.size());
}

std::vector<GroupKey> parse_group_keys(std::string_view csv_list) {
  std::vector<GroupKey> keys;
  for (const auto& field : detail::split_csv_line(csv_list)) {
    const auto name = detail::trim(field);
    if (name.empty()) continue;
    GroupKey key;
    if (name == "attack") key = GroupKey::kAttack;
    else if (name == "source") key = GroupKey::kSource;
    else if (name == "variant") key = GroupKey::kVariant;
    else if (name == "model") key = GroupKey::kModel;
    else throw ValidationError("unknown group key '" + std::string(name) + "'");
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  return keys;
}

std::vector<MetricsReport> report(std::span<const PredictionRecord> log, const ClassTemplates* ct,
                                  std::span<const GroupKey> group_by, const EvalOptions& opts) {
  const auto kept = filtered_nonempty(log, opts);
  if (ct) validate_log(kept, ct->size());
  auto selected = [&](GroupKey k) {
    return std::find(group_by.begin(), group_by.end(), k) != group_by.end();
  };

  using Key = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<Key, PredictionLog> groups;
  for (const auto& r : kept) {
    Key key{selected(GroupKey::kAttack) ? r.attack : "*",
            selected(GroupKey::kSource) ? r.source : "*",
            selected(GroupKey::kVariant) ? std::string(to_string(r.variant)) : "*",
            selected(GroupKey::kModel) ? r.model : "*"};
    groups[key].push_back(r);
  }

  const EvalOptions keep_all{false};
  std::vector<MetricsReport> out;
  out.reserve(groups.size());
  for (const auto& [key, records] : groups) {
    MetricsReport rep;
    std::tie(rep.attack, rep.source, rep.variant, rep.model) = key;
    rep.n = records.size();
    rep.fr = fooling_rate(records, keep_all);
    rep.tsr = targeted_success_rate(records, keep_all);
    if (ct) rep.dm = dissimilarity_metric(records, *ct, keep_all);
    out.push_back(std::move(rep));
  }
  return out;
}

std::string write_report_csv(std::span<const MetricsReport> reports, bool with_dm) {
  std::string out = with_dm ? "attack,source,variant,model,n,fr,tsr,dm\n"
                            : "attack,source,variant,model,n,fr,tsr\n";
  for (const auto& r : reports) {
    out += detail::quote_csv_field(r.attack) + ',' + detail::quote_csv_field(r.source) + ',' +
           detail::quote_csv_field(r.variant) + ',' + detail::quote_csv_field(r.model) + ',' +
           std::to_string(r.n) + ',' + detail::format_score(r.fr) + ',' +
           detail::format_score(r.tsr);
    if (with_dm) {
      if (!r.dm) throw ValidationError("report row lacks a DM value");
      out += ',' + detail::format_score(*r.dm);
    }
    out += '\n';
  }
  return out;
}

std::string write_plot_data(std::span<const MetricsReport> reports) {
  std::string out = "metric,variant,source,value\n";
  auto emit = [&](std::string_view metric, const MetricsReport& r, double value) {
    out += std::string(metric) + ',' + detail::quote_csv_field(r.variant) + ',' +
           detail::quote_csv_field(r.source) + ',' + detail::format_score(value) + '\n';
  };
  for (const auto& r : reports) {
    emit("fr", r, r.fr);
    emit("tsr", r, r.tsr);
    if (r.dm) emit("dm", r, *r.dm);
  }
  return out;
}

}  // namespace semtarget
