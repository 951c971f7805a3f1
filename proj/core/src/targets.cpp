#include "semtarget/targets.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "csv.hpp"
#include "semtarget/error.hpp"

namespace semtarget {

std::string_view to_string(Variant v) { return v == Variant::kMostSimilar ? "MS" : "LS"; }

Variant parse_variant(std::string_view s) {
  std::string upper(s);
  for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (upper == "MS") return Variant::kMostSimilar;
  if (upper == "LS") return Variant::kLeastSimilar;
  throw ValidationError("unknown variant '" + std::string(s) + "' (expected MS or LS)");
}

TargetTable build_targets(const SimilarityMatrix& s, const std::vector<std::string>& labels) {
  const std::size_t n = s.size;
  if (n < 2) throw ValidationError("target selection needs at least 2 classes, got " + std::to_string(n));
  if (labels.size() != n)
    throw ValidationError("label count " + std::to_string(labels.size()) +
                          " does not match class count " + std::to_string(n));
  if (s.values.size() != n * n) throw ValidationError("similarity matrix storage is not C x C");

  TargetTable table{s.source_name, s.kind, {}};
  table.rows.reserve(n);
  for (std::size_t gt = 0; gt < n; ++gt) {
    std::size_t ms = gt;
    std::size_t ls = gt;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == gt) continue;
      const double v = s.at(gt, j);
      // Strict comparisons keep the first (lowest-index) candidate on ties.
      if (ms == gt || v > s.at(gt, ms)) ms = j;
      if (ls == gt || v < s.at(gt, ls)) ls = j;
    }
    table.rows.push_back(TargetRow{gt, labels[gt], ms, labels[ms], s.at(gt, ms), ls, labels[ls],
                                   s.at(gt, ls)});
  }
  return table;
}

namespace {

constexpr std::array<std::string_view, 8> kColumns = {
    "gt_index", "gt_label", "ms_index", "ms_label", "ms_score", "ls_index", "ls_label", "ls_score"};

}  // namespace

std::string write_table(const TargetTable& t) {
  std::string out;
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    if (k) out += ',';
    out += kColumns[k];
  }
  out += '\n';
  for (const auto& r : t.rows) {
    out += std::to_string(r.gt_index) + ',' + detail::quote_csv_field(r.gt_label) + ',' +
           std::to_string(r.ms_index) + ',' + detail::quote_csv_field(r.ms_label) + ',' +
           detail::format_score(r.ms_score) + ',' + std::to_string(r.ls_index) + ',' +
           detail::quote_csv_field(r.ls_label) + ',' + detail::format_score(r.ls_score) + '\n';
  }
  return out;
}

TargetTable read_table(std::string_view stream, std::string source_name, SimilarityKind kind) {
  const auto lines = detail::split_lines(stream);
  std::size_t line_no = 0;
  std::array<std::size_t, kColumns.size()> pos{};
  bool header_seen = false;
  TargetTable table{std::move(source_name), kind, {}};

  for (std::string_view raw : lines) {
    ++line_no;
    if (detail::trim(raw).empty()) continue;
    const auto fields = detail::split_csv_line(raw);
    if (!header_seen) {
      header_seen = true;
      for (std::size_t k = 0; k < kColumns.size(); ++k) {
        auto it = std::find_if(fields.begin(), fields.end(),
                               [&](const std::string& f) { return detail::trim(f) == kColumns[k]; });
        if (it == fields.end())
          throw ValidationError("target table is missing column '" + std::string(kColumns[k]) + "'");
        pos[k] = static_cast<std::size_t>(it - fields.begin());
      }
      continue;
    }
    const std::string where = "target table line " + std::to_string(line_no);
    for (std::size_t p : pos)
      if (p >= fields.size()) throw ValidationError(where + ": too few fields");
    auto index = [&](std::size_t k) {
      const long long v = detail::parse_int(fields[pos[k]], kColumns[k]);
      if (v < 0) throw ValidationError(where + ": negative " + std::string(kColumns[k]));
      return static_cast<std::size_t>(v);
    };
    TargetRow row;
    row.gt_index = index(0);
    row.gt_label = fields[pos[1]];
    row.ms_index = index(2);
    row.ms_label = fields[pos[3]];
    row.ms_score = detail::parse_real(fields[pos[4]], kColumns[4]);
    row.ls_index = index(5);
    row.ls_label = fields[pos[6]];
    row.ls_score = detail::parse_real(fields[pos[7]], kColumns[7]);
    if (row.ms_index == row.gt_index) throw ValidationError(where + ": ms_index equals gt_index");
    if (row.ls_index == row.gt_index) throw ValidationError(where + ": ls_index equals gt_index");
    if (row.ms_score < row.ls_score) throw ValidationError(where + ": ms_score < ls_score");
    if (row.gt_index != table.rows.size())
      throw ValidationError(where + ": expected gt_index " + std::to_string(table.rows.size()));
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) throw ValidationError("target table is empty");
  if (table.rows.size() < 2) throw ValidationError("target table needs at least 2 rows");
  for (const auto& r : table.rows) {
    if (r.ms_index >= table.rows.size() || r.ls_index >= table.rows.size())
      throw ValidationError("target table row " + std::to_string(r.gt_index) +
                            ": target index out of range");
  }
  return table;
}

}  // namespace semtarget
