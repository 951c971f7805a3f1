#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "semtarget/similarity.hpp"

namespace semtarget {

enum class Variant { kMostSimilar, kLeastSimilar };

std::string_view to_string(Variant v);  // "MS" / "LS"
Variant parse_variant(std::string_view s);  // accepts MS/LS in any case

struct TargetRow {
  std::size_t gt_index = 0;
  std::string gt_label;
  std::size_t ms_index = 0;
  std::string ms_label;
  double ms_score = 0.0;
  std::size_t ls_index = 0;
  std::string ls_label;
  double ls_score = 0.0;

  std::size_t target(Variant v) const { return v == Variant::kMostSimilar ? ms_index : ls_index; }
};

/// Precomputed most-similar / least-similar target lookup table, one row per
/// ground-truth class in index order.
struct TargetTable {
  std::string source_name;
  SimilarityKind kind = SimilarityKind::kCosine;
  std::vector<TargetRow> rows;

  std::size_t size() const { return rows.size(); }
};

/// Row c holds argmax / argmin of S[c][j] over j != c. Ties go to the lowest
/// class index.
TargetTable build_targets(const SimilarityMatrix& s, const std::vector<std::string>& labels);

/// CSV with header
/// `gt_index,gt_label,ms_index,ms_label,ms_score,ls_index,ls_label,ls_score`;
/// scores use 12 significant digits.
std::string write_table(const TargetTable& t);

/// Parses and validates a table CSV. Source name and kind are not part of
/// the file format and are supplied by the caller.
TargetTable read_table(std::string_view stream, std::string source_name = {},
                       SimilarityKind kind = SimilarityKind::kCosine);

}  // namespace semtarget
