#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace semtarget {

enum class SimilarityKind { kCosine, kWup };

std::string_view to_string(SimilarityKind kind);

/// Dense C x C class-similarity matrix from one similarity source.
struct SimilarityMatrix {
  std::string source_name;
  SimilarityKind kind = SimilarityKind::kCosine;
  std::size_t size = 0;
  std::vector<double> values;  // row-major, size * size

  SimilarityMatrix() = default;
  SimilarityMatrix(std::string source, SimilarityKind k, std::size_t n)
      : source_name(std::move(source)), kind(k), size(n), values(n * n, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return values[i * size + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * size + j]; }
};

}  // namespace semtarget
