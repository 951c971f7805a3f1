#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semtarget/similarity.hpp"

namespace semtarget {

struct EmbeddingEntry {
  std::size_t class_index = 0;
  std::string label;
  std::vector<double> vector;
};

/// Per-class label embeddings from one similarity source, ordered by class
/// index 0..C-1. Also used for class templates (final-layer weight rows).
struct EmbeddingSet {
  std::string source_name;
  std::size_t dim = 0;
  std::vector<EmbeddingEntry> entries;
  // Extra header keys (provenance such as pooling or model revision), kept
  // as raw JSON text so they survive a round trip.
  std::map<std::string, std::string> attributes;

  std::size_t size() const { return entries.size(); }
  std::span<const double> vector(std::size_t class_index) const { return entries[class_index].vector; }
  std::vector<std::string> labels() const;
};

/// Validates shape invariants: shared dim >= 1, indices 0..C-1 in order,
/// finite components, no zero-norm rows. Throws ValidationError.
void validate(const EmbeddingSet& e);

/// Parses the `.embjsonl` format: an optional header object
/// `{"source": ..., "dim": ...}` followed by one
/// `{"class_index", "label", "vector"}` object per line.
EmbeddingSet load_embeddings(std::string_view stream);

/// Inverse of load_embeddings; components are written in shortest
/// round-trip form so reloading is bit-exact.
std::string serialize_embeddings(const EmbeddingSet& e);

/// u.v / (|u| |v|) with 64-bit accumulation, clamped to [-1, 1].
double cosine(std::span<const double> u, std::span<const double> v);

SimilarityMatrix cosine_matrix(const EmbeddingSet& e);

}  // namespace semtarget
