#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semtarget/similarity.hpp"

namespace semtarget {

struct TaxonomyNode {
  std::string node_id;
  std::vector<std::string> parent_ids;  // empty only for the root
};

struct ClassEntry {
  std::string label;
  std::string node_id;
};

/// Rooted concept DAG with a class-index -> node mapping.
///
/// Immutable once built. Depth follows the root = 1 convention and uses the
/// shortest parent chain when a node has several parents; the least common
/// subsumer of two nodes is their deepest common ancestor.
class Taxonomy {
 public:
  /// Validates and builds. Throws ValidationError on cycles, zero or multiple
  /// roots, dangling class nodes, or duplicate class indices.
  Taxonomy(std::vector<TaxonomyNode> nodes, std::map<std::size_t, ClassEntry> class_map);

  const std::string& root() const { return nodes_[root_].node_id; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t class_count() const { return class_map_.size(); }
  bool has_node(std::string_view node_id) const;

  const std::map<std::size_t, ClassEntry>& class_map() const { return class_map_; }
  const std::vector<TaxonomyNode>& nodes() const { return nodes_; }

  int depth(std::string_view node_id) const;
  int lcs_depth(std::string_view a, std::string_view b) const;

  /// Wu-Palmer similarity between two mapped classes. The LCS depth is
  /// capped at the shallower of the two class nodes.
  double wup(std::size_t i, std::size_t j) const;

  /// Labels in class-index order; requires indices 0..C-1.
  std::vector<std::string> labels() const;

 private:
  std::size_t index_of(std::string_view node_id) const;
  std::size_t class_node(std::size_t class_index) const;
  const std::vector<std::size_t>& ancestors(std::size_t node) const;
  int lcs_depth_of(std::size_t a, std::size_t b) const;

  std::vector<TaxonomyNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<int> depth_;
  // Sorted ancestor sets (each node includes itself).
  std::vector<std::vector<std::size_t>> ancestors_;
  std::map<std::size_t, ClassEntry> class_map_;
  std::size_t root_ = 0;
};

/// Parses a `child<TAB>parent` edge list and a `class_index,label,node_id`
/// class map (header row required). `#` lines in the edge list are comments.
Taxonomy parse_taxonomy(std::string_view edge_stream, std::string_view class_map_stream);

/// Serializes back to the two text formats accepted by parse_taxonomy.
std::string write_edges(const Taxonomy& t);
std::string write_class_map(const Taxonomy& t);

/// C x C matrix of pairwise WUP values over classes 0..C-1.
SimilarityMatrix wup_matrix(const Taxonomy& t, std::string source_name = "wup");

}  // namespace semtarget
