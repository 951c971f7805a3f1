#include "semtarget/taxonomy.hpp"

#include <algorithm>
#include <deque>
#include <iterator>
#include <set>

#include "csv.hpp"
#include "semtarget/error.hpp"

namespace semtarget {

Taxonomy::Taxonomy(std::vector<TaxonomyNode> nodes, std::map<std::size_t, ClassEntry> class_map)
    : nodes_(std::move(nodes)), class_map_(std::move(class_map)) {
  if (nodes_.empty()) throw ValidationError("taxonomy has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].node_id, i).second)
      throw ValidationError("duplicate node id '" + nodes_[i].node_id + "'");
  }
  parents_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (const auto& p : nodes_[i].parent_ids) {
      auto it = index_.find(p);
      if (it == index_.end())
        throw ValidationError("node '" + nodes_[i].node_id + "' has unknown parent '" + p + "'");
      parents_[i].push_back(it->second);
    }
  }

  // Cycle detection over parent edges (iterative three-colour DFS).
  enum : char { kWhite, kGrey, kBlack };
  std::vector<char> colour(nodes_.size(), kWhite);
  std::vector<std::size_t> order;  // post-order: parents before children
  order.reserve(nodes_.size());
  for (std::size_t start = 0; start < nodes_.size(); ++start) {
    if (colour[start] != kWhite) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    colour[start] = kGrey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < parents_[node].size()) {
        const std::size_t parent = parents_[node][next++];
        if (colour[parent] == kGrey) {
          auto it = std::find_if(stack.begin(), stack.end(),
                                 [&](const auto& frame) { return frame.first == parent; });
          std::string path;
          for (; it != stack.end(); ++it) path += nodes_[it->first].node_id + " -> ";
          throw ValidationError("cycle detected: " + path + nodes_[parent].node_id);
        }
        if (colour[parent] == kWhite) {
          colour[parent] = kGrey;
          stack.emplace_back(parent, 0);
        }
      } else {
        colour[node] = kBlack;
        order.push_back(node);
        stack.pop_back();
      }
    }
  }

  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (parents_[i].empty()) roots.push_back(i);
  if (roots.empty()) throw ValidationError("taxonomy has zero roots");
  if (roots.size() > 1) {
    throw ValidationError("taxonomy has multiple roots: '" + nodes_[roots[0]].node_id + "', '" +
                          nodes_[roots[1]].node_id + "'" + (roots.size() > 2 ? ", ..." : ""));
  }
  root_ = roots.front();

  // Shortest hop count from the root, root depth 1.
  std::vector<std::vector<std::size_t>> children(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    for (std::size_t p : parents_[i]) children[p].push_back(i);
  depth_.assign(nodes_.size(), 0);
  depth_[root_] = 1;
  std::deque<std::size_t> queue{root_};
  while (!queue.empty()) {
    const std::size_t n = queue.front();
    queue.pop_front();
    for (std::size_t c : children[n]) {
      if (depth_[c] == 0) {
        depth_[c] = depth_[n] + 1;
        queue.push_back(c);
      }
    }
  }

  ancestors_.resize(nodes_.size());
  for (std::size_t n : order) {
    std::vector<std::size_t> acc{n};
    for (std::size_t p : parents_[n]) {
      std::vector<std::size_t> merged;
      std::set_union(acc.begin(), acc.end(), ancestors_[p].begin(), ancestors_[p].end(),
                     std::back_inserter(merged));
      acc = std::move(merged);
    }
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    ancestors_[n] = std::move(acc);
  }

  for (const auto& [index, entry] : class_map_) {
    if (!index_.contains(entry.node_id))
      throw ValidationError("class " + std::to_string(index) + " ('" + entry.label +
                            "') references unknown node_id '" + entry.node_id + "'");
  }
}

bool Taxonomy::has_node(std::string_view node_id) const {
  return index_.contains(std::string(node_id));
}

std::size_t Taxonomy::index_of(std::string_view node_id) const {
  auto it = index_.find(std::string(node_id));
  if (it == index_.end()) throw ValidationError("unknown node '" + std::string(node_id) + "'");
  return it->second;
}

std::size_t Taxonomy::class_node(std::size_t class_index) const {
  auto it = class_map_.find(class_index);
  if (it == class_map_.end())
    throw ValidationError("class index " + std::to_string(class_index) + " is not mapped");
  return index_.at(it->second.node_id);
}

const std::vector<std::size_t>& Taxonomy::ancestors(std::size_t node) const {
  return ancestors_[node];
}

int Taxonomy::depth(std::string_view node_id) const { return depth_[index_of(node_id)]; }

int Taxonomy::lcs_depth_of(std::size_t a, std::size_t b) const {
  const auto& aa = ancestors(a);
  const auto& bb = ancestors(b);
  int best = 0;
  auto ia = aa.begin();
  auto ib = bb.begin();
  while (ia != aa.end() && ib != bb.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      best = std::max(best, depth_[*ia]);
      ++ia;
      ++ib;
    }
  }
  return best;  // the root is always shared, so best >= 1
}

int Taxonomy::lcs_depth(std::string_view a, std::string_view b) const {
  return lcs_depth_of(index_of(a), index_of(b));
}

double Taxonomy::wup(std::size_t i, std::size_t j) const {
  const std::size_t a = class_node(i);
  const std::size_t b = class_node(j);
  if (a == b) return 1.0;
  // In a DAG a shortcut edge can leave an ancestor deeper than its
  // descendant; capping keeps the score within (0, 1].
  const int lcs = std::min({lcs_depth_of(a, b), depth_[a], depth_[b]});
  return 2.0 * lcs / static_cast<double>(depth_[a] + depth_[b]);
}

std::vector<std::string> Taxonomy::labels() const {
  std::vector<std::string> out;
  out.reserve(class_map_.size());
  std::size_t expected = 0;
  for (const auto& [index, entry] : class_map_) {
    if (index != expected++)
      throw ValidationError("class indices are not contiguous: missing " +
                            std::to_string(expected - 1));
    out.push_back(entry.label);
  }
  return out;
}

Taxonomy parse_taxonomy(std::string_view edge_stream, std::string_view class_map_stream) {
  std::vector<TaxonomyNode> nodes;
  std::unordered_map<std::string, std::size_t> seen;
  auto node_slot = [&](std::string_view id) -> std::size_t {
    auto [it, inserted] = seen.emplace(std::string(id), nodes.size());
    if (inserted) nodes.push_back(TaxonomyNode{std::string(id), {}});
    return it->second;
  };

  std::size_t line_no = 0;
  for (std::string_view raw : detail::split_lines(edge_stream)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      // A lone identifier declares a node without edges (e.g. a bare root).
      node_slot(line);
      continue;
    }
    const std::string_view child = detail::trim(line.substr(0, tab));
    const std::string_view parent = detail::trim(line.substr(tab + 1));
    if (child.empty() || parent.empty() || parent.find('\t') != std::string_view::npos)
      throw ValidationError("edge line " + std::to_string(line_no) +
                            ": expected 'child<TAB>parent'");
    const std::size_t p = node_slot(parent);
    const std::size_t c = node_slot(child);
    auto& parents = nodes[c].parent_ids;
    if (std::find(parents.begin(), parents.end(), nodes[p].node_id) == parents.end())
      parents.push_back(nodes[p].node_id);
  }

  std::map<std::size_t, ClassEntry> class_map;
  bool header_seen = false;
  line_no = 0;
  for (std::string_view raw : detail::split_lines(class_map_stream)) {
    ++line_no;
    if (detail::trim(raw).empty()) continue;
    auto fields = detail::split_csv_line(raw);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() == 3 && detail::trim(fields[0]) == "class_index" &&
          detail::trim(fields[1]) == "label" && detail::trim(fields[2]) == "node_id")
        continue;
      throw ValidationError("class map must start with header 'class_index,label,node_id'");
    }
    if (fields.size() < 3)
      throw ValidationError("class map line " + std::to_string(line_no) +
                            ": expected 'class_index,label,node_id'");
    if (fields.size() > 3) {
      // Unquoted labels containing commas: everything between the first
      // and last field is the label.
      std::string label = fields[1];
      for (std::size_t k = 2; k + 1 < fields.size(); ++k) label += "," + fields[k];
      fields = {fields.front(), label, fields.back()};
    }
    const long long index = detail::parse_int(fields[0], "class_index");
    if (index < 0)
      throw ValidationError("class map line " + std::to_string(line_no) + ": negative class_index");
    const auto key = static_cast<std::size_t>(index);
    ClassEntry entry{std::string(detail::trim(fields[1])), std::string(detail::trim(fields[2]))};
    if (!class_map.emplace(key, std::move(entry)).second)
      throw ValidationError("duplicate class_index " + std::to_string(key));
  }
  if (!header_seen) throw ValidationError("class map is empty");

  return Taxonomy(std::move(nodes), std::move(class_map));
}

std::string write_edges(const Taxonomy& t) {
  std::string out;
  for (const auto& node : t.nodes()) {
    if (node.parent_ids.empty()) {
      out += node.node_id + "\n";
      continue;
    }
    for (const auto& p : node.parent_ids) out += node.node_id + "\t" + p + "\n";
  }
  return out;
}

std::string write_class_map(const Taxonomy& t) {
  std::string out = "class_index,label,node_id\n";
  for (const auto& [index, entry] : t.class_map()) {
    out += std::to_string(index) + "," + detail::quote_csv_field(entry.label) + "," +
           detail::quote_csv_field(entry.node_id) + "\n";
  }
  return out;
}

SimilarityMatrix wup_matrix(const Taxonomy& t, std::string source_name) {
  const std::size_t n = t.class_count();
  SimilarityMatrix m(std::move(source_name), SimilarityKind::kWup, n);
  for (std::size_t i = 0; i < n; ++i) {
    m.at(i, i) = t.wup(i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = t.wup(i, j);
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  }
  return m;
}

}  // namespace semtarget
