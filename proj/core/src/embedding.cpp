#include "semtarget/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>

#include "csv.hpp"
#include "semtarget/error.hpp"

namespace semtarget {

using nlohmann::json;

std::string_view to_string(SimilarityKind kind) {
  return kind == SimilarityKind::kWup ? "wup" : "cosine";
}

std::vector<std::string> EmbeddingSet::labels() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.label);
  return out;
}

namespace {

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

}  // namespace

void validate(const EmbeddingSet& e) {
  if (e.entries.empty()) throw ValidationError("embedding set '" + e.source_name + "' is empty");
  if (e.dim == 0) throw ValidationError("embedding dimension must be >= 1");
  for (std::size_t i = 0; i < e.entries.size(); ++i) {
    const auto& entry = e.entries[i];
    if (entry.class_index != i)
      throw ValidationError("missing class index " + std::to_string(i));
    if (entry.vector.size() != e.dim)
      throw ValidationError("dimension mismatch for class " + std::to_string(i) + ": expected " +
                            std::to_string(e.dim) + ", got " + std::to_string(entry.vector.size()));
    for (double x : entry.vector)
      if (!std::isfinite(x))
        throw ValidationError("non-finite component in vector of class " + std::to_string(i));
    if (squared_norm(entry.vector) == 0.0)
      throw ValidationError("zero-norm vector for class " + std::to_string(i));
  }
}

EmbeddingSet load_embeddings(std::string_view stream) {
  EmbeddingSet set;
  std::optional<std::size_t> header_dim;
  std::vector<EmbeddingEntry> entries;
  std::set<std::size_t> seen;
  std::size_t line_no = 0;
  bool first = true;
  for (std::string_view raw : detail::split_lines(stream)) {
    ++line_no;
    if (detail::trim(raw).empty()) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& err) {
      throw ValidationError("embedding line " + std::to_string(line_no) + ": " + err.what());
    }
    if (!obj.is_object())
      throw ValidationError("embedding line " + std::to_string(line_no) + ": expected an object");

    const bool is_header = first && !obj.contains("class_index");
    first = false;
    if (is_header) {
      for (const auto& [key, value] : obj.items()) {
        if (key == "source") {
          if (!value.is_string()) throw ValidationError("header 'source' must be a string");
          set.source_name = value.get<std::string>();
        } else if (key == "dim") {
          if (!value.is_number_integer() || value.get<long long>() < 1)
            throw ValidationError("header 'dim' must be a positive integer");
          header_dim = value.get<std::size_t>();
        } else {
          set.attributes[key] = value.dump();
        }
      }
      continue;
    }

    const std::string where = "embedding line " + std::to_string(line_no);
    if (!obj.contains("class_index") || !obj["class_index"].is_number_integer())
      throw ValidationError(where + ": missing integer 'class_index'");
    if (!obj.contains("label") || !obj["label"].is_string())
      throw ValidationError(where + ": missing string 'label'");
    if (!obj.contains("vector") || !obj["vector"].is_array())
      throw ValidationError(where + ": missing array 'vector'");
    const long long index = obj["class_index"].get<long long>();
    if (index < 0) throw ValidationError(where + ": negative class_index");

    EmbeddingEntry entry;
    entry.class_index = static_cast<std::size_t>(index);
    entry.label = obj["label"].get<std::string>();
    for (const auto& component : obj["vector"]) {
      if (!component.is_number()) throw ValidationError(where + ": non-numeric vector component");
      const double x = component.get<double>();
      if (!std::isfinite(x)) throw ValidationError(where + ": non-finite vector component");
      entry.vector.push_back(x);
    }
    const std::size_t expected = header_dim.value_or(entries.empty() ? entry.vector.size()
                                                                      : entries.front().vector.size());
    if (entry.vector.size() != expected)
      throw ValidationError(where + ": dimension mismatch (expected " + std::to_string(expected) +
                            ", got " + std::to_string(entry.vector.size()) + ")");
    if (squared_norm(entry.vector) == 0.0) throw ValidationError(where + ": zero-norm vector");
    if (!seen.insert(entry.class_index).second)
      throw ValidationError(where + ": duplicate class_index " + std::to_string(entry.class_index));
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) throw ValidationError("embedding file contains no entries");

  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.class_index < b.class_index; });
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].class_index != i)
      throw ValidationError("missing class index " + std::to_string(i));

  set.dim = entries.front().vector.size();
  set.entries = std::move(entries);
  validate(set);
  return set;
}

std::string serialize_embeddings(const EmbeddingSet& e) {
  std::string out = "{\"source\":" + json(e.source_name).dump() + ",\"dim\":" + std::to_string(e.dim);
  for (const auto& [key, raw] : e.attributes) out += "," + json(key).dump() + ":" + raw;
  out += "}\n";
  for (const auto& entry : e.entries) {
    out += "{\"class_index\":" + std::to_string(entry.class_index) +
           ",\"label\":" + json(entry.label).dump() + ",\"vector\":[";
    for (std::size_t k = 0; k < entry.vector.size(); ++k) {
      if (k) out += ",";
      out += detail::format_exact(entry.vector[k]);
    }
    out += "]}\n";
  }
  return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw ValidationError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()) + ")");
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  if (uu == 0.0 || vv == 0.0) throw ValidationError("cosine: zero-norm vector");
  const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
  return std::clamp(c, -1.0, 1.0);
}

SimilarityMatrix cosine_matrix(const EmbeddingSet& e) {
  const std::size_t n = e.size();
  SimilarityMatrix m(e.source_name, SimilarityKind::kCosine, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = cosine(e.vector(i), e.vector(j));
  return m;
}

}  // namespace semtarget
