#include "semtarget/lab/task.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>

#include "csv.hpp"
#include "lab/rng.hpp"
#include "semtarget/error.hpp"

namespace semtarget::lab {

std::size_t TaskConfig::classes() const {
  std::size_t c = 1;
  for (std::size_t l = 0; l < depth; ++l) c *= branching;
  return c;
}

namespace {

struct TreeNode {
  std::string id;
  std::vector<double> mean;
};

void sample_split(std::vector<Sample>& out, std::string_view prefix, std::size_t count,
                  const std::vector<std::vector<double>>& means, double noise, std::mt19937_64& rng) {
  const std::size_t classes = means.size();
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Sample s;
    char id[32];
    std::snprintf(id, sizeof id, "%.*s-%05zu", static_cast<int>(prefix.size()), prefix.data(), i);
    s.id = id;
    s.label = i % classes;  // balanced
    s.x = means[s.label];
    for (double& v : s.x) v = std::clamp(v + noise * gauss(rng), 0.0, 1.0);
    out.push_back(std::move(s));
  }
}

}  // namespace

SyntheticTask generate_task(const TaskConfig& config) {
  if (config.branching < 2) throw ValidationError("branching must be >= 2");
  if (config.depth < 1) throw ValidationError("depth must be >= 1");
  if (config.dim < 1) throw ValidationError("dim must be >= 1");
  if (config.noise_scale < 0.0) throw ValidationError("noise_scale must be >= 0");
  if (config.level_spread <= 0.0 || config.level_decay <= 0.0)
    throw ValidationError("level_spread and level_decay must be positive");
  if (config.train_samples == 0 || config.test_samples == 0)
    throw ValidationError("train and test sample counts must be positive");
  const std::size_t classes = config.classes();
  if (classes > 1u << 16) throw ValidationError("too many classes");

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> coin(0, 1);

  std::vector<TaxonomyNode> nodes{{"root", {}}};
  std::vector<TreeNode> level{{"root", std::vector<double>(config.dim, 0.5)}};
  double scale = config.level_spread;
  for (std::size_t l = 1; l <= config.depth; ++l) {
    std::vector<TreeNode> next;
    for (const auto& parent : level) {
      // Rademacher directions centred over the siblings; with two children
      // this makes them antipodal about the parent.
      std::vector<std::vector<double>> dirs(config.branching, std::vector<double>(config.dim));
      for (auto& d : dirs)
        for (double& v : d) v = coin(rng) ? 1.0 : -1.0;
      if (config.branching == 2) {
        for (std::size_t k = 0; k < config.dim; ++k) dirs[1][k] = -dirs[0][k];
      } else {
        for (std::size_t k = 0; k < config.dim; ++k) {
          double centre = 0.0;
          for (const auto& d : dirs) centre += d[k];
          centre /= static_cast<double>(config.branching);
          for (auto& d : dirs) d[k] -= centre;
        }
      }
      for (std::size_t b = 0; b < config.branching; ++b) {
        TreeNode child;
        child.id = (l == config.depth ? "c" : "n") + std::to_string(l) + "_" +
                   std::to_string(next.size());
        child.mean = parent.mean;
        for (std::size_t k = 0; k < config.dim; ++k)
          child.mean[k] = std::clamp(child.mean[k] + scale * dirs[b][k], 0.0, 1.0);
        nodes.push_back(TaxonomyNode{child.id, {parent.id}});
        next.push_back(std::move(child));
      }
    }
    level = std::move(next);
    scale *= config.level_decay;
  }

  std::map<std::size_t, ClassEntry> class_map;
  std::vector<std::vector<double>> means;
  for (std::size_t c = 0; c < level.size(); ++c) {
    class_map.emplace(c, ClassEntry{"class_" + std::to_string(c), level[c].id});
    means.push_back(level[c].mean);
  }

  SyntheticTask task{config, Taxonomy(std::move(nodes), std::move(class_map)), std::move(means), {}, {}};
  std::mt19937_64 train_rng(detail::derive_seed(config.seed, 1));
  std::mt19937_64 test_rng(detail::derive_seed(config.seed, 2));
  sample_split(task.train, "train", config.train_samples, task.class_means, config.noise_scale,
               train_rng);
  sample_split(task.test, "test", config.test_samples, task.class_means, config.noise_scale,
               test_rng);
  return task;
}

EmbeddingSet class_mean_embeddings(const SyntheticTask& task, std::string source_name) {
  const std::size_t d = task.dim();
  std::vector<double> centre(d, 0.0);
  for (const auto& m : task.class_means)
    for (std::size_t k = 0; k < d; ++k) centre[k] += m[k];
  for (double& v : centre) v /= static_cast<double>(task.classes());

  EmbeddingSet set;
  set.source_name = std::move(source_name);
  set.dim = d;
  const auto labels = task.class_tree.labels();
  for (std::size_t c = 0; c < task.classes(); ++c) {
    EmbeddingEntry e{c, labels[c], task.class_means[c]};
    for (std::size_t k = 0; k < d; ++k) e.vector[k] -= centre[k];
    set.entries.push_back(std::move(e));
  }
  validate(set);
  return set;
}

EmbeddingSet noisy_mean_embeddings(const SyntheticTask& task, double noise_sd, std::uint64_t seed,
                                   std::string source_name) {
  EmbeddingSet set = class_mean_embeddings(task, std::move(source_name));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& e : set.entries)
    for (double& v : e.vector) v += noise_sd * gauss(rng);
  validate(set);
  return set;
}

EmbeddingSet random_embeddings(const SyntheticTask& task, std::uint64_t seed, std::string source_name) {
  EmbeddingSet set = class_mean_embeddings(task, std::move(source_name));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& e : set.entries)
    for (double& v : e.vector) v = gauss(rng);
  validate(set);
  return set;
}

std::string write_samples_csv(std::span<const Sample> samples) {
  std::string out = "id,label";
  const std::size_t d = samples.empty() ? 0 : samples.front().x.size();
  for (std::size_t k = 0; k < d; ++k) out += ",x" + std::to_string(k);
  out += '\n';
  for (const auto& s : samples) {
    out += semtarget::detail::quote_csv_field(s.id) + ',' + std::to_string(s.label);
    for (double v : s.x) out += ',' + semtarget::detail::format_exact(v);
    out += '\n';
  }
  return out;
}

}  // namespace semtarget::lab
