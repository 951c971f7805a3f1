#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semtarget/embedding.hpp"
#include "semtarget/taxonomy.hpp"

namespace semtarget::lab {

struct TaskConfig {
  std::size_t branching = 2;
  std::size_t depth = 3;  // levels below the root; classes = branching^depth
  std::size_t dim = 16;
  double noise_scale = 0.15;
  std::size_t train_samples = 500;
  std::size_t test_samples = 200;
  // Class means diffuse down the tree from 0.5: a level-l child sits at
  // parent +/- level_spread * level_decay^(l-1) per coordinate.
  double level_spread = 0.1;
  double level_decay = 0.9;
  std::uint64_t seed = 7;

  std::size_t classes() const;
};

struct Sample {
  std::string id;
  std::size_t label = 0;
  std::vector<double> x;
};

/// Hierarchical synthetic classification task. Sibling classes have nearer
/// means than cross-branch classes, so the class tree, the means, and a
/// classifier trained on the samples agree on which classes are similar.
struct SyntheticTask {
  TaskConfig config;
  Taxonomy class_tree;
  std::vector<std::vector<double>> class_means;
  std::vector<Sample> train;
  std::vector<Sample> test;

  std::size_t classes() const { return class_means.size(); }
  std::size_t dim() const { return config.dim; }
};

/// Deterministic in config.seed. Throws ValidationError on bad shapes.
SyntheticTask generate_task(const TaskConfig& config);

/// Centred class means (global mean removed), the in-lab ground-truth
/// similarity source.
EmbeddingSet class_mean_embeddings(const SyntheticTask& task, std::string source_name = "means");

/// Centred class means plus i.i.d. Gaussian noise of the given scale.
EmbeddingSet noisy_mean_embeddings(const SyntheticTask& task, double noise_sd, std::uint64_t seed,
                                   std::string source_name = "means-noisy");

/// Standard normal vectors with no relation to the task.
EmbeddingSet random_embeddings(const SyntheticTask& task, std::uint64_t seed,
                               std::string source_name = "random");

/// `id,label,x0,...,x{d-1}` with exact round-trip formatting.
std::string write_samples_csv(std::span<const Sample> samples);

}  // namespace semtarget::lab
