#include <benchmark/benchmark.h>

#include <random>

#include "semtarget/embedding.hpp"
#include "semtarget/lab/attacks.hpp"
#include "semtarget/lab/model.hpp"
#include "semtarget/lab/task.hpp"
#include "semtarget/metrics.hpp"
#include "semtarget/targets.hpp"
#include "semtarget/taxonomy.hpp"

using namespace semtarget;

namespace {

// Complete tree with `leaves` leaf classes and the given fan-out.
Taxonomy complete_tree(std::size_t leaves, std::size_t fanout) {
  std::vector<TaxonomyNode> nodes{{"n0", {}}};
  std::vector<std::size_t> frontier{0};
  while (frontier.size() < leaves) {
    std::vector<std::size_t> next;
    for (auto p : frontier)
      for (std::size_t k = 0; k < fanout && next.size() < leaves; ++k) {
        next.push_back(nodes.size());
        nodes.push_back({"n" + std::to_string(nodes.size()), {nodes[p].node_id}});
      }
    frontier = std::move(next);
  }
  std::map<std::size_t, ClassEntry> classes;
  for (std::size_t c = 0; c < frontier.size(); ++c) classes[c] = {"c" + std::to_string(c), nodes[frontier[c]].node_id};
  return Taxonomy(std::move(nodes), std::move(classes));
}

EmbeddingSet random_set(std::size_t c, std::size_t d) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  EmbeddingSet e;
  e.dim = d;
  for (std::size_t i = 0; i < c; ++i) {
    EmbeddingEntry entry{i, "c" + std::to_string(i), std::vector<double>(d)};
    for (auto& v : entry.vector) v = n(rng);
    e.entries.push_back(std::move(entry));
  }
  return e;
}

void BM_WupMatrix(benchmark::State& state) {
  const auto t = complete_tree(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(wup_matrix(t));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WupMatrix)->Arg(100)->Arg(1000)->Complexity();

void BM_CosineMatrix(benchmark::State& state) {
  const auto e = random_set(static_cast<std::size_t>(state.range(0)), 512);
  for (auto _ : state) benchmark::DoNotOptimize(cosine_matrix(e));
}
BENCHMARK(BM_CosineMatrix)->Arg(100)->Arg(1000);

void BM_BuildTargets(benchmark::State& state) {
  const auto e = random_set(static_cast<std::size_t>(state.range(0)), 64);
  const auto m = cosine_matrix(e);
  const auto labels = e.labels();
  for (auto _ : state) benchmark::DoNotOptimize(build_targets(m, labels));
}
BENCHMARK(BM_BuildTargets)->Arg(100)->Arg(1000);

void BM_DissimilarityMetric(benchmark::State& state) {
  const std::size_t c = static_cast<std::size_t>(state.range(0));
  const ClassTemplates ct(random_set(c, 64));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> cls(0, c - 1);
  PredictionLog log;
  for (int k = 0; k < 5000; ++k) {
    const auto g = cls(rng);
    log.push_back({"i", g, g, cls(rng), (g + 1) % c, "a", "s", Variant::kMostSimilar, ""});
  }
  for (auto _ : state) benchmark::DoNotOptimize(dissimilarity_metric(log, ct));
}
BENCHMARK(BM_DissimilarityMetric)->Arg(100)->Arg(1000);

void BM_Attack(benchmark::State& state) {
  static const auto task = lab::generate_task(lab::TaskConfig{});
  static const auto model = [] {
    lab::TrainConfig tc;
    tc.accuracy_gate = 0.0;
    return lab::train(task, tc).model;
  }();
  const lab::AttackConfig configs[] = {
      lab::AttackConfig::fgsm(0.05), lab::AttackConfig::pgd(0.3, 0.025, 40),
      lab::AttackConfig::mim(0.05, 0.01, 10, 1.0), lab::AttackConfig::spsa(0.05, 0.01, 10, 32, 0.01),
      lab::AttackConfig::cw(4.0, 0.0, 0.01, 100)};
  const auto& cfg = configs[state.range(0)];
  state.SetLabel(cfg.tag());
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& s = task.test[i++ % task.test.size()];
    benchmark::DoNotOptimize(lab::run_attack(model, s.x, (s.label + 1) % task.classes(), cfg, i));
  }
}
BENCHMARK(BM_Attack)->DenseRange(0, 4);

}  // namespace

BENCHMARK_MAIN();
