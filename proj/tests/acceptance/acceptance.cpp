// Acceptance gate: one [PASS]/[FAIL] line per criterion, non-zero exit on
// any failure. All tolerances and seeds are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "semtarget/cli.hpp"
#include "semtarget/embedding.hpp"
#include "semtarget/io.hpp"
#include "semtarget/lab/model.hpp"
#include "semtarget/lab/simulation.hpp"
#include "semtarget/metrics.hpp"
#include "semtarget/targets.hpp"
#include "semtarget/taxonomy.hpp"

using namespace semtarget;
namespace fs = std::filesystem;

namespace {

constexpr int kRandomDags = 100;
constexpr std::size_t kMaxDagClasses = 32;
constexpr int kSelectionTrials = 1000;
constexpr std::size_t kMaxSelectionClasses = 16;
constexpr int kMetricTrials = 1000;
constexpr std::size_t kMaxMetricClasses = 8;
constexpr std::size_t kMaxLogRecords = 32;
constexpr double kAnchorTolerance = 1e-12;
constexpr int kGradientPoints = 100;
constexpr double kFiniteDifferenceStep = 1e-5;
constexpr double kGradientTolerance = 1e-4;
constexpr std::uint64_t kFirstSeed = 1;
constexpr std::uint64_t kLastSeed = 5;
constexpr double kOrderingMargin = 0.10;
constexpr double kRuntimeBudgetSeconds = 60.0;
constexpr double kSaturationTsr = 0.95;
constexpr double kStrongEpsilon = 0.3;
constexpr std::uint64_t kDeterminismSeed = 7;

int failures = 0;

void verdict(const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void wup_oracle() {
  const auto t = parse_taxonomy("a1\tA\na2\tA\nb1\tB\nA\troot\nB\troot\n",
                                "class_index,label,node_id\n0,a1,a1\n1,a2,a2\n2,b1,b1\n");
  bool ok = t.wup(0, 1) == 2.0 / 3.0 && t.wup(0, 2) == 1.0 / 3.0;
  std::mt19937_64 rng(101);
  int bad = 0;
  for (int trial = 0; trial < kRandomDags; ++trial) {
    const auto dag = oracle::random_dag(rng, 48, kMaxDagClasses);
    const auto m = wup_matrix(dag.build());
    for (std::size_t i = 0; i < m.size; ++i) {
      if (m.at(i, i) != 1.0) ++bad;
      for (std::size_t j = 0; j < m.size; ++j)
        if (m.at(i, j) != m.at(j, i) || m.at(i, j) <= 0.0 || m.at(i, j) > 1.0 ||
            std::abs(m.at(i, j) - oracle::wup(dag, i, j)) > 1e-15)
          ++bad;
    }
  }
  ok = ok && bad == 0;
  verdict("wup-oracle", ok,
          "toy 2/3 and 1/3 exact; " + std::to_string(kRandomDags) + " random DAGs, " + std::to_string(bad) +
              " bad entries");
}

void selection() {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<std::size_t> size(2, kMaxSelectionClasses);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> coarse(0, 4);
  int mismatches = 0;
  for (int trial = 0; trial < kSelectionTrials; ++trial) {
    const std::size_t c = size(rng);
    SimilarityMatrix m("rand", SimilarityKind::kCosine, c);
    for (auto& v : m.values) v = trial % 2 ? u(rng) : coarse(rng) / 4.0;
    std::vector<std::string> labels(c, "x");
    const auto t = build_targets(m, labels);
    for (std::size_t g = 0; g < c; ++g) {
      const auto [ms, ls] = oracle::scan_targets(m.values, c, g);
      if (t.rows[g].ms_index != ms || t.rows[g].ls_index != ls) ++mismatches;
    }
  }
  verdict("selection", mismatches == 0,
          std::to_string(kSelectionTrials) + " matrices, " + std::to_string(mismatches) + " mismatches");
}

void metric_oracle() {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<std::size_t> classes(2, kMaxMetricClasses);
  std::uniform_int_distribution<std::size_t> records(1, kMaxLogRecords);
  std::normal_distribution<double> n(0, 1);
  std::uniform_int_distribution<int> coarse(-2, 2);
  int mismatches = 0;
  for (int trial = 0; trial < kMetricTrials; ++trial) {
    const std::size_t c = classes(rng);
    const std::size_t d = 1 + trial % 4;
    std::vector<std::vector<double>> rows(c, std::vector<double>(d));
    for (auto& r : rows)
      do {
        for (auto& v : r) v = trial % 2 ? n(rng) : coarse(rng);
      } while (std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; }));
    EmbeddingSet set;
    set.dim = d;
    for (std::size_t i = 0; i < c; ++i) set.entries.push_back({i, "c", rows[i]});
    const ClassTemplates ct(set);

    std::uniform_int_distribution<std::size_t> cls(0, c - 1);
    PredictionLog log;
    const std::size_t count = records(rng);
    for (std::size_t k = 0; k < count; ++k) {
      PredictionRecord r;
      r.gt_index = cls(rng);
      r.pre_index = (k == 0 || std::bernoulli_distribution(0.8)(rng)) ? r.gt_index : cls(rng);
      r.post_index = cls(rng);
      do r.target_index = cls(rng);
      while (r.target_index == r.gt_index);
      log.push_back(r);
    }
    const auto o = oracle::metrics(log, rows, true);
    if (fooling_rate(log) != o.fr || targeted_success_rate(log) != o.tsr || dissimilarity_metric(log, ct) != o.dm)
      ++mismatches;

    TargetTable table;
    std::vector<std::size_t> ms(c), ls(c);
    for (std::size_t g = 0; g < c; ++g) {
      do ms[g] = cls(rng);
      while (ms[g] == g);
      do ls[g] = cls(rng);
      while (ls[g] == g);
      table.rows.push_back({g, "", ms[g], "", 1.0, ls[g], "", 0.0});
    }
    if (static_dm(table, Variant::kMostSimilar, ct) != oracle::static_dm(ms, rows) ||
        static_dm(table, Variant::kLeastSimilar, ct) != oracle::static_dm(ls, rows))
      ++mismatches;
  }
  verdict("metric-oracle", mismatches == 0,
          std::to_string(kMetricTrials) + " trials, " + std::to_string(mismatches) + " mismatches");
}

void dm_anchors() {
  const std::size_t c = 1000;
  EmbeddingSet set;
  set.dim = c;
  for (std::size_t i = 0; i < c; ++i) {
    std::vector<double> v(c, 0.0);
    v[i] = 1.0;
    set.entries.push_back({i, "c", std::move(v)});
  }
  const ClassTemplates ct(set);
  PredictionLog exact, neighbour;
  for (std::size_t g = 0; g < c; ++g) {
    exact.push_back({"i", g, g, g, (g + 1) % c, "a", "s", Variant::kMostSimilar, ""});
    std::size_t nn = 0;
    const auto ranks = ct.ranks_from(g);
    for (std::size_t j = 0; j < c; ++j)
      if (ranks[j] == 1) nn = j;
    neighbour.push_back({"i", g, g, nn, nn, "a", "s", Variant::kMostSimilar, ""});
  }
  const double zero = dissimilarity_metric(exact, ct);
  const double perfect = dissimilarity_metric(neighbour, ct);
  const bool ok = std::abs(zero) <= kAnchorTolerance && std::abs(perfect - 1.0 / 999.0) <= kAnchorTolerance;
  verdict("dm-anchors", ok, "DM(all correct) = " + fmt("%.3g", zero) + ", DM(rank-1, C=1000) = " + fmt("%.12g", perfect));
}

double relative_gradient_error(const lab::ToyClassifier& m, std::vector<double> x, const lab::LossSpec& spec) {
  const auto g = lab::grad_input(m, x, spec);
  double num = 0, den = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double keep = x[k];
    x[k] = keep + kFiniteDifferenceStep;
    const double up = lab::loss(m, x, spec);
    x[k] = keep - kFiniteDifferenceStep;
    const double down = lab::loss(m, x, spec);
    x[k] = keep;
    const double fd = (up - down) / (2 * kFiniteDifferenceStep);
    num += (fd - g[k]) * (fd - g[k]);
    den += g[k] * g[k];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

void gradient_check() {
  const auto task = lab::generate_task(lab::TaskConfig{});
  std::string detail;
  bool ok = true;
  for (auto arch : {lab::Architecture::kLinearSoftmax, lab::Architecture::kTanhMlp}) {
    lab::TrainConfig tc;
    tc.architecture = arch;
    tc.accuracy_gate = 0.0;
    const auto model = lab::train(task, tc).model;
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> u(0, 1);
    double worst = 0;
    for (int p = 0; p < kGradientPoints; ++p) {
      std::vector<double> x(task.dim());
      for (auto& v : x) v = u(rng);
      const auto spec = lab::LossSpec::cross_entropy(static_cast<std::size_t>(p) % task.classes());
      worst = std::max(worst, relative_gradient_error(model, x, spec));
    }
    ok = ok && worst < kGradientTolerance;
    detail += std::string(lab::to_string(arch)) + " worst " + fmt("%.2e", worst) + "; ";
  }
  verdict("gradient-check", ok, detail + std::to_string(kGradientPoints) + " points each");
}

const MetricsReport* find_report(const lab::SimulationResult& r, const std::string& attack, const std::string& source,
                                 Variant v) {
  for (const auto& rep : r.reports)
    if (rep.attack == attack && rep.source == source && rep.variant == to_string(v)) return &rep;
  return nullptr;
}

double pooled_dm(const lab::SimulationResult& r, const std::string& source, Variant v) {
  PredictionLog part;
  for (const auto& rec : r.log)
    if (rec.source == source && rec.variant == v) part.push_back(rec);
  return dissimilarity_metric(part, ClassTemplates(r.templates));
}

void lab_trends() {
  const std::string source = "means";
  std::vector<lab::SimulationResult> runs;
  const auto start = std::chrono::steady_clock::now();
  bool gate_ok = true;
  for (std::uint64_t seed = kFirstSeed; seed <= kLastSeed; ++seed) {
    lab::SimulationConfig cfg;
    cfg.set_seed(seed);
    try {
      runs.push_back(lab::run_simulation(cfg));
    } catch (const std::exception& e) {
      gate_ok = false;
      std::printf("  seed %llu: %s\n", static_cast<unsigned long long>(seed), e.what());
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!gate_ok) {
    verdict("ms-ls-ordering", false, "a default simulate run failed");
    verdict("pgd-saturation", false, "a default simulate run failed");
    verdict("dm-separation", false, "a default simulate run failed");
    return;
  }

  bool ordering = seconds <= kRuntimeBudgetSeconds;
  std::string detail;
  for (const char* attack : {"fgsm", "spsa", "cw"}) {
    double ms = 0, ls = 0;
    for (const auto& r : runs) {
      const auto* a = find_report(r, attack, source, Variant::kMostSimilar);
      const auto* b = find_report(r, attack, source, Variant::kLeastSimilar);
      if (!a || !b) {
        ordering = false;
        continue;
      }
      ms += a->tsr;
      ls += b->tsr;
    }
    ms /= runs.size();
    ls /= runs.size();
    ordering = ordering && ms - ls >= kOrderingMargin;
    detail += std::string(attack) + " " + fmt("%.3f", ms) + " vs " + fmt("%.3f", ls) + "; ";
  }
  verdict("ms-ls-ordering", ordering, detail + fmt("%.1f s for 5 seeds", seconds));

  bool saturated = true;
  double lowest = 1.0;
  for (const auto& r : runs)
    for (auto v : {Variant::kMostSimilar, Variant::kLeastSimilar}) {
      const auto* rep = find_report(r, "pgd", source, v);
      const double tsr = rep ? rep->tsr : 0.0;
      lowest = std::min(lowest, tsr);
      saturated = saturated && tsr >= kSaturationTsr;
    }
  verdict("pgd-saturation", saturated, "lowest PGD TSR over seeds and variants " + fmt("%.3f", lowest));

  bool separated = true;
  std::string dms;
  for (const auto& r : runs) {
    const double ms = pooled_dm(r, source, Variant::kMostSimilar);
    const double ls = pooled_dm(r, source, Variant::kLeastSimilar);
    separated = separated && ls > ms;
    dms += fmt("%.3f", ms) + "<" + fmt("%.3f", ls) + " ";
  }
  verdict("dm-separation", separated, "DM(MS)<DM(LS) per seed: " + dms);
}

std::vector<std::size_t> order_by(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  return idx;
}

void static_dynamic_consistency() {
  const std::vector<std::string> sources{"means", "means-noisy", "random"};
  int matched = 0;
  std::string detail;
  for (std::uint64_t seed = kFirstSeed; seed <= kLastSeed; ++seed) {
    lab::SimulationConfig cfg;
    cfg.set_seed(seed);
    cfg.apply("attacks", "fgsm");
    cfg.apply("variants", "ls");
    cfg.apply("sources", "means,means-noisy,random");
    cfg.fgsm.epsilon = kStrongEpsilon;
    const auto r = lab::run_simulation(cfg);
    std::vector<double> stat, dyn;
    for (const auto& name : sources) {
      for (const auto& s : r.sources)
        if (s.name == name) stat.push_back(s.static_dm_ls);
      dyn.push_back(pooled_dm(r, name, Variant::kLeastSimilar));
    }
    const bool same = stat.size() == sources.size() && order_by(stat) == order_by(dyn);
    matched += same ? 1 : 0;
    detail += same ? "y" : "n";
  }
  const int seeds = static_cast<int>(kLastSeed - kFirstSeed + 1);
  verdict("static-dynamic-consistency", matched == seeds,
          std::to_string(matched) + "/" + std::to_string(seeds) + " seeds rank sources alike (" + detail +
              "), FGSM eps " + fmt("%.1f", kStrongEpsilon));
}

void determinism() {
  const auto base = fs::temp_directory_path() / "semtarget-acceptance-determinism";
  fs::remove_all(base);
  const std::string seed = std::to_string(kDeterminismSeed);
  std::vector<std::string> dirs{(base / "a").string(), (base / "b").string()};
  bool ok = true;
  for (const auto& d : dirs) {
    std::ostringstream out, err;
    const int code = cli::run(std::vector<std::string>{"simulate", "--seed", seed, "--out", d, "--quiet"}, out, err);
    if (code != cli::kOk) {
      ok = false;
      std::printf("  simulate exited %d: %s", code, err.str().c_str());
    }
  }
  std::size_t compared = 0, differing = 0;
  if (ok) {
    for (const auto& entry : fs::recursive_directory_iterator(dirs[0])) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), dirs[0]);
      const auto other = fs::path(dirs[1]) / rel;
      ++compared;
      if (!fs::exists(other) || read_file(entry.path().string()) != read_file(other.string())) ++differing;
    }
    ok = compared > 0 && differing == 0;
  }
  fs::remove_all(base);
  verdict("determinism", ok,
          "simulate --seed " + seed + " twice: " + std::to_string(compared) + " files, " + std::to_string(differing) +
              " differ");
}

void guarded(const char* name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    verdict(name, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded("wup-oracle", wup_oracle);
  guarded("selection", selection);
  guarded("metric-oracle", metric_oracle);
  guarded("dm-anchors", dm_anchors);
  guarded("gradient-check", gradient_check);
  guarded("lab-trends", lab_trends);
  guarded("static-dynamic-consistency", static_dynamic_consistency);
  guarded("determinism", determinism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
