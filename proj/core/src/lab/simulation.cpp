#include "semtarget/lab/simulation.hpp"

#include <algorithm>
#include <cstdio>

#include "csv.hpp"
#include "lab/rng.hpp"
#include "semtarget/error.hpp"
#include "semtarget/io.hpp"
#include "semtarget/lab/experiment.hpp"

namespace semtarget::lab {

namespace sd = semtarget::detail;

namespace {

std::size_t to_count(std::string_view v, std::string_view key) {
  const long long n = sd::parse_int(v, key);
  if (n < 0) throw ValidationError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(n);
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  for (auto& f : sd::split_csv_line(v)) {
    auto t = sd::trim(f);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::string real(double v) { return sd::format_exact(v); }

}  // namespace

void SimulationConfig::set_seed(std::uint64_t value) {
  seed = value;
  task.seed = value;
  train.seed = value;
  for (AttackConfig* a : {&fgsm, &pgd, &mim, &spsa, &cw}) a->seed = value;
}

void SimulationConfig::apply(std::string_view key, std::string_view value) {
  value = sd::trim(value);
  auto r = [&] { return sd::parse_real(value, key); };
  auto n = [&] { return to_count(value, key); };

  if (key == "seed") {
    set_seed(static_cast<std::uint64_t>(sd::parse_int(value, key)));
  } else if (key == "branching") { task.branching = n();
  } else if (key == "depth") { task.depth = n();
  } else if (key == "dim") { task.dim = n();
  } else if (key == "noise_scale") { task.noise_scale = r();
  } else if (key == "train_samples") { task.train_samples = n();
  } else if (key == "test_samples") { task.test_samples = n();
  } else if (key == "level_spread") { task.level_spread = r();
  } else if (key == "level_decay") { task.level_decay = r();
  } else if (key == "model") { train.architecture = parse_architecture(value);
  } else if (key == "hidden") { train.hidden = n();
  } else if (key == "learning_rate") { train.learning_rate = r();
  } else if (key == "train_steps") { train.steps = n();
  } else if (key == "weight_decay") { train.weight_decay = r();
  } else if (key == "accuracy_gate") { train.accuracy_gate = r();
  } else if (key == "noisy_source_sd") { noisy_source_sd = r();
  } else if (key == "attacks") {
    attacks.clear();
    for (const auto& a : split_list(value)) attacks.push_back(parse_attack_kind(a));
  } else if (key == "variants") {
    variants.clear();
    for (const auto& v : split_list(value)) variants.push_back(parse_variant(v));
  } else if (key == "sources") {
    sources = split_list(value);
    for (const auto& s : sources)
      if (s != "wup" && s != "means" && s != "means-noisy" && s != "random")
        throw ValidationError("unknown similarity source '" + s + "'");
  } else if (key == "fgsm.epsilon") { fgsm.epsilon = r();
  } else if (key == "pgd.epsilon") { pgd.epsilon = r();
  } else if (key == "pgd.step_size") { pgd.step_size = r();
  } else if (key == "pgd.iterations") { pgd.iterations = n();
  } else if (key == "mim.epsilon") { mim.epsilon = r();
  } else if (key == "mim.step_size") { mim.step_size = r();
  } else if (key == "mim.iterations") { mim.iterations = n();
  } else if (key == "mim.decay") { mim.mim_decay = r();
  } else if (key == "spsa.epsilon") { spsa.epsilon = r();
  } else if (key == "spsa.step_size") { spsa.step_size = r();
  } else if (key == "spsa.iterations") { spsa.iterations = n();
  } else if (key == "spsa.samples") { spsa.spsa_samples = n();
  } else if (key == "spsa.perturbation") { spsa.spsa_perturbation = r();
  } else if (key == "cw.penalty") { cw.cw_penalty = r();
  } else if (key == "cw.confidence") { cw.cw_confidence = r();
  } else if (key == "cw.learning_rate") { cw.cw_learning_rate = r();
  } else if (key == "cw.iterations") { cw.cw_iterations = n();
  } else {
    throw ValidationError("unknown config key '" + std::string(key) + "'");
  }
}

void SimulationConfig::apply_text(std::string_view text) {
  std::size_t line_no = 0;
  for (std::string_view raw : sd::split_lines(text)) {
    ++line_no;
    std::string_view line = raw.substr(0, raw.find('#'));
    line = sd::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string_view value = sd::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    apply(sd::trim(line.substr(0, eq)), value);
  }
}

std::string SimulationConfig::to_text() const {
  std::string out;
  auto kv = [&](std::string_view k, const std::string& v) {
    out += std::string(k) + " = " + v + "\n";
  };
  auto join = [](const auto& items, auto render) {
    std::string s;
    for (const auto& item : items) {
      if (!s.empty()) s += ',';
      s += render(item);
    }
    return s;
  };
  kv("seed", std::to_string(seed));
  kv("branching", std::to_string(task.branching));
  kv("depth", std::to_string(task.depth));
  kv("dim", std::to_string(task.dim));
  kv("noise_scale", real(task.noise_scale));
  kv("train_samples", std::to_string(task.train_samples));
  kv("test_samples", std::to_string(task.test_samples));
  kv("level_spread", real(task.level_spread));
  kv("level_decay", real(task.level_decay));
  kv("model", std::string(to_string(train.architecture)));
  kv("hidden", std::to_string(train.hidden));
  kv("learning_rate", real(train.learning_rate));
  kv("train_steps", std::to_string(train.steps));
  kv("weight_decay", real(train.weight_decay));
  kv("accuracy_gate", real(train.accuracy_gate));
  kv("attacks", join(attacks, [](AttackKind k) { return std::string(to_string(k)); }));
  kv("variants", join(variants, [](Variant v) { return std::string(to_string(v)); }));
  kv("sources", join(sources, [](const std::string& s) { return s; }));
  kv("noisy_source_sd", real(noisy_source_sd));
  kv("fgsm.epsilon", real(fgsm.epsilon));
  kv("pgd.epsilon", real(pgd.epsilon));
  kv("pgd.step_size", real(pgd.step_size));
  kv("pgd.iterations", std::to_string(pgd.iterations));
  kv("mim.epsilon", real(mim.epsilon));
  kv("mim.step_size", real(mim.step_size));
  kv("mim.iterations", std::to_string(mim.iterations));
  kv("mim.decay", real(mim.mim_decay));
  kv("spsa.epsilon", real(spsa.epsilon));
  kv("spsa.step_size", real(spsa.step_size));
  kv("spsa.iterations", std::to_string(spsa.iterations));
  kv("spsa.samples", std::to_string(spsa.spsa_samples));
  kv("spsa.perturbation", real(spsa.spsa_perturbation));
  kv("cw.penalty", real(cw.cw_penalty));
  kv("cw.confidence", real(cw.cw_confidence));
  kv("cw.learning_rate", real(cw.cw_learning_rate));
  kv("cw.iterations", std::to_string(cw.cw_iterations));
  return out;
}

std::vector<AttackConfig> SimulationConfig::selected_attacks() const {
  std::vector<AttackConfig> out;
  for (AttackKind k : attacks) {
    switch (k) {
      case AttackKind::kFgsm: out.push_back(fgsm); break;
      case AttackKind::kPgd: out.push_back(pgd); break;
      case AttackKind::kMim: out.push_back(mim); break;
      case AttackKind::kSpsa: out.push_back(spsa); break;
      case AttackKind::kCw: out.push_back(cw); break;
    }
  }
  return out;
}

SimulationResult run_simulation(const SimulationConfig& config) {
  if (config.variants.empty()) throw ValidationError("no variants selected");
  if (config.sources.empty()) throw ValidationError("no similarity sources selected");

  SyntheticTask task = generate_task(config.task);
  TrainedModel trained = train(task, config.train);
  const std::string model_name(to_string(config.train.architecture));
  EmbeddingSet templates = trained.model.templates(model_name);
  const ClassTemplates ct(templates);
  const auto labels = task.class_tree.labels();

  std::vector<SourceResult> sources;
  for (const auto& name : config.sources) {
    SourceResult src;
    src.name = name;
    if (name == "wup") {
      src.table = build_targets(wup_matrix(task.class_tree, name), labels);
    } else {
      if (name == "means") {
        src.embeddings = class_mean_embeddings(task, name);
      } else if (name == "means-noisy") {
        src.embeddings = noisy_mean_embeddings(task, config.noisy_source_sd,
                                               detail::derive_seed(config.seed, 0x6e6f697379), name);
      } else if (name == "random") {
        src.embeddings = random_embeddings(task, detail::derive_seed(config.seed, 0x72616e64), name);
      } else {
        throw ValidationError("unknown similarity source '" + name + "'");
      }
      src.table = build_targets(cosine_matrix(*src.embeddings), labels);
    }
    src.static_dm_ms = static_dm(src.table, Variant::kMostSimilar, ct);
    src.static_dm_ls = static_dm(src.table, Variant::kLeastSimilar, ct);
    sources.push_back(std::move(src));
  }

  const auto attacks = config.selected_attacks();
  ExperimentOptions options{model_name, config.variants};
  PredictionLog log;
  for (const auto& src : sources) {
    auto part = run_experiment(task, trained.model, src.table, attacks, options);
    log.insert(log.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }

  std::vector<MetricsReport> reports;
  if (!log.empty()) {
    const std::vector<GroupKey> keys{GroupKey::kAttack, GroupKey::kSource, GroupKey::kVariant,
                                     GroupKey::kModel};
    reports = report(log, &ct, keys);
  }

  return SimulationResult{config,         std::move(task),    std::move(trained), std::move(templates),
                          std::move(sources), std::move(log), std::move(reports)};
}

std::string write_static_dm_csv(const std::vector<SourceResult>& sources) {
  std::string out = "source,variant,static_dm\n";
  for (const auto& s : sources) {
    out += sd::quote_csv_field(s.name) + ",MS," + sd::format_score(s.static_dm_ms) + "\n";
    out += sd::quote_csv_field(s.name) + ",LS," + sd::format_score(s.static_dm_ls) + "\n";
  }
  return out;
}

std::vector<std::string> write_simulation(const SimulationResult& result,
                                          const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "taxonomy", ec);
  if (ec) throw IoError("cannot create '" + (out_dir / "taxonomy").string() + "': " + ec.message());
  fs::create_directories(out_dir / "sources", ec);
  fs::create_directories(out_dir / "tables", ec);
  if (ec) throw IoError("cannot create output directories under '" + out_dir.string() + "'");

  std::vector<std::string> written;
  auto put = [&](const std::string& rel, std::string_view contents) {
    write_file(out_dir / rel, contents);
    written.push_back(rel);
  };

  put("config.txt", result.config.to_text());
  put("taxonomy/edges.tsv", write_edges(result.task.class_tree));
  put("taxonomy/classes.csv", write_class_map(result.task.class_tree));
  put("train.csv", write_samples_csv(result.task.train));
  put("test.csv", write_samples_csv(result.task.test));
  put("templates.embjsonl", serialize_embeddings(result.templates));
  for (const auto& src : result.sources) {
    if (src.embeddings) put("sources/" + src.name + ".embjsonl", serialize_embeddings(*src.embeddings));
    put("tables/" + src.name + ".csv", write_table(src.table));
  }
  put("predictions.predjsonl", serialize_prediction_log(result.log));
  put("report.csv", write_report_csv(result.reports, true));
  put("plot-data.csv", write_plot_data(result.reports));
  put("static-dm.csv", write_static_dm_csv(result.sources));
  return written;
}

}  // namespace semtarget::lab
