#include "semtarget/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>

#include "semtarget/embedding.hpp"
#include "semtarget/error.hpp"
#include "semtarget/io.hpp"
#include "semtarget/lab/simulation.hpp"
#include "semtarget/metrics.hpp"
#include "semtarget/targets.hpp"
#include "semtarget/taxonomy.hpp"

namespace semtarget::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string manifest;
  bool force = false;
  bool quiet = false;
};

/// Inputs, outputs, and settings of one invocation (written with --manifest).
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> settings;
};

void require_inputs(const std::vector<std::string>& paths) {
  for (const auto& p : paths) {
    std::error_code ec;
    if (!fs::exists(p, ec)) throw IoError("input not found: '" + p + "'");
  }
}

void guard_output(const std::string& path, bool force) {
  std::error_code ec;
  if (path.empty() || !fs::exists(path, ec) || force) return;
  if (fs::is_directory(path, ec) && fs::is_empty(path, ec)) return;
  throw ValidationError("refusing to overwrite '" + path + "' (pass --force)");
}

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    write_file(path, contents);
  }
}

std::string derived_path(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void write_manifest(const std::string& path, const RunManifest& m) {
  json doc = json::object();
  doc["subcommand"] = m.subcommand;
  doc["inputs"] = m.inputs;
  doc["outputs"] = m.outputs;
  doc["settings"] = m.settings;
  write_file(path, doc.dump(2) + "\n");
}

ClassTemplates load_templates(const std::string& path) {
  EmbeddingSet set = load_embeddings(read_file(path));
  if (set.source_name.empty()) set.source_name = fs::path(path).stem().string();
  return ClassTemplates(std::move(set));
}

struct EvalArgs {
  std::vector<std::string> logs;
  std::string templates;
  std::string group_by = "attack,source,variant,model";
  std::string plot_out;
  bool keep_misclassified = false;
};

RunManifest do_eval(const std::string& name, const EvalArgs& a, const GlobalOptions& g,
                    std::ostream& out) {
  RunManifest m{name, a.logs, {}, {{"group_by", a.group_by}}};
  if (!a.templates.empty()) m.inputs.push_back(a.templates);
  m.settings["keep_misclassified"] = a.keep_misclassified ? "true" : "false";
  require_inputs(m.inputs);

  PredictionLog log;
  for (const auto& path : a.logs) {
    auto part = load_prediction_log(read_file(path));
    log.insert(log.end(), part.begin(), part.end());
  }
  if (log.empty()) throw ValidationError("prediction log is empty");

  std::optional<ClassTemplates> ct;
  if (!a.templates.empty()) ct.emplace(load_templates(a.templates));
  const auto keys = parse_group_keys(a.group_by);
  const auto reports = report(log, ct ? &*ct : nullptr, keys, EvalOptions{!a.keep_misclassified});

  const std::string plot_path =
      !a.plot_out.empty() ? a.plot_out : (g.out.empty() || g.out == "-" ? "" : derived_path(g.out, "-plot.csv"));
  guard_output(g.out, g.force);
  if (!plot_path.empty()) guard_output(plot_path, g.force);
  emit(g.out, write_report_csv(reports, ct.has_value()), out);
  if (!g.out.empty() && g.out != "-") m.outputs.push_back(g.out);
  if (!plot_path.empty()) {
    write_file(plot_path, write_plot_data(reports));
    m.outputs.push_back(plot_path);
  }
  return m;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("semtarget");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic target selection and attack evaluation toolkit"};
  app.name("semtarget");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Random seed");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--manifest", g.manifest, "Write a run manifest (JSON) to this path");
  app.add_flag("--force", g.force, "Allow overwriting existing outputs");
  app.add_flag("--quiet", g.quiet, "Suppress informational output");

  // import-taxonomy
  std::string edges, classmap;
  auto* imp = app.add_subcommand("import-taxonomy", "Validate a taxonomy and write a bundle directory");
  imp->add_option("--edges", edges, "child<TAB>parent edge list")->required();
  imp->add_option("--classmap", classmap, "class_index,label,node_id CSV")->required();

  // build-targets
  std::string wup_bundle, embeddings_path, source_override;
  auto* bt = app.add_subcommand("build-targets", "Build the MS/LS target lookup table");
  bt->add_option("--wup", wup_bundle, "Taxonomy bundle directory");
  bt->add_option("--embeddings", embeddings_path, "Label embeddings (.embjsonl)");
  bt->add_option("--source", source_override, "Override the source name");

  // eval / report
  EvalArgs eval_args;
  auto* ev = app.add_subcommand("eval", "FR / TSR / DM report for a prediction log");
  ev->add_option("--log", eval_args.logs, "Prediction log (.predjsonl)")->required()->expected(1);
  ev->add_option("--templates", eval_args.templates, "Class templates (.embjsonl)");
  ev->add_option("--group-by", eval_args.group_by, "Comma-separated subset of attack,source,variant,model");
  ev->add_option("--plot-out", eval_args.plot_out, "Plot-data CSV path");
  ev->add_flag("--keep-misclassified", eval_args.keep_misclassified,
               "Keep records whose clean prediction was already wrong");

  EvalArgs report_args;
  auto* rp = app.add_subcommand("report", "Pool several prediction logs into one report");
  rp->add_option("--log", report_args.logs, "Prediction logs (.predjsonl)")->required();
  rp->add_option("--templates", report_args.templates, "Class templates (.embjsonl)");
  rp->add_option("--group-by", report_args.group_by, "Comma-separated subset of attack,source,variant,model");
  rp->add_option("--plot-out", report_args.plot_out, "Plot-data CSV path");
  rp->add_flag("--keep-misclassified", report_args.keep_misclassified,
               "Keep records whose clean prediction was already wrong");

  // simulate
  std::string config_path, attacks_list, variants_list, sources_list;
  std::vector<std::string> overrides;
  auto* sim = app.add_subcommand("simulate", "Run the desk-scale attack lab end to end");
  sim->add_option("--config", config_path, "key = value config file");
  sim->add_option("--attacks", attacks_list, "e.g. fgsm,pgd,mim,spsa,cw");
  sim->add_option("--variants", variants_list, "e.g. ms,ls");
  sim->add_option("--sources", sources_list, "e.g. wup,means,means-noisy,random");
  sim->add_option("--set", overrides, "Config override key=value (repeatable)");

  // static-dm
  std::string table_path, templates_path;
  auto* sdm = app.add_subcommand("static-dm", "Image-free DM between classes and their targets");
  sdm->add_option("--table", table_path, "Target table CSV")->required();
  sdm->add_option("--templates", templates_path, "Class templates (.embjsonl)")->required();
  sdm->add_option("--source", source_override, "Source name for the output rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "semtarget: " << e.what() << "\n";
    return kUsageError;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    RunManifest manifest;
    if (*imp) {
      manifest = {"import-taxonomy", {edges, classmap}, {}, {}};
      require_inputs(manifest.inputs);
      const Taxonomy t = parse_taxonomy(read_file(edges), read_file(classmap));
      if (g.out.empty()) throw ValidationError("import-taxonomy needs --out <bundle dir>");
      guard_output(g.out, g.force);
      fs::create_directories(g.out);
      write_file(fs::path(g.out) / "edges.tsv", write_edges(t));
      write_file(fs::path(g.out) / "classes.csv", write_class_map(t));
      manifest.outputs = {g.out};
      if (!g.quiet)
        out << "taxonomy: " << t.node_count() << " nodes, " << t.class_count() << " classes, root '"
            << t.root() << "'\n";
    } else if (*bt) {
      if (wup_bundle.empty() == embeddings_path.empty())
        throw ValidationError("build-targets needs exactly one of --wup or --embeddings");
      TargetTable table;
      if (!wup_bundle.empty()) {
        const auto e = (fs::path(wup_bundle) / "edges.tsv").string();
        const auto c = (fs::path(wup_bundle) / "classes.csv").string();
        manifest = {"build-targets", {e, c}, {}, {{"source", "wup"}}};
        require_inputs(manifest.inputs);
        const Taxonomy t = parse_taxonomy(read_file(e), read_file(c));
        const std::string name = source_override.empty() ? "wup" : source_override;
        table = build_targets(wup_matrix(t, name), t.labels());
      } else {
        manifest = {"build-targets", {embeddings_path}, {}, {}};
        require_inputs(manifest.inputs);
        EmbeddingSet set = load_embeddings(read_file(embeddings_path));
        if (!source_override.empty()) set.source_name = source_override;
        if (set.source_name.empty()) set.source_name = fs::path(embeddings_path).stem().string();
        table = build_targets(cosine_matrix(set), set.labels());
      }
      manifest.settings["source"] = table.source_name;
      guard_output(g.out, g.force);
      emit(g.out, write_table(table), out);
      if (!g.out.empty() && g.out != "-") manifest.outputs = {g.out};
      if (!g.quiet) err << "C=" << table.size() << " source=" << table.source_name << "\n";
    } else if (*ev) {
      manifest = do_eval("eval", eval_args, g, out);
    } else if (*rp) {
      manifest = do_eval("report", report_args, g, out);
    } else if (*sim) {
      if (g.out.empty()) throw ValidationError("simulate needs --out <directory>");
      lab::SimulationConfig cfg;
      manifest = {"simulate", {}, {}, {}};
      if (!config_path.empty()) {
        manifest.inputs.push_back(config_path);
        require_inputs(manifest.inputs);
        cfg.apply_text(read_file(config_path));
      }
      if (g.seed) cfg.set_seed(*g.seed);
      if (!attacks_list.empty()) cfg.apply("attacks", attacks_list);
      if (!variants_list.empty()) cfg.apply("variants", variants_list);
      if (!sources_list.empty()) cfg.apply("sources", sources_list);
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
        cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
      }
      guard_output(g.out, g.force);

      lab::SimulationResult result = lab::run_simulation(cfg);
      const auto files = lab::write_simulation(result, g.out);

      json doc = json::object();
      doc["subcommand"] = "simulate";
      doc["seed"] = cfg.seed;
      doc["config"] = cfg.to_text();
      doc["test_accuracy"] = result.trained.test_accuracy;
      doc["records"] = result.log.size();
      doc["files"] = files;
      write_file(fs::path(g.out) / "manifest.json", doc.dump(2) + "\n");
      manifest.outputs = {g.out};
      manifest.settings["seed"] = std::to_string(cfg.seed);
      if (!g.quiet) {
        out << "simulate: accuracy " << result.trained.test_accuracy << ", " << result.log.size()
            << " records, " << result.reports.size() << " report rows -> " << g.out << "\n";
      }
    } else if (*sdm) {
      manifest = {"static-dm", {table_path, templates_path}, {}, {}};
      require_inputs(manifest.inputs);
      const std::string name = source_override.empty() ? fs::path(table_path).stem().string() : source_override;
      const TargetTable table = read_table(read_file(table_path), name);
      const ClassTemplates ct = load_templates(templates_path);
      lab::SourceResult row{name, std::nullopt, table, static_dm(table, Variant::kMostSimilar, ct),
                            static_dm(table, Variant::kLeastSimilar, ct)};
      guard_output(g.out, g.force);
      emit(g.out, lab::write_static_dm_csv({row}), out);
      if (!g.out.empty() && g.out != "-") manifest.outputs = {g.out};
    }

    if (!g.manifest.empty()) {
      if (g.seed) manifest.settings["seed"] = std::to_string(*g.seed);
      guard_output(g.manifest, g.force);
      write_manifest(g.manifest, manifest);
    }
  } catch (const IoError& e) {
    err << "semtarget: " << e.what() << "\n";
    return kIoError;
  } catch (const QualityGateError& e) {
    err << "semtarget: quality gate failed: " << e.what() << "\n";
    return kGateFailure;
  } catch (const ValidationError& e) {
    err << "semtarget: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "semtarget: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

}  // namespace semtarget::cli
