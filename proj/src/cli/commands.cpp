#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lops/classifier.hpp"
#include "lops/cli.hpp"
#include "lops/confidence.hpp"
#include "lops/corpus.hpp"
#include "lops/corpus_io.hpp"
#include "lops/error.hpp"
#include "lops/eval.hpp"
#include "lops/rng.hpp"
#include "lops/selection.hpp"
#include "lops/selftrain.hpp"

namespace lops::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& path, const char* key) {
  if (path.empty()) throw ValidationError(std::string("'") + key + "' is not set");
  if (!fs::is_regular_file(path)) {
    throw ValidationError(std::string(key) + " file not found: " + path.string());
  }
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["corpus"] = c.corpus.string();
  j["lexicon"] = c.lexicon.string();
  j["pseudo_labels"] = c.pseudo_labels.string();
  j["tau"] = c.tau;
  j["delta"] = c.delta;
  j["epochs"] = c.epochs;
  j["n_its"] = c.n_its;
  j["selector"] = c.selector;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["l2_penalty"] = c.l2_penalty;
  j["init_scale"] = c.init_scale;
  j["shuffle"] = c.shuffle;
  j["granularity"] = c.granularity;
  j["weighting"] = c.weighting;
  j["min_df"] = c.min_df;
  j["rng_seed"] = c.rng_seed;
  return j;
}

ordered_json selection_summary(const SelectionReport& report) {
  const auto& space = report.selected.space();
  ordered_json j;
  j["method"] = report.method;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : report.params) params[k] = v;
  j["params"] = std::move(params);
  j["input_size"] = report.input_size;
  j["selected_count"] = report.selected.size();
  ordered_json counts = ordered_json::object();
  for (LabelId l = 0; l < report.class_counts.size(); ++l) counts[space.name(l)] = report.class_counts[l];
  j["class_counts"] = std::move(counts);
  if (report.epochs_trained) j["epochs_trained"] = *report.epochs_trained;
  j["warnings"] = report.warnings;
  if (report.noise) j["noise"] = *report.noise;
  if (report.coverage) j["coverage"] = *report.coverage;
  return j;
}

// Corpus, label space and pseudo-labels shared by most commands.
struct Inputs {
  LabelSpace space;
  std::vector<Document> docs;
  std::optional<SeedLexicon> lexicon;
  PseudoLabelSet pseudo;
  GoldLabels gold;
};

SeedLexicon align_lexicon(const SeedLexicon& lexicon, const LabelSpace& space) {
  SeedLexicon out{space, std::vector<std::vector<std::string>>(space.size())};
  for (LabelId j = 0; j < lexicon.space.size(); ++j) {
    out.seeds[space.id(lexicon.space.name(j))] = lexicon.seeds[j];
  }
  return out;
}

Inputs load_inputs(const RunConfig& config, bool need_pseudo) {
  require_file(config.corpus, "corpus");
  if (!config.lexicon.empty()) require_file(config.lexicon, "lexicon");
  if (!config.pseudo_labels.empty()) require_file(config.pseudo_labels, "pseudo_labels");

  auto loaded = load_corpus(config.corpus);
  Inputs in;
  in.space = loaded.space.value_or(LabelSpace{});
  in.docs = std::move(loaded.docs);
  if (!config.lexicon.empty()) {
    auto lexicon = load_lexicon(config.lexicon);
    in.space = in.space.merged(lexicon.space);
    in.lexicon = align_lexicon(lexicon, in.space);
  }
  if (!config.pseudo_labels.empty()) {
    in.pseudo = load_pseudo_labels(config.pseudo_labels, in.space);
    in.space = in.pseudo.space();
    if (in.lexicon) in.lexicon = align_lexicon(*in.lexicon, in.space);
  } else if (in.lexicon) {
    in.pseudo = string_match_pseudolabel(in.docs, *in.lexicon);
  } else if (need_pseudo) {
    throw ValidationError("either 'pseudo_labels' or 'lexicon' must be set");
  }
  if (need_pseudo) {
    std::unordered_map<std::string, bool> known;
    for (const auto& d : in.docs) known.emplace(d.id, true);
    for (const auto& e : in.pseudo.entries()) {
      if (!known.contains(e.doc_id)) {
        throw DataError("pseudo-labeled document '" + e.doc_id + "' is not in the corpus");
      }
    }
  }
  in.gold = gold_labels(in.docs);
  return in;
}

bool gold_covers(const GoldLabels& gold, const PseudoLabelSet& pseudo) {
  for (const auto& e : pseudo.entries()) {
    if (!gold.contains(e.doc_id)) return false;
  }
  return true;
}

struct ProbeRun {
  TrainResult trained;
  LearningTrace trace;
};

// Full T-epoch probing run, no early stopping.
ProbeRun probe(const FeatureMatrix& features, const PseudoLabelSet& pseudo, const RunConfig& config) {
  auto classifier = config.classifier();
  classifier.seed = derive_seed(config.rng_seed, "probe", 1);
  auto trained = train(features, pseudo, classifier);
  auto trace = LearningTrace::from_snapshots(pseudo, trained.snapshots, trained.planned_steps);
  return {std::move(trained), std::move(trace)};
}

std::string iteration_file(std::size_t iteration) {
  std::ostringstream name;
  name << "iteration_" << std::setw(2) << std::setfill('0') << iteration << ".json";
  return name.str();
}

}  // namespace

void cmd_pseudo_label(const RunConfig& config, std::ostream& log) {
  require_file(config.corpus, "corpus");
  require_file(config.lexicon, "lexicon");
  auto in = load_inputs(config, true);

  ordered_json report;
  report["documents"] = in.docs.size();
  report["labeled"] = in.pseudo.size();
  report["source"] = in.pseudo.source();
  ordered_json counts = ordered_json::object();
  const auto per_class = in.pseudo.class_counts();
  for (LabelId j = 0; j < in.space.size(); ++j) counts[in.space.name(j)] = per_class[j];
  report["class_counts"] = std::move(counts);
  if (!in.pseudo.empty() && gold_covers(in.gold, in.pseudo)) {
    report["noise_ratio"] = noise_ratio(in.pseudo, in.gold);
  }

  write_file_atomic(config.output_dir / "pseudo_labels.jsonl",
                    render([&](std::ostream& o) { write_pseudo_labels(o, in.pseudo); }));
  write_file_atomic(config.output_dir / "pseudo_label_report.json", dump(report));
  log << "labeled " << in.pseudo.size() << " of " << in.docs.size() << " documents";
  if (report.contains("noise_ratio")) log << ", noise ratio " << report["noise_ratio"].get<double>();
  log << '\n';
}

void cmd_select(const RunConfig& config, std::ostream& log) {
  auto in = load_inputs(config, true);
  const auto features = vectorize(in.docs, config.vectorizer());
  auto st = config.self_train();

  SelectionReport report;
  std::optional<ConfidenceScores> scores;
  if (config.gamma) {
    if (st.selector == Selector::kNone || st.selector == Selector::kOptimal) {
      throw ValidationError("'gamma' needs a confidence-function selector");
    }
    if (st.selector == Selector::kRandom) {
      scores = random_confidence(in.pseudo, derive_seed(config.rng_seed, "random-baseline", 1));
    } else {
      auto run = probe(features, in.pseudo, config);
      switch (st.selector) {
        case Selector::kLops: scores = learning_order(run.trace, in.pseudo); break;
        case Selector::kProbability: scores = probability_score(run.trained.model, features, in.pseudo); break;
        case Selector::kEntropy: scores = entropy_confidence(run.trained.model, features, in.pseudo); break;
        default: scores = stability_confidence(run.trace, in.pseudo);
      }
    }
    report = threshold_select(*scores, *config.gamma);
  } else {
    auto outcome = run_selector(features, in.pseudo, st, in.gold, 1);
    report = std::move(outcome.report);
    scores = std::move(outcome.scores);
  }
  if (gold_covers(in.gold, in.pseudo)) attach_gold_metrics(report, in.gold);

  write_file_atomic(config.output_dir / "selection.json", report_to_json(report) + "\n");
  write_file_atomic(config.output_dir / "selected.jsonl",
                    render([&](std::ostream& o) { write_pseudo_labels(o, report.selected); }));
  if (scores) {
    write_file_atomic(config.output_dir / ("confidence_" + scores->function + ".csv"),
                      render([&](std::ostream& o) { write_confidence_csv(o, *scores); }));
  }
  for (const auto& w : report.warnings) log << "warning: " << w << '\n';
  log << report.method << " selected " << report.selected.size() << " of " << report.input_size;
  if (report.noise) log << ", noise " << *report.noise;
  log << '\n';
}

void cmd_self_train(const RunConfig& config, std::ostream& log) {
  auto in = load_inputs(config, true);
  const auto st = config.self_train();
  const auto features = vectorize(in.docs, config.vectorizer());

  ordered_json manifest;
  manifest["command"] = "self-train";
  manifest["config"] = config_json(config);
  manifest["documents"] = in.docs.size();
  manifest["initial_pseudo_labels"] = in.pseudo.size();
  if (!in.pseudo.empty() && gold_covers(in.gold, in.pseudo)) {
    manifest["initial_noise_ratio"] = noise_ratio(in.pseudo, in.gold);
  }
  manifest["iterations"] = ordered_json::array();
  manifest["complete"] = false;

  const fs::path manifest_path = config.output_dir / "manifest.json";
  auto on_iteration = [&](const IterationRecord& record) {
    ordered_json it;
    it["iteration"] = record.iteration;
    it["pseudo_before"] = record.pseudo_before;
    it["pseudo_after"] = record.pseudo_after;
    it["selection"] = selection_summary(record.selection);
    if (record.metrics) {
      it["metrics"] = {{"micro_f1", record.metrics->micro_f1}, {"macro_f1", record.metrics->macro_f1}};
    }
    write_file_atomic(config.output_dir / "iterations" / iteration_file(record.iteration),
                      report_to_json(record.selection) + "\n");
    manifest["iterations"].push_back(std::move(it));
    write_file_atomic(manifest_path, dump(manifest));

    log << "iteration " << record.iteration << ": selected " << record.selection.selected.size()
        << ", pseudo-labels " << record.pseudo_before << " -> " << record.pseudo_after;
    if (record.metrics) {
      log << ", micro-F1 " << record.metrics->micro_f1 << ", macro-F1 " << record.metrics->macro_f1;
    }
    log << '\n';
  };

  auto result = self_train(in.docs, features, in.pseudo, st, on_iteration);

  write_file_atomic(config.output_dir / "predictions.jsonl",
                    predictions_to_jsonl(result.predictions, in.space));
  write_file_atomic(config.output_dir / "model.json",
                    model_to_json(*result.iterations.back().model) + "\n");
  if (const auto& last = result.iterations.back(); last.metrics) {
    manifest["final"] = {{"micro_f1", last.metrics->micro_f1}, {"macro_f1", last.metrics->macro_f1}};
  }
  manifest["final_pseudo_labels"] = result.final_pseudo.size();
  manifest["complete"] = true;
  write_file_atomic(manifest_path, dump(manifest));
}

void cmd_nc_curve(const RunConfig& config, std::ostream& log) {
  auto in = load_inputs(config, true);
  if (in.pseudo.empty()) throw ValidationError("no pseudo-labeled documents");
  if (!gold_covers(in.gold, in.pseudo)) {
    throw ValidationError("NC-curves need gold labels for every pseudo-labeled document");
  }
  const auto features = vectorize(in.docs, config.vectorizer());
  auto run = probe(features, in.pseudo, config);

  std::vector<ConfidenceScores> all;
  all.push_back(learning_order(run.trace, in.pseudo));
  all.push_back(probability_score(run.trained.model, features, in.pseudo));
  all.push_back(entropy_confidence(run.trained.model, features, in.pseudo));
  all.push_back(stability_confidence(run.trace, in.pseudo));
  all.push_back(random_confidence(in.pseudo, derive_seed(config.rng_seed, "random-baseline", 1)));

  ordered_json summary;
  summary["pseudo_labels"] = in.pseudo.size();
  summary["noise_ratio"] = noise_ratio(in.pseudo, in.gold);
  double clean = 0.0;
  ordered_json aunc_values = ordered_json::object();
  for (const auto& scores : all) {
    const auto curve = nc_curve(scores, in.gold);
    clean = curve.clean_fraction;
    aunc_values[scores.function] = aunc(curve);
    write_file_atomic(config.output_dir / ("nc_" + scores.function + ".csv"),
                      render([&](std::ostream& o) { write_nc_curve_csv(o, curve); }));
    write_file_atomic(config.output_dir / ("confidence_" + scores.function + ".csv"),
                      render([&](std::ostream& o) { write_confidence_csv(o, scores); }));
    log << scores.function << " AUNC " << aunc_values[scores.function].get<double>() << '\n';
  }
  summary["clean_fraction"] = clean;
  summary["aunc"] = std::move(aunc_values);

  const auto refs = reference_curves(clean);
  ordered_json ref_aunc = ordered_json::object();
  for (const auto* curve : {&refs.optimal, &refs.optimal_unnormalized, &refs.random}) {
    ref_aunc[curve->function] = aunc(*curve);
    write_file_atomic(config.output_dir / ("nc_" + curve->function + ".csv"),
                      render([&](std::ostream& o) { write_nc_curve_csv(o, *curve); }));
  }
  summary["reference_aunc"] = std::move(ref_aunc);
  write_file_atomic(config.output_dir / "aunc_summary.json", dump(summary));
}

void cmd_evaluate(const RunConfig& config, std::ostream& log) {
  auto in = load_inputs(config, false);
  if (in.gold.empty()) throw ValidationError("evaluation needs gold labels in the corpus");

  ordered_json metrics;
  if (!config.predictions.empty()) {
    require_file(config.predictions, "predictions");
    std::ifstream file(config.predictions);
    std::vector<LabelId> predicted, truth;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(file, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      ordered_json record;
      try {
        record = ordered_json::parse(line);
        const auto id = record.at("id").get<std::string>();
        const auto label = record.at("predicted_label").get<std::string>();
        auto g = in.gold.find(id);
        if (g == in.gold.end()) throw ValidationError("document '" + id + "' has no gold label");
        predicted.push_back(in.space.id(label));
        truth.push_back(g->second);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, e.what());
      }
    }
    metrics["micro_f1"] = f1_score(predicted, truth, in.space.size(), Averaging::kMicro);
    metrics["macro_f1"] = f1_score(predicted, truth, in.space.size(), Averaging::kMacro);
  }
  if (!config.confidences.empty()) {
    require_file(config.confidences, "confidences");
    std::ifstream file(config.confidences);
    const auto scores = read_confidence_csv(file, in.space);
    metrics["aunc"] = aunc(nc_curve(scores, in.gold));
  }
  if (!in.pseudo.empty() && gold_covers(in.gold, in.pseudo)) {
    metrics["noise_ratio"] = noise_ratio(in.pseudo, in.gold);
  }
  if (metrics.empty()) {
    throw ValidationError("nothing to evaluate: set 'predictions', 'confidences' or pseudo-labels");
  }
  write_file_atomic(config.output_dir / "metrics.json", dump(metrics));
  log << metrics.dump() << '\n';
}

void cmd_synth(const RunConfig& config, std::ostream& log) {
  const auto corpus = synth_corpus(config.synth());
  const double noise = noise_ratio(corpus.pseudo, corpus.docs);
  write_file_atomic(config.output_dir / "corpus.jsonl",
                    render([&](std::ostream& o) { write_corpus(o, corpus.docs, &corpus.space); }));
  write_file_atomic(config.output_dir / "pseudo_labels.jsonl",
                    render([&](std::ostream& o) { write_pseudo_labels(o, corpus.pseudo); }));
  ordered_json report;
  report["documents"] = corpus.docs.size();
  report["classes"] = corpus.space.size();
  report["flip_rate"] = config.flip_rate;
  report["noise_ratio"] = noise;
  write_file_atomic(config.output_dir / "synth_report.json", dump(report));
  log << "wrote " << corpus.docs.size() << " documents, noise ratio " << noise << '\n';
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-order pseudo-label selection for weakly supervised text classification"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    void (*fn)(const RunConfig&, std::ostream&);
  };
  const std::vector<Command> commands = {
      {"pseudo-label", "Pseudo-label a corpus by seed-word matching", cmd_pseudo_label},
      {"select", "Select pseudo-labels with LOPS or a baseline", cmd_select},
      {"self-train", "Run the self-training loop", cmd_self_train},
      {"nc-curve", "Noise-coverage curves and AUNC per confidence function", cmd_nc_curve},
      {"evaluate", "F1, noise ratio and AUNC against gold labels", cmd_evaluate},
      {"synth", "Generate a synthetic corpus with controlled label noise", cmd_synth},
  };

  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "Key-value config file");
    for (const auto& key : RunConfig::keys()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      sub->add_option(flag, overrides[key], "Overrides '" + key + "'");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream help;
    const int code = app.exit(e, help, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) apply_config_file(config, fs::path(config_path));
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      for (const auto& key : RunConfig::keys()) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (subs[i]->count(flag) > 0) config.set(key, overrides[key]);
      }
      commands[i].fn(config, out);
    }
    return kOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace lops::cli
