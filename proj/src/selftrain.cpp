#include "lops/selftrain.hpp"

#include <set>

#include <json.hpp>

#include "lops/confidence.hpp"
#include "lops/error.hpp"
#include "lops/eval.hpp"
#include "lops/rng.hpp"

namespace lops {

std::string_view to_string(Selector selector) {
  switch (selector) {
    case Selector::kLops: return "lops";
    case Selector::kProbability: return "probability";
    case Selector::kRandom: return "random";
    case Selector::kEntropy: return "entropy";
    case Selector::kStability: return "stability";
    case Selector::kNone: return "none";
    case Selector::kOptimal: return "optimal";
  }
  return "unknown";
}

Selector parse_selector(std::string_view name) {
  for (auto s : {Selector::kLops, Selector::kProbability, Selector::kRandom, Selector::kEntropy,
                 Selector::kStability, Selector::kNone, Selector::kOptimal}) {
    if (to_string(s) == name) return s;
  }
  if (name == "standard") return Selector::kNone;
  throw ValidationError("unknown selector '" + std::string(name) + "'");
}

void SelfTrainConfig::validate() const {
  if (iterations == 0) throw ValidationError("n_its must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  selection.validate();
  classifier.validate();
}

SelectorOutcome run_selector(const FeatureMatrix& features, const PseudoLabelSet& pseudo,
                             const SelfTrainConfig& config, const GoldLabels& gold,
                             std::size_t iteration) {
  if (config.selector == Selector::kNone) {
    SelectionReport report;
    report.selected = pseudo;
    report.method = "none";
    report.class_counts = pseudo.class_counts();
    report.input_size = pseudo.size();
    return {std::move(report), std::nullopt};
  }
  if (config.selector == Selector::kOptimal) return {optimal_filter(pseudo, gold), std::nullopt};

  ClassifierConfig probe = config.classifier;
  probe.seed = derive_seed(config.seed, "probe", iteration);
  auto lops = lops_select(features, pseudo, probe, config.selection);
  if (config.selector == Selector::kLops) return {std::move(lops.report), std::nullopt};

  // Count-matched baselines take exactly as many documents per class as LOPS did.
  ConfidenceScores scores;
  switch (config.selector) {
    case Selector::kProbability: scores = probability_score(lops.probe, features, pseudo); break;
    case Selector::kEntropy: scores = entropy_confidence(lops.probe, features, pseudo); break;
    case Selector::kStability: scores = stability_confidence(lops.trace, pseudo); break;
    default: scores = random_confidence(pseudo, derive_seed(config.seed, "random-baseline", iteration));
  }
  auto report = topk_select_per_class(scores, lops.report.class_counts, &lops.trace);
  report.method = std::string(to_string(config.selector));
  report.params["tau"] = config.selection.tau;
  report.epochs_trained = lops.report.epochs_trained;
  return {std::move(report), std::move(scores)};
}

namespace {

bool covers(const GoldLabels& gold, const PseudoLabelSet& pseudo) {
  for (const auto& e : pseudo.entries()) {
    if (!gold.contains(e.doc_id)) return false;
  }
  return true;
}

}  // namespace

SelfTrainResult self_train(const std::vector<Document>& docs, const FeatureMatrix& features,
                           const PseudoLabelSet& initial, const SelfTrainConfig& config,
                           const IterationCallback& on_iteration) {
  config.validate();
  if (initial.empty()) throw ValidationError("initial pseudo-label set is empty");
  {
    std::set<LabelId> distinct;
    for (const auto& e : initial.entries()) distinct.insert(e.label);
    if (distinct.size() < 2) throw ValidationError("initial pseudo-labels cover fewer than 2 classes");
  }
  const GoldLabels gold = gold_labels(docs);
  const bool fully_gold = !docs.empty() && gold.size() == docs.size();
  if (config.selector == Selector::kOptimal && !covers(gold, initial)) {
    throw ValidationError("the optimal selector needs gold labels for every pseudo-labeled document");
  }

  std::vector<std::size_t> rows(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) rows[i] = features.row_of(docs[i].id);

  const auto& space = initial.space();
  SelfTrainResult result;
  PseudoLabelSet current = initial;

  for (std::size_t it = 1; it <= config.iterations; ++it) {
    IterationRecord record;
    record.iteration = it;
    record.pseudo_before = current.size();

    record.selection = run_selector(features, current, config, gold, it).report;
    const auto before_counts = current.class_counts();
    for (LabelId j = 0; j < space.size(); ++j) {
      if (before_counts[j] > 0 && record.selection.class_counts[j] == 0) {
        throw ValidationError("iteration " + std::to_string(it) + ": " +
                              record.selection.method + " selection left class '" + space.name(j) +
                              "' empty");
      }
    }
    if (covers(gold, current)) attach_gold_metrics(record.selection, gold);

    ClassifierConfig final_config = config.classifier;
    final_config.seed = derive_seed(config.seed, "final", it);
    auto trained = train(features, record.selection.selected, final_config);
    const auto probs = predict_proba(trained.model, features);

    result.predictions.clear();
    result.predictions.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto row = probs.row(rows[i]);
      const LabelId label = argmax(row);
      result.predictions.push_back({docs[i].id, label, row[label]});
    }
    for (const auto& p : result.predictions) {
      if (p.max_prob > config.delta && !current.contains(p.doc_id)) current.add(p.doc_id, p.label);
    }
    record.pseudo_after = current.size();

    if (fully_gold) {
      std::vector<LabelId> predicted, truth;
      predicted.reserve(docs.size());
      truth.reserve(docs.size());
      for (std::size_t i = 0; i < docs.size(); ++i) {
        predicted.push_back(result.predictions[i].label);
        truth.push_back(*docs[i].gold);
      }
      record.metrics = IterationMetrics{f1_score(predicted, truth, space.size(), Averaging::kMicro),
                                        f1_score(predicted, truth, space.size(), Averaging::kMacro)};
    }
    record.model = std::make_shared<const TrainedModel>(std::move(trained.model));
    if (on_iteration) on_iteration(record);
    result.iterations.push_back(std::move(record));
  }
  result.final_pseudo = std::move(current);
  return result;
}

std::string predictions_to_jsonl(const std::vector<Prediction>& predictions,
                                 const LabelSpace& space) {
  std::string out;
  for (const auto& p : predictions) {
    nlohmann::ordered_json line;
    line["id"] = p.doc_id;
    line["predicted_label"] = space.name(p.label);
    line["max_prob"] = p.max_prob;
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace lops
