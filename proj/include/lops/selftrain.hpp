#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lops/classifier.hpp"
#include "lops/confidence.hpp"
#include "lops/corpus.hpp"
#include "lops/selection.hpp"

namespace lops {

enum class Selector { kLops, kProbability, kRandom, kEntropy, kStability, kNone, kOptimal };

std::string_view to_string(Selector selector);
Selector parse_selector(std::string_view name);

struct SelfTrainConfig {
  std::size_t iterations = 5;  // n_its
  double delta = 0.6;          // bootstrap probability threshold
  SelectionParams selection;
  ClassifierConfig classifier;
  Selector selector = Selector::kLops;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationMetrics {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  std::size_t pseudo_before = 0;
  std::size_t pseudo_after = 0;
  SelectionReport selection;
  std::optional<IterationMetrics> metrics;  // when every document has a gold label
  std::shared_ptr<const TrainedModel> model;
};

struct Prediction {
  std::string doc_id;
  LabelId label;
  double max_prob;
};

struct SelfTrainResult {
  std::vector<Prediction> predictions;  // document order
  std::vector<IterationRecord> iterations;
  PseudoLabelSet final_pseudo;
};

struct SelectorOutcome {
  SelectionReport report;
  std::optional<ConfidenceScores> scores;  // baselines only
};

// One selection step of the loop; `iteration` feeds the sub-seeds.
SelectorOutcome run_selector(const FeatureMatrix& features, const PseudoLabelSet& pseudo,
                             const SelfTrainConfig& config, const GoldLabels& gold,
                             std::size_t iteration);

using IterationCallback = std::function<void(const IterationRecord&)>;

// Selection, training on the selection, prediction over every document and
// augmentation with predictions above delta; existing pseudo-labels are never
// overwritten.
SelfTrainResult self_train(const std::vector<Document>& docs, const FeatureMatrix& features,
                           const PseudoLabelSet& initial, const SelfTrainConfig& config,
                           const IterationCallback& on_iteration = {});

std::string predictions_to_jsonl(const std::vector<Prediction>& predictions,
                                 const LabelSpace& space);

}  // namespace lops
