#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lops/corpus.hpp"

namespace lops {

struct ClassifierConfig {
  std::size_t epochs = 4;  // T
  std::size_t batch_size = 1;
  double learning_rate = 0.1;
  double l2_penalty = 0.0;
  std::uint64_t seed = 0;
  bool shuffle_per_epoch = true;
  // Initial weights are uniform in [-init_scale, init_scale].
  double init_scale = 0.01;
  // 0: snapshot at epoch ends only. k > 0: also every k batches.
  std::size_t snapshot_every_batches = 0;

  void validate() const;
};

// Multinomial logistic regression parameters, weights row-major classes x features.
struct LinearParams {
  std::size_t classes = 0;
  std::size_t features = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  LinearParams() = default;
  LinearParams(std::size_t num_classes, std::size_t num_features);

  double& weight(std::size_t label, std::size_t column) { return weights[label * features + column]; }
  double weight(std::size_t label, std::size_t column) const {
    return weights[label * features + column];
  }
  bool all_finite() const;
};

// Writes W x + b into `logits` (size classes).
void compute_logits(const LinearParams& params, const SparseRow& row, std::span<double> logits);

// In-place, max-shifted softmax.
void softmax(std::span<double> values);

// Lowest index among maximal entries.
std::size_t argmax(std::span<const double> values);

// Mean softmax cross-entropy over `examples` plus (l2 / 2) * ||W||^2. The bias
// is not penalised.
struct LabeledRow {
  const SparseRow* row;
  LabelId label;
};

double objective(const LinearParams& params, std::span<const LabeledRow> examples, double l2_penalty);

// Analytic gradient of `objective`, same layout as params.
LinearParams objective_gradient(const LinearParams& params, std::span<const LabeledRow> examples,
                                double l2_penalty);

struct TrainedModel {
  LinearParams params;
  LabelSpace space;
  std::shared_ptr<const Vocabulary> vocabulary;
  ClassifierConfig config;
};

// Evaluation of the model at one checkpoint over the tracked documents.
struct EpochSnapshot {
  std::size_t epoch = 0;  // 1-based
  std::size_t step = 0;   // 1-based checkpoint index; equals epoch at epoch granularity
  std::vector<LabelId> predicted;        // argmax, aligned with the tracked set
  std::vector<double> pseudo_label_prob;  // f(x)[w(x)]
  double loss = 0.0;                      // full training objective
};

// Return true to stop training after this snapshot.
using EpochObserver = std::function<bool(const EpochSnapshot&)>;

struct TrainResult {
  TrainedModel model;
  std::vector<EpochSnapshot> snapshots;
  std::size_t planned_steps = 0;  // checkpoints a full run would produce
  bool stopped_early = false;
};

// Mini-batch SGD. Snapshots track `labels` unless `tracked` is given.
TrainResult train(const FeatureMatrix& features, const PseudoLabelSet& labels,
                  const ClassifierConfig& config, const EpochObserver& observer = {},
                  const PseudoLabelSet* tracked = nullptr);

// Checkpoints per epoch given the training set size.
std::size_t steps_per_epoch(const ClassifierConfig& config, std::size_t train_size);

class ProbabilityMatrix {
 public:
  ProbabilityMatrix(std::size_t rows, std::size_t classes)
      : classes_(classes), values_(rows * classes, 0.0) {}

  std::size_t rows() const noexcept { return classes_ == 0 ? 0 : values_.size() / classes_; }
  std::size_t classes() const noexcept { return classes_; }
  std::span<const double> row(std::size_t index) const {
    return {values_.data() + index * classes_, classes_};
  }
  std::span<double> row(std::size_t index) { return {values_.data() + index * classes_, classes_}; }

 private:
  std::size_t classes_;
  std::vector<double> values_;
};

// Rows aligned with features.doc_ids().
ProbabilityMatrix predict_proba(const TrainedModel& model, const FeatureMatrix& features);

// Probabilities for a single feature row.
std::vector<double> predict_row(const TrainedModel& model, const SparseRow& row);

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

}  // namespace lops
