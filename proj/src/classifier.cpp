#include "lops/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "lops/error.hpp"
#include "lops/rng.hpp"

namespace lops {

void ClassifierConfig::validate() const {
  if (epochs == 0) throw ValidationError("epochs must be at least 1");
  if (batch_size == 0) throw ValidationError("batch_size must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be positive");
  }
  if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty)) {
    throw ValidationError("l2_penalty must be non-negative");
  }
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw ValidationError("init_scale must be non-negative");
  }
}

LinearParams::LinearParams(std::size_t num_classes, std::size_t num_features)
    : classes(num_classes),
      features(num_features),
      weights(num_classes * num_features, 0.0),
      bias(num_classes, 0.0) {}

bool LinearParams::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(weights.begin(), weights.end(), finite) &&
         std::all_of(bias.begin(), bias.end(), finite);
}

void compute_logits(const LinearParams& params, const SparseRow& row, std::span<double> logits) {
  for (std::size_t j = 0; j < params.classes; ++j) {
    const double* w = params.weights.data() + j * params.features;
    double z = params.bias[j];
    for (const auto& e : row) z += w[e.column] * e.value;
    logits[j] = z;
  }
}

void softmax(std::span<double> values) {
  if (values.empty()) return;
  const double peak = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (auto& v : values) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (auto& v : values) v /= sum;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < values.size(); ++j) {
    if (values[j] > values[best]) best = j;
  }
  return best;
}

namespace {

// -log softmax(z)[label], computed via log-sum-exp.
double cross_entropy(std::span<const double> logits, LabelId label) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - peak);
  return peak + std::log(sum) - logits[label];
}

double squared_norm(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

}  // namespace

double objective(const LinearParams& params, std::span<const LabeledRow> examples,
                 double l2_penalty) {
  std::vector<double> logits(params.classes);
  double loss = 0.0;
  for (const auto& ex : examples) {
    compute_logits(params, *ex.row, logits);
    loss += cross_entropy(logits, ex.label);
  }
  if (!examples.empty()) loss /= static_cast<double>(examples.size());
  return loss + 0.5 * l2_penalty * squared_norm(params.weights);
}

LinearParams objective_gradient(const LinearParams& params, std::span<const LabeledRow> examples,
                                double l2_penalty) {
  LinearParams grad(params.classes, params.features);
  std::vector<double> probs(params.classes);
  const double scale = examples.empty() ? 0.0 : 1.0 / static_cast<double>(examples.size());
  for (const auto& ex : examples) {
    compute_logits(params, *ex.row, probs);
    softmax(probs);
    probs[ex.label] -= 1.0;
    for (std::size_t j = 0; j < params.classes; ++j) {
      const double g = probs[j] * scale;
      grad.bias[j] += g;
      for (const auto& e : *ex.row) grad.weight(j, e.column) += g * e.value;
    }
  }
  for (std::size_t i = 0; i < grad.weights.size(); ++i) {
    grad.weights[i] += l2_penalty * params.weights[i];
  }
  return grad;
}

std::size_t steps_per_epoch(const ClassifierConfig& config, std::size_t train_size) {
  if (config.snapshot_every_batches == 0) return 1;
  const std::size_t batches = (train_size + config.batch_size - 1) / config.batch_size;
  return std::max<std::size_t>(
      1, (batches + config.snapshot_every_batches - 1) / config.snapshot_every_batches);
}

namespace {

class Trainer {
 public:
  Trainer(const FeatureMatrix& features, const PseudoLabelSet& labels,
          const ClassifierConfig& config, const PseudoLabelSet& tracked)
      : config_(config),
        params_(labels.space().size(), features.columns()),
        probs_(labels.space().size()) {
    examples_.reserve(labels.size());
    for (const auto& e : labels.entries()) {
      examples_.push_back({&features.row(features.row_of(e.doc_id)), e.label});
    }
    tracked_.reserve(tracked.size());
    for (const auto& e : tracked.entries()) {
      if (e.label >= params_.classes) {
        throw ValidationError("tracked label outside the training label space");
      }
      tracked_.push_back({&features.row(features.row_of(e.doc_id)), e.label});
    }
    Rng init(derive_seed(config.seed, "classifier-init"));
    for (auto& w : params_.weights) w = (2.0 * init.uniform() - 1.0) * config.init_scale;
  }

  const LinearParams& params() const { return params_; }

  void step(std::span<const std::size_t> batch, std::size_t epoch, std::size_t batch_index) {
    // Gradient coefficients are taken at the pre-update parameters, so the
    // sparse updates below form one exact mini-batch gradient step.
    coefficients_.assign(batch.size() * params_.classes, 0.0);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& ex = examples_[batch[b]];
      compute_logits(params_, *ex.row, probs_);
      const double loss = cross_entropy(probs_, ex.label);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index + 1));
      }
      softmax(probs_);
      probs_[ex.label] -= 1.0;
      std::copy(probs_.begin(), probs_.end(),
                coefficients_.begin() + static_cast<std::ptrdiff_t>(b * params_.classes));
    }

    const double rate = config_.learning_rate / static_cast<double>(batch.size());
    if (config_.l2_penalty > 0.0) {
      const double decay = 1.0 - config_.learning_rate * config_.l2_penalty;
      for (auto& w : params_.weights) w *= decay;
    }
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& ex = examples_[batch[b]];
      const double* g = coefficients_.data() + b * params_.classes;
      for (std::size_t j = 0; j < params_.classes; ++j) {
        const double delta = rate * g[j];
        params_.bias[j] -= delta;
        double* w = params_.weights.data() + j * params_.features;
        for (const auto& e : *ex.row) w[e.column] -= delta * e.value;
      }
    }
  }

  EpochSnapshot snapshot(std::size_t epoch, std::size_t step) {
    EpochSnapshot snap;
    snap.epoch = epoch;
    snap.step = step;
    snap.predicted.reserve(tracked_.size());
    snap.pseudo_label_prob.reserve(tracked_.size());
    for (const auto& ex : tracked_) {
      compute_logits(params_, *ex.row, probs_);
      softmax(probs_);
      snap.predicted.push_back(argmax(probs_));
      snap.pseudo_label_prob.push_back(probs_[ex.label]);
    }
    snap.loss = objective(params_, examples_, config_.l2_penalty);
    if (!std::isfinite(snap.loss) || !params_.all_finite()) {
      throw NumericError("non-finite parameters after epoch " + std::to_string(epoch));
    }
    return snap;
  }

  std::size_t size() const { return examples_.size(); }

 private:
  const ClassifierConfig& config_;
  LinearParams params_;
  std::vector<LabeledRow> examples_;
  std::vector<LabeledRow> tracked_;
  std::vector<double> probs_;
  std::vector<double> coefficients_;
};

}  // namespace

TrainResult train(const FeatureMatrix& features, const PseudoLabelSet& labels,
                  const ClassifierConfig& config, const EpochObserver& observer,
                  const PseudoLabelSet* tracked) {
  config.validate();
  std::set<LabelId> distinct;
  for (const auto& e : labels.entries()) distinct.insert(e.label);
  if (distinct.size() < 2) {
    throw ValidationError("training needs at least two distinct pseudo-labels, got " +
                          std::to_string(distinct.size()));
  }

  Trainer trainer(features, labels, config, tracked != nullptr ? *tracked : labels);
  Rng shuffler(derive_seed(config.seed, "classifier-shuffle"));

  const std::size_t n = trainer.size();
  const std::size_t batches = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t every = config.snapshot_every_batches;

  TrainResult result;
  result.planned_steps = config.epochs * steps_per_epoch(config, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs && !result.stopped_early; ++epoch) {
    if (config.shuffle_per_epoch) shuffler.shuffle(std::span<std::size_t>(order));
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(n, begin + config.batch_size);
      trainer.step(std::span<const std::size_t>(order).subspan(begin, end - begin), epoch, b);

      const bool checkpoint = b + 1 == batches || (every > 0 && (b + 1) % every == 0);
      if (!checkpoint) continue;
      result.snapshots.push_back(trainer.snapshot(epoch, ++step));
      if (observer && observer(result.snapshots.back())) {
        result.stopped_early = true;
        break;
      }
    }
  }

  result.model = TrainedModel{trainer.params(), labels.space(), features.vocabulary_ptr(), config};
  return result;
}

namespace {

void check_compatible(const TrainedModel& model, const FeatureMatrix& features) {
  if (model.params.features != features.columns() ||
      (model.vocabulary && !model.vocabulary->same_terms(features.vocabulary()))) {
    throw ValidationError("feature vocabulary does not match the model vocabulary");
  }
}

}  // namespace

ProbabilityMatrix predict_proba(const TrainedModel& model, const FeatureMatrix& features) {
  check_compatible(model, features);
  ProbabilityMatrix out(features.rows(), model.params.classes);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto row = out.row(i);
    compute_logits(model.params, features.row(i), row);
    softmax(row);
  }
  return out;
}

std::vector<double> predict_row(const TrainedModel& model, const SparseRow& row) {
  std::vector<double> probs(model.params.classes);
  for (const auto& e : row) {
    if (e.column >= model.params.features) {
      throw ValidationError("feature column outside the model vocabulary");
    }
  }
  compute_logits(model.params, row, probs);
  softmax(probs);
  return probs;
}

}  // namespace lops
