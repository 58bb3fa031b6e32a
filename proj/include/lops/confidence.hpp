#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lops/classifier.hpp"
#include "lops/corpus.hpp"

namespace lops {

// Per pseudo-labeled document: correctness of the prediction at every
// completed checkpoint, plus the first checkpoint at which it was correct.
class LearningTrace {
 public:
  LearningTrace() = default;
  // `total_steps` is T, the checkpoint budget of a full run.
  LearningTrace(std::vector<PseudoLabel> tracked, std::size_t total_steps);

  static LearningTrace from_snapshots(const PseudoLabelSet& tracked,
                                      const std::vector<EpochSnapshot>& snapshots,
                                      std::size_t total_steps);

  // Appends one checkpoint's correctness column, one flag per tracked doc.
  void record(const std::vector<bool>& correct);

  std::size_t size() const noexcept { return tracked_.size(); }
  std::size_t total_steps() const noexcept { return total_steps_; }
  std::size_t completed_steps() const noexcept { return completed_; }
  const std::vector<PseudoLabel>& tracked() const noexcept { return tracked_; }

  bool correct_at(std::size_t doc, std::size_t step) const;  // step is 0-based
  // 1-based, empty when never learnt.
  std::optional<std::size_t> first_learnt(std::size_t doc) const { return first_learnt_.at(doc); }
  std::size_t times_correct(std::size_t doc) const { return times_correct_.at(doc); }

 private:
  std::vector<PseudoLabel> tracked_;
  std::size_t total_steps_ = 0;
  std::size_t completed_ = 0;
  std::vector<std::vector<bool>> bitmap_;  // [doc][step]
  std::vector<std::optional<std::size_t>> first_learnt_;
  std::vector<std::size_t> times_correct_;
};

struct ScoredLabel {
  std::string doc_id;
  LabelId label;
  double score;
};

struct ConfidenceScores {
  std::string function;
  LabelSpace space;
  std::vector<ScoredLabel> entries;  // same order as the pseudo-label set
};

// 1 - t/T for first-learnt checkpoint t, 0 when never learnt.
ConfidenceScores learning_order(const LearningTrace& trace, const PseudoLabelSet& pseudo);

// f(x)[w(x)]
ConfidenceScores probability_score(const TrainedModel& model, const FeatureMatrix& features,
                                   const PseudoLabelSet& pseudo);

// 1 - H(f(x)) / ln M
ConfidenceScores entropy_confidence(const TrainedModel& model, const FeatureMatrix& features,
                                    const PseudoLabelSet& pseudo);
double normalized_entropy_confidence(std::span<const double> probabilities);

// Fraction of completed checkpoints at which the prediction matched w(x).
ConfidenceScores stability_confidence(const LearningTrace& trace, const PseudoLabelSet& pseudo);

ConfidenceScores random_confidence(const PseudoLabelSet& pseudo, std::uint64_t seed);

// doc_id,pseudo_label,function,score
void write_confidence_csv(std::ostream& out, const ConfidenceScores& scores);
ConfidenceScores read_confidence_csv(std::istream& in, LabelSpace space);

}  // namespace lops
