#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lops/classifier.hpp"
#include "lops/confidence.hpp"
#include "lops/corpus.hpp"

namespace lops {

struct SelectionReport {
  PseudoLabelSet selected;
  std::string method;
  std::map<std::string, double> params;
  std::vector<std::size_t> class_counts;
  std::size_t input_size = 0;
  std::optional<std::size_t> epochs_trained;
  std::vector<LabelId> under_quota;  // classes that never reached their quota
  std::vector<std::string> warnings;
  std::optional<double> noise;
  std::optional<double> coverage;
};

struct SelectionParams {
  double tau = 50.0;  // percent, in (0, 100]

  void validate() const;
};

// Smallest k with k / n >= tau%.
std::size_t lops_quota(double tau, std::size_t class_size);

// Online LOPS state. At every checkpoint, admits documents in ascending
// doc_id order that are predicted as their pseudo-label while their class is
// below tau%.
class LopsOnline {
 public:
  LopsOnline(const PseudoLabelSet& pseudo, const SelectionParams& params, std::size_t total_steps);

  // Predictions aligned with the pseudo-label set; true once every class
  // has reached tau%.
  bool observe(const std::vector<LabelId>& predicted);
  bool done() const;

  SelectionReport report() const;
  const LearningTrace& trace() const noexcept { return trace_; }

 private:
  const PseudoLabelSet* pseudo_;
  double tau_;
  std::vector<std::size_t> sizes_;
  LearningTrace trace_;
  std::vector<std::size_t> canonical_;
  std::vector<bool> selected_;
  std::vector<std::size_t> taken_;
};

struct LopsResult {
  SelectionReport report;
  LearningTrace trace;
  TrainedModel probe;  // state at the last trained epoch
};

// Trains a probing classifier, feeding every checkpoint to LopsOnline, and
// stops once every class reaches tau%.
LopsResult lops_select(const FeatureMatrix& features, const PseudoLabelSet& pseudo,
                       const ClassifierConfig& config, const SelectionParams& params);

// {d : score(d) > gamma}
SelectionReport threshold_select(const ConfidenceScores& scores, double gamma);

enum class TopkMode { kGlobal, kStratified };

// Sorted by (score desc, first-learnt asc when a trace is given, doc_id asc).
SelectionReport topk_select(const ConfidenceScores& scores, std::size_t count, TopkMode mode,
                            const LearningTrace* trace = nullptr);

// Per-class top counts[j] within each class, same ordering as topk_select.
SelectionReport topk_select_per_class(const ConfidenceScores& scores,
                                      const std::vector<std::size_t>& counts,
                                      const LearningTrace* trace = nullptr);

// Largest-remainder apportionment of `count` proportional to `sizes`;
// equal remainders go to the lower class index.
std::vector<std::size_t> apportion(std::size_t count, const std::vector<std::size_t>& sizes);

// Keeps exactly the entries whose pseudo-label matches the gold label.
SelectionReport optimal_filter(const PseudoLabelSet& pseudo, const GoldLabels& gold);

// Fills noise and coverage from gold labels (noise left empty for an empty selection).
void attach_gold_metrics(SelectionReport& report, const GoldLabels& gold);

std::string report_to_json(const SelectionReport& report, int indent = 2);

}  // namespace lops
