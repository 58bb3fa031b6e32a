#include "lops/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "lops/error.hpp"
#include "lops/rng.hpp"

namespace lops {

LearningTrace::LearningTrace(std::vector<PseudoLabel> tracked, std::size_t total_steps)
    : tracked_(std::move(tracked)),
      total_steps_(total_steps),
      bitmap_(tracked_.size()),
      first_learnt_(tracked_.size()),
      times_correct_(tracked_.size(), 0) {
  if (total_steps_ == 0) throw ValidationError("learning trace needs T >= 1");
}

LearningTrace LearningTrace::from_snapshots(const PseudoLabelSet& tracked,
                                            const std::vector<EpochSnapshot>& snapshots,
                                            std::size_t total_steps) {
  LearningTrace trace(tracked.entries(), total_steps);
  std::vector<bool> column(tracked.size());
  for (const auto& snap : snapshots) {
    if (snap.predicted.size() != tracked.size()) {
      throw ValidationError("snapshot does not cover the tracked set");
    }
    for (std::size_t i = 0; i < tracked.size(); ++i) {
      column[i] = snap.predicted[i] == tracked.entries()[i].label;
    }
    trace.record(column);
  }
  return trace;
}

void LearningTrace::record(const std::vector<bool>& correct) {
  if (correct.size() != tracked_.size()) {
    throw ValidationError("checkpoint column does not cover the tracked set");
  }
  if (completed_ >= total_steps_) {
    throw ValidationError("learning trace already holds T checkpoints");
  }
  ++completed_;
  for (std::size_t i = 0; i < tracked_.size(); ++i) {
    bitmap_[i].push_back(correct[i]);
    if (correct[i]) {
      ++times_correct_[i];
      if (!first_learnt_[i]) first_learnt_[i] = completed_;
    }
  }
}

bool LearningTrace::correct_at(std::size_t doc, std::size_t step) const {
  return bitmap_.at(doc).at(step);
}

namespace {

void check_covers(const std::vector<PseudoLabel>& tracked, const PseudoLabelSet& pseudo) {
  if (tracked.size() != pseudo.size()) {
    throw ValidationError("learning trace covers " + std::to_string(tracked.size()) +
                          " documents, pseudo-label set has " + std::to_string(pseudo.size()));
  }
  for (std::size_t i = 0; i < tracked.size(); ++i) {
    const auto& a = tracked[i];
    const auto& b = pseudo.entries()[i];
    if (a.doc_id != b.doc_id || a.label != b.label) {
      throw ValidationError("learning trace does not match pseudo-label entry '" + b.doc_id + "'");
    }
  }
}

ConfidenceScores empty_scores(std::string function, const PseudoLabelSet& pseudo) {
  ConfidenceScores scores{std::move(function), pseudo.space(), {}};
  scores.entries.reserve(pseudo.size());
  return scores;
}

template <typename ScoreFn>
ConfidenceScores model_scores(std::string function, const TrainedModel& model,
                              const FeatureMatrix& features, const PseudoLabelSet& pseudo,
                              ScoreFn score) {
  if (model.params.features != features.columns()) {
    throw ValidationError("feature matrix does not match the model vocabulary");
  }
  auto scores = empty_scores(std::move(function), pseudo);
  for (const auto& e : pseudo.entries()) {
    const auto probs = predict_row(model, features.row(features.row_of(e.doc_id)));
    scores.entries.push_back({e.doc_id, e.label, score(probs, e.label)});
  }
  return scores;
}

}  // namespace

ConfidenceScores learning_order(const LearningTrace& trace, const PseudoLabelSet& pseudo) {
  check_covers(trace.tracked(), pseudo);
  auto scores = empty_scores("learning_order", pseudo);
  const double total = static_cast<double>(trace.total_steps());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = pseudo.entries()[i];
    const auto t = trace.first_learnt(i);
    const double score = t ? 1.0 - static_cast<double>(*t) / total : 0.0;
    scores.entries.push_back({e.doc_id, e.label, score});
  }
  return scores;
}

ConfidenceScores probability_score(const TrainedModel& model, const FeatureMatrix& features,
                                   const PseudoLabelSet& pseudo) {
  return model_scores("probability", model, features, pseudo,
                      [](const std::vector<double>& p, LabelId label) { return p[label]; });
}

double normalized_entropy_confidence(std::span<const double> probabilities) {
  if (probabilities.size() < 2) return 1.0;
  double h = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) h -= p * std::log(p);
  }
  const double score = 1.0 - h / std::log(static_cast<double>(probabilities.size()));
  return std::clamp(score, 0.0, 1.0);
}

ConfidenceScores entropy_confidence(const TrainedModel& model, const FeatureMatrix& features,
                                    const PseudoLabelSet& pseudo) {
  return model_scores("entropy", model, features, pseudo,
                      [](const std::vector<double>& p, LabelId) {
                        return normalized_entropy_confidence(p);
                      });
}

ConfidenceScores stability_confidence(const LearningTrace& trace, const PseudoLabelSet& pseudo) {
  check_covers(trace.tracked(), pseudo);
  if (trace.completed_steps() == 0) {
    throw ValidationError("stability needs at least one completed epoch");
  }
  auto scores = empty_scores("stability", pseudo);
  const double completed = static_cast<double>(trace.completed_steps());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = pseudo.entries()[i];
    scores.entries.push_back({e.doc_id, e.label, static_cast<double>(trace.times_correct(i)) / completed});
  }
  return scores;
}

ConfidenceScores random_confidence(const PseudoLabelSet& pseudo, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "random-confidence"));
  auto scores = empty_scores("random", pseudo);
  for (const auto& e : pseudo.entries()) scores.entries.push_back({e.doc_id, e.label, rng.uniform()});
  return scores;
}

void write_confidence_csv(std::ostream& out, const ConfidenceScores& scores) {
  out << "doc_id,pseudo_label,function,score\n";
  std::ostringstream line;
  line.precision(17);
  for (const auto& e : scores.entries) {
    line.str("");
    line << e.doc_id << ',' << scores.space.name(e.label) << ',' << scores.function << ','
         << e.score << '\n';
    out << line.str();
  }
}

ConfidenceScores read_confidence_csv(std::istream& in, LabelSpace space) {
  ConfidenceScores scores{"", std::move(space), {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "doc_id,pseudo_label,function,score") {
        throw ParseError(line_no, "unexpected confidence CSV header");
      }
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(line_no, "score '" + fields[3] + "' is not a number");
    }
    if (scores.function.empty()) scores.function = fields[2];
    scores.entries.push_back({fields[0], scores.space.id(fields[1]), value});
  }
  return scores;
}

}  // namespace lops
