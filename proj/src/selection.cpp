#include "lops/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "lops/error.hpp"

namespace lops {

void SelectionParams::validate() const {
  if (!(tau > 0.0 && tau <= 100.0)) throw ValidationError("tau must lie in (0, 100]");
}

namespace {

// |selected| / |D[j]| < tau%, evaluated without dividing.
bool below_quota(std::size_t selected, std::size_t class_size, double tau) {
  return static_cast<double>(selected) * 100.0 < tau * static_cast<double>(class_size);
}

SelectionReport make_report(PseudoLabelSet selected, std::string method, std::size_t input_size) {
  SelectionReport report;
  report.class_counts = selected.class_counts();
  report.selected = std::move(selected);
  report.method = std::move(method);
  report.input_size = input_size;
  return report;
}

PseudoLabelSet to_set(const ConfidenceScores& scores, const std::vector<bool>& keep,
                      const std::string& source) {
  PseudoLabelSet out(scores.space, source);
  for (std::size_t i = 0; i < scores.entries.size(); ++i) {
    if (keep[i]) out.add(scores.entries[i].doc_id, scores.entries[i].label);
  }
  return out;
}

// Entry indices in selection priority order.
std::vector<std::size_t> ranked(const ConfidenceScores& scores, const LearningTrace* trace) {
  constexpr std::size_t kNever = static_cast<std::size_t>(-1);
  std::vector<std::size_t> first(scores.entries.size(), kNever);
  if (trace != nullptr) {
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < trace->size(); ++i) position.emplace(trace->tracked()[i].doc_id, i);
    for (std::size_t i = 0; i < scores.entries.size(); ++i) {
      auto it = position.find(scores.entries[i].doc_id);
      if (it == position.end()) {
        throw ValidationError("document '" + scores.entries[i].doc_id + "' is not in the trace");
      }
      if (auto t = trace->first_learnt(it->second)) first[i] = *t;
    }
  }
  std::vector<std::size_t> order(scores.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = scores.entries[a];
    const auto& eb = scores.entries[b];
    if (ea.score != eb.score) return ea.score > eb.score;
    if (first[a] != first[b]) return first[a] < first[b];
    return ea.doc_id < eb.doc_id;
  });
  return order;
}

}  // namespace

std::size_t lops_quota(double tau, std::size_t class_size) {
  const double target = tau * static_cast<double>(class_size) / 100.0;
  auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(target)));
  while (k > 0 && !below_quota(k - 1, class_size, tau)) --k;
  while (below_quota(k, class_size, tau)) ++k;
  return std::min(k, class_size);
}

LopsOnline::LopsOnline(const PseudoLabelSet& pseudo, const SelectionParams& params,
                       std::size_t total_steps)
    : pseudo_(&pseudo),
      tau_(params.tau),
      sizes_(pseudo.class_counts()),
      trace_(pseudo.entries(), total_steps),
      selected_(pseudo.size(), false),
      taken_(pseudo.space().size(), 0) {
  params.validate();
  const auto& space = pseudo.space();
  for (LabelId j = 0; j < space.size(); ++j) {
    if (sizes_[j] == 0) {
      throw ValidationError("class '" + space.name(j) + "' has no pseudo-labeled documents");
    }
  }
  const auto& entries = pseudo.entries();
  canonical_.resize(entries.size());
  std::iota(canonical_.begin(), canonical_.end(), 0);
  std::sort(canonical_.begin(), canonical_.end(), [&](std::size_t a, std::size_t b) {
    return entries[a].doc_id < entries[b].doc_id;
  });
}

bool LopsOnline::observe(const std::vector<LabelId>& predicted) {
  const auto& entries = pseudo_->entries();
  if (predicted.size() != entries.size()) {
    throw ValidationError("checkpoint predictions do not cover the pseudo-label set");
  }
  std::vector<bool> column(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) column[i] = predicted[i] == entries[i].label;
  trace_.record(column);
  for (std::size_t i : canonical_) {
    const LabelId label = entries[i].label;
    if (!selected_[i] && column[i] && below_quota(taken_[label], sizes_[label], tau_)) {
      selected_[i] = true;
      ++taken_[label];
    }
  }
  return done();
}

bool LopsOnline::done() const {
  for (std::size_t j = 0; j < sizes_.size(); ++j) {
    if (below_quota(taken_[j], sizes_[j], tau_)) return false;
  }
  return true;
}

SelectionReport LopsOnline::report() const {
  const auto& space = pseudo_->space();
  const auto& entries = pseudo_->entries();
  PseudoLabelSet chosen(space, "lops");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (selected_[i]) chosen.add(entries[i].doc_id, entries[i].label);
  }
  auto report = make_report(std::move(chosen), "lops", pseudo_->size());
  report.params = {{"tau", tau_}};
  report.epochs_trained = trace_.completed_steps();
  for (LabelId j = 0; j < space.size(); ++j) {
    if (below_quota(taken_[j], sizes_[j], tau_)) {
      report.under_quota.push_back(j);
      report.warnings.push_back("class '" + space.name(j) + "' reached " + std::to_string(taken_[j]) +
                                " of " + std::to_string(lops_quota(tau_, sizes_[j])) +
                                " documents before training ended");
    }
  }
  return report;
}

LopsResult lops_select(const FeatureMatrix& features, const PseudoLabelSet& pseudo,
                       const ClassifierConfig& config, const SelectionParams& params) {
  config.validate();
  const std::size_t planned = config.epochs * steps_per_epoch(config, pseudo.size());
  LopsOnline online(pseudo, params, planned);
  auto trained = train(features, pseudo, config,
                       [&](const EpochSnapshot& snap) { return online.observe(snap.predicted); });

  auto report = online.report();
  report.params["epochs"] = static_cast<double>(config.epochs);
  if (config.snapshot_every_batches > 0) {
    report.params["snapshot_every_batches"] = static_cast<double>(config.snapshot_every_batches);
  }
  return {std::move(report), online.trace(), std::move(trained.model)};
}

SelectionReport threshold_select(const ConfidenceScores& scores, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [0, 1]");
  std::vector<bool> keep(scores.entries.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = scores.entries[i].score > gamma;
  auto report = make_report(to_set(scores, keep, "threshold:" + scores.function),
                            "threshold:" + scores.function, scores.entries.size());
  report.params = {{"gamma", gamma}};
  return report;
}

std::vector<std::size_t> apportion(std::size_t count, const std::vector<std::size_t>& sizes) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (count > total) throw ValidationError("cannot apportion more than the total size");
  std::vector<std::size_t> shares(sizes.size(), 0);
  if (total == 0) return shares;
  std::vector<std::size_t> remainder(sizes.size());
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    shares[j] = count * sizes[j] / total;
    remainder[j] = count * sizes[j] % total;
    assigned += shares[j];
  }
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < count; ++k, ++assigned) ++shares[order[k]];
  return shares;
}

SelectionReport topk_select_per_class(const ConfidenceScores& scores,
                                      const std::vector<std::size_t>& counts,
                                      const LearningTrace* trace) {
  if (counts.size() != scores.space.size()) {
    throw ValidationError("per-class counts do not match the label space");
  }
  std::vector<std::size_t> sizes(scores.space.size(), 0);
  for (const auto& e : scores.entries) ++sizes[e.label];
  for (LabelId j = 0; j < counts.size(); ++j) {
    if (counts[j] > sizes[j]) {
      throw ValidationError("requested " + std::to_string(counts[j]) + " documents of class '" +
                            scores.space.name(j) + "', which has " + std::to_string(sizes[j]));
    }
  }
  std::vector<bool> keep(scores.entries.size(), false);
  std::vector<std::size_t> taken(counts.size(), 0);
  for (std::size_t i : ranked(scores, trace)) {
    const LabelId label = scores.entries[i].label;
    if (taken[label] < counts[label]) {
      keep[i] = true;
      ++taken[label];
    }
  }
  auto report = make_report(to_set(scores, keep, "topk:" + scores.function),
                            "topk-per-class:" + scores.function, scores.entries.size());
  report.params = {{"count", static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}))}};
  return report;
}

SelectionReport topk_select(const ConfidenceScores& scores, std::size_t count, TopkMode mode,
                            const LearningTrace* trace) {
  if (count > scores.entries.size()) {
    throw ValidationError("top-k count " + std::to_string(count) + " exceeds " +
                          std::to_string(scores.entries.size()) + " documents");
  }
  if (mode == TopkMode::kStratified) {
    std::vector<std::size_t> sizes(scores.space.size(), 0);
    for (const auto& e : scores.entries) ++sizes[e.label];
    auto report = topk_select_per_class(scores, apportion(count, sizes), trace);
    report.method = "topk-stratified:" + scores.function;
    return report;
  }
  std::vector<bool> keep(scores.entries.size(), false);
  const auto order = ranked(scores, trace);
  for (std::size_t k = 0; k < count; ++k) keep[order[k]] = true;
  auto report = make_report(to_set(scores, keep, "topk:" + scores.function),
                            "topk-global:" + scores.function, scores.entries.size());
  report.params = {{"count", static_cast<double>(count)}};
  return report;
}

SelectionReport optimal_filter(const PseudoLabelSet& pseudo, const GoldLabels& gold) {
  PseudoLabelSet clean(pseudo.space(), "optimal-filter");
  for (const auto& e : pseudo.entries()) {
    auto it = gold.find(e.doc_id);
    if (it == gold.end()) throw ValidationError("document '" + e.doc_id + "' has no gold label");
    if (it->second == e.label) clean.add(e.doc_id, e.label);
  }
  return make_report(std::move(clean), "optimal-filter", pseudo.size());
}

void attach_gold_metrics(SelectionReport& report, const GoldLabels& gold) {
  std::size_t wrong = 0;
  for (const auto& e : report.selected.entries()) {
    auto it = gold.find(e.doc_id);
    if (it == gold.end()) throw ValidationError("document '" + e.doc_id + "' has no gold label");
    if (it->second != e.label) ++wrong;
  }
  const auto n = report.selected.size();
  report.noise = n == 0 ? std::nullopt
                        : std::optional<double>(static_cast<double>(wrong) / static_cast<double>(n));
  report.coverage = report.input_size == 0
                        ? 0.0
                        : static_cast<double>(n) / static_cast<double>(report.input_size);
}

std::string report_to_json(const SelectionReport& report, int indent) {
  using nlohmann::ordered_json;
  const auto& space = report.selected.space();
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : report.params) params[k] = v;
  ordered_json counts = ordered_json::object();
  for (LabelId j = 0; j < report.class_counts.size(); ++j) counts[space.name(j)] = report.class_counts[j];
  ordered_json under = ordered_json::array();
  for (auto j : report.under_quota) under.push_back(space.name(j));
  ordered_json ids = ordered_json::array();
  for (const auto& e : report.selected.entries()) ids.push_back(e.doc_id);

  ordered_json out;
  out["method"] = report.method;
  out["params"] = std::move(params);
  out["input_size"] = report.input_size;
  out["selected_count"] = report.selected.size();
  out["class_counts"] = std::move(counts);
  if (report.epochs_trained) out["epochs_trained"] = *report.epochs_trained;
  out["under_quota"] = std::move(under);
  out["warnings"] = report.warnings;
  if (report.noise) out["noise"] = *report.noise;
  if (report.coverage) out["coverage"] = *report.coverage;
  out["selected"] = std::move(ids);
  return out.dump(indent);
}

}  // namespace lops
