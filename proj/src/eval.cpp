#include "lops/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "lops/error.hpp"

namespace lops {

double NoiseCoverage::require_noise() const {
  if (!noise) throw ValidationError("noise is undefined for an empty selection");
  return *noise;
}

NoiseCoverage noise_and_coverage(const SelectionReport& selection, const GoldLabels& gold) {
  std::size_t wrong = 0;
  for (const auto& e : selection.selected.entries()) {
    auto it = gold.find(e.doc_id);
    if (it == gold.end()) throw ValidationError("document '" + e.doc_id + "' has no gold label");
    if (it->second != e.label) ++wrong;
  }
  NoiseCoverage out;
  const auto n = selection.selected.size();
  if (selection.input_size > 0) {
    out.coverage = static_cast<double>(n) / static_cast<double>(selection.input_size);
  }
  if (n > 0) out.noise = static_cast<double>(wrong) / static_cast<double>(n);
  return out;
}

NCCurve nc_curve(const ConfidenceScores& scores, const GoldLabels& gold) {
  if (scores.entries.empty()) throw ValidationError("NC-curve of an empty score set");
  struct Item {
    double score;
    bool wrong;
  };
  std::vector<Item> items;
  items.reserve(scores.entries.size());
  std::size_t wrong_total = 0;
  for (const auto& e : scores.entries) {
    auto it = gold.find(e.doc_id);
    if (it == gold.end()) throw ValidationError("document '" + e.doc_id + "' has no gold label");
    const bool wrong = it->second != e.label;
    wrong_total += wrong ? 1 : 0;
    items.push_back({e.score, wrong});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

  const auto n = static_cast<double>(items.size());
  NCCurve curve;
  curve.function = scores.function;
  curve.clean_fraction = 1.0 - static_cast<double>(wrong_total) / n;

  // Everything is selected below the minimum score.
  curve.points.push_back({items.front().score - 1.0, 1.0, static_cast<double>(wrong_total) / n});

  std::size_t excluded = 0;
  std::size_t excluded_wrong = 0;
  while (excluded < items.size()) {
    const double gamma = items[excluded].score;
    while (excluded < items.size() && items[excluded].score == gamma) {
      excluded_wrong += items[excluded].wrong ? 1 : 0;
      ++excluded;
    }
    const std::size_t kept = items.size() - excluded;
    if (kept == 0) break;
    curve.points.push_back({gamma, static_cast<double>(kept) / n,
                            static_cast<double>(wrong_total - excluded_wrong) / static_cast<double>(kept)});
  }
  return curve;
}

double aunc(const NCCurve& curve) {
  if (curve.points.empty()) throw ValidationError("AUNC of an empty curve");
  std::vector<NCPoint> pts = curve.points;
  std::stable_sort(pts.begin(), pts.end(),
                   [](const NCPoint& a, const NCPoint& b) { return a.coverage < b.coverage; });
  double area = pts.front().noise * pts.front().coverage;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += 0.5 * (pts[i].noise + pts[i - 1].noise) * (pts[i].coverage - pts[i - 1].coverage);
  }
  // Curves ending short of full coverage hold their last value.
  area += pts.back().noise * (1.0 - pts.back().coverage);
  return area;
}

double optimal_noise(double coverage, double clean_fraction, OptimalForm form) {
  const double overflow = std::max(0.0, coverage - clean_fraction);
  if (form == OptimalForm::kUnnormalized) return overflow;
  return coverage > 0.0 ? overflow / coverage : 0.0;
}

double worst_noise(double coverage, double clean_fraction) {
  if (coverage <= 0.0) return 1.0;
  return std::min(1.0, (1.0 - clean_fraction) / coverage);
}

namespace {

NCCurve on_grid(std::string function, double clean_fraction, std::vector<double> coverages,
                const auto& noise_of) {
  std::sort(coverages.begin(), coverages.end(), std::greater<>());
  coverages.erase(std::unique(coverages.begin(), coverages.end()), coverages.end());
  NCCurve curve;
  curve.function = std::move(function);
  curve.clean_fraction = clean_fraction;
  for (double phi : coverages) curve.points.push_back({1.0 - phi, phi, noise_of(phi)});
  return curve;
}

}  // namespace

ReferenceCurves reference_curves(double clean_fraction, std::span<const double> coverages) {
  if (!(clean_fraction >= 0.0 && clean_fraction <= 1.0)) {
    throw ValidationError("clean fraction must lie in [0, 1]");
  }
  std::vector<double> grid;
  for (double phi : coverages) {
    if (phi > 0.0 && phi <= 1.0) grid.push_back(phi);
  }
  if (clean_fraction > 0.0) grid.push_back(clean_fraction);
  grid.push_back(1.0);
  const double c = clean_fraction;
  return {
      on_grid("optimal", c, grid, [c](double phi) { return optimal_noise(phi, c, OptimalForm::kNormalized); }),
      on_grid("optimal_unnormalized", c, grid,
              [c](double phi) { return optimal_noise(phi, c, OptimalForm::kUnnormalized); }),
      on_grid("random_reference", c, grid, [c](double) { return 1.0 - c; }),
  };
}

ReferenceCurves reference_curves(double clean_fraction, std::size_t grid_points) {
  if (grid_points == 0) throw ValidationError("reference grid needs at least one point");
  std::vector<double> grid(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid[i] = static_cast<double>(i + 1) / static_cast<double>(grid_points);
  }
  return reference_curves(clean_fraction, grid);
}

NCCurve optimal_on_grid(const NCCurve& curve, OptimalForm form) {
  NCCurve out = curve;
  out.function = form == OptimalForm::kNormalized ? "optimal" : "optimal_unnormalized";
  for (auto& p : out.points) p.noise = optimal_noise(p.coverage, curve.clean_fraction, form);
  return out;
}

NCCurve worst_on_grid(const NCCurve& curve) {
  NCCurve out = curve;
  out.function = "worst";
  for (auto& p : out.points) p.noise = worst_noise(p.coverage, curve.clean_fraction);
  return out;
}

double nc_ratio(const NCPoint& point) {
  if (!(point.coverage > 0.0)) throw ValidationError("NC-ratio is undefined at zero coverage");
  return point.noise / point.coverage;
}

double f1_score(std::span<const LabelId> predicted, std::span<const LabelId> gold,
                std::size_t num_classes, Averaging averaging) {
  if (predicted.empty()) throw ValidationError("F1 of an empty prediction set");
  if (predicted.size() != gold.size()) {
    throw ValidationError("predictions and gold labels differ in length");
  }
  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] >= num_classes || gold[i] >= num_classes) {
      throw ValidationError("label outside the label space");
    }
    if (predicted[i] == gold[i]) {
      ++tp[gold[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[gold[i]];
    }
  }
  auto f1 = [](std::size_t t, std::size_t p, std::size_t n) {
    const std::size_t denom = 2 * t + p + n;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(t) / static_cast<double>(denom);
  };
  if (averaging == Averaging::kMicro) {
    std::size_t t = 0, p = 0, n = 0;
    for (std::size_t j = 0; j < num_classes; ++j) {
      t += tp[j];
      p += fp[j];
      n += fn[j];
    }
    return f1(t, p, n);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < num_classes; ++j) sum += f1(tp[j], fp[j], fn[j]);
  return num_classes == 0 ? 0.0 : sum / static_cast<double>(num_classes);
}

void write_nc_curve_csv(std::ostream& out, const NCCurve& curve) {
  out << "gamma,coverage,noise,nc_ratio\n";
  char buf[160];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p.gamma, p.coverage, p.noise,
                  nc_ratio(p));
    out << buf;
  }
}

}  // namespace lops
