#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lops/confidence.hpp"
#include "lops/corpus.hpp"
#include "lops/selection.hpp"

namespace lops {

struct NoiseCoverage {
  std::optional<double> noise;  // undefined for an empty selection
  double coverage = 0.0;

  double require_noise() const;  // throws ValidationError when undefined
};

NoiseCoverage noise_and_coverage(const SelectionReport& selection, const GoldLabels& gold);

struct NCPoint {
  double gamma = 0.0;
  double coverage = 0.0;
  double noise = 0.0;
};

// Points with non-empty selections, thresholds strictly increasing and
// coverage non-increasing.
struct NCCurve {
  std::string function;
  std::vector<NCPoint> points;
  double clean_fraction = 0.0;
};

NCCurve nc_curve(const ConfidenceScores& scores, const GoldLabels& gold);

// Trapezoidal area of noise over coverage on [0, 1]; the lowest-coverage
// noise value is held constant down to coverage 0.
double aunc(const NCCurve& curve);

enum class OptimalForm {
  kUnnormalized,  // max(0, phi - c)
  kNormalized,    // max(0, phi - c) / phi, noise among selected
};

double optimal_noise(double coverage, double clean_fraction, OptimalForm form);
// Noise when every wrong label is selected before any clean one.
double worst_noise(double coverage, double clean_fraction);

struct ReferenceCurves {
  NCCurve optimal;               // normalized form
  NCCurve optimal_unnormalized;  // rectifier
  NCCurve random;
};

// Evaluated at `coverages`, with the rectifier knee and coverage 1 added.
ReferenceCurves reference_curves(double clean_fraction, std::span<const double> coverages);
// Uniform grid of `grid_points` coverages on (0, 1].
ReferenceCurves reference_curves(double clean_fraction, std::size_t grid_points = 100);

// Reference curve of `form` (or the worst case) on the coverage grid of `curve`.
NCCurve optimal_on_grid(const NCCurve& curve, OptimalForm form);
NCCurve worst_on_grid(const NCCurve& curve);

double nc_ratio(const NCPoint& point);

enum class Averaging { kMicro, kMacro };

double f1_score(std::span<const LabelId> predicted, std::span<const LabelId> gold,
                std::size_t num_classes, Averaging averaging);

// gamma,coverage,noise,nc_ratio
void write_nc_curve_csv(std::ostream& out, const NCCurve& curve);

}  // namespace lops
