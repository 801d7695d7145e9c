#pragma once

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "growth/binning.hpp"
#include "growth/encounter.hpp"
#include "growth/lms.hpp"
#include "growth/parametric.hpp"
#include "growth/smoothing.hpp"

namespace growth {

/// Uniform output grid; end must be start plus a whole number of steps.
struct GridSpec {
  double start = 2.0;
  double end = 20.0;
  double step = 0.25;

  /// All grid ages, endpoints included. Throws std::invalid_argument on a
  /// non-positive step or a span that is not a whole number of steps.
  std::vector<double> ages() const;
};

/// Everything cmd_build_chart needs to turn encounters into a chart.
struct ChartConfig {
  Measure measure = Measure::weight;
  Sex sex = Sex::male;
  Schema dataset = Schema::generic;  // column dialect + policy preset
  ExclusionPolicy exclusions = ExclusionPolicy::none();
  SmoothingPolicy smoothing;       // weight and BMI path
  std::vector<double> levels;      // ascending percentile levels
  GridSpec output_grid;            // evaluation grid for the final chart
  double bin_start = 2.0;          // half-year bins [bin_start, bin_end)
  double bin_end = 20.0;
  std::optional<std::pair<double, double>> source_bins;  // extra bins feeding padding
  int poly_degree = 10;            // weight 10, BMI 4
  bool wlr_enabled = true;         // stature pre-smoothing switch
  double wlr_min_level = 95.0;     // levels >= this get the WLR pass
  double wlr_age_lo = 18.0;        // pass straightens points at ages >= this;
                                   // set <= bin_start to straighten the whole series
  LmOptions lm;                    // stature fitter options

  /// Defaults for a measure under a dataset preset: exclusion policy
  /// (edw / nhanes / none), smoothing preset (edw-weight / nhanes-weight /
  /// bmi), level set, bin layout and polynomial degree.
  static ChartConfig preset(Measure measure, Sex sex, Schema dataset);

  /// Throws std::invalid_argument on an unusable combination (empty or
  /// unsorted levels, bad grid, degree < 1).
  void validate() const;
};

/// Fitted model for one percentile level: a polynomial for weight/BMI or a
/// triple logistic for stature.
struct LevelModel {
  double level = 50.0;
  std::optional<PolynomialCurve> polynomial;
  std::optional<TripleLogisticCurve> logistic;
  FitReport fit;
  MonotonicityResult monotonicity;       // on the output grid
  std::optional<double> nadir_age;       // BMI only; nullopt = no interior nadir

  double eval(double age) const;
  nlohmann::json to_json() const;
};

struct ChartBuildResult {
  ChartCurveSet chart;                      // models evaluated on the output grid
  std::vector<EmpiricalSeries> empirical;   // chart bins, one series per level
  std::vector<SmoothedSeries> smoothed;     // weight/BMI path (empty for stature)
  std::vector<LevelModel> models;
  ExclusionReport exclusions;
  std::vector<RowDiagnostic> diagnostics;

  /// Full build record: config echo, exclusion tallies, per-level curve
  /// parameters (round-trip precision) and fit reports.
  nlohmann::json to_json(const ChartConfig& config) const;
};

/// Percentile chart from already-ingested encounters:
/// bin -> empirical percentiles -> pad -> locally weighted regression ->
/// polynomial fit (weight/BMI), or bin -> optional weighted-line
/// pre-smoothing -> triple-logistic fit (stature); models are then
/// evaluated on the output grid. Throws std::domain_error when the data
/// cannot support the configured bins or fits.
ChartBuildResult build_chart(std::span<const Encounter> encounters, const ChartConfig& config);

/// run_ingest + build_chart; exclusion report and row diagnostics are
/// carried into the result.
ChartBuildResult build_chart_from_stream(std::istream& in, const ChartConfig& config);

}  // namespace growth
