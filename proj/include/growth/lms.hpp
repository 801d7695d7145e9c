#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "growth/types.hpp"

namespace growth {

/// One reference row: Box-Cox power L, median M, coefficient of variation S.
struct LmsEntry {
  Sex sex = Sex::male;
  double age_years = 0.0;
  double L = 1.0;
  double M = 0.0;
  double S = 0.0;
};

class LmsTable {
 public:
  LmsTable() = default;
  LmsTable(Measure measure, std::vector<LmsEntry> entries);

  Measure measure() const { return measure_; }
  const std::vector<LmsEntry>& entries() const { return entries_; }

  /// [first age, last age] available for the sex; throws when the table has
  /// no rows for it.
  std::pair<double, double> coverage(Sex sex) const;

  /// Entry at the age, with L, M and S each linearly interpolated between
  /// the bracketing rows. Throws std::domain_error outside coverage.
  LmsEntry interpolate(Sex sex, double age_years) const;

 private:
  Measure measure_ = Measure::weight;
  std::vector<LmsEntry> entries_;  // sorted by (sex, age), keys unique
};

/// Reads a reference CSV with columns Sex (1=male, 2=female), Agemos
/// (months) or Age (years), L, M, S; extra columns are ignored. Months are
/// converted to years as months/12. Throws std::runtime_error on a missing
/// column, a duplicate (sex, age) key, or a non-positive M or S (the error
/// names the offending row).
LmsTable load_lms_table(std::istream& in, Measure measure = Measure::weight);

/// X = M(1 + LSz)^(1/L), or M e^(Sz) when |L| < 1e-12. Throws
/// std::domain_error when 1 + LSz <= 0.
double lms_to_value(const LmsEntry& entry, double z);

/// Inverse of lms_to_value: z = ((x/M)^L - 1)/(LS), or ln(x/M)/S when
/// |L| < 1e-12. Throws std::domain_error when x <= 0.
double value_to_z(const LmsEntry& entry, double x);

/// Standard normal quantile (absolute error well under 1e-9); p in (0, 100).
double z_of_percentile(double p);

/// Same quantile on probability scale; p in (0, 1).
double z_of_probability(double p);

/// 100 * Phi(z).
double percentile_of_z(double z);

/// Percentile curves sharing one age grid.
struct LevelCurve {
  double level = 50.0;
  std::vector<double> values;  // one per grid age
};

struct ChartCurveSet {
  Measure measure = Measure::weight;
  Sex sex = Sex::male;
  std::vector<double> ages;
  std::vector<LevelCurve> levels;  // ascending by level
};

/// Evaluates the reference percentile curves on the grid. Throws
/// std::domain_error naming the first grid age outside table coverage.
ChartCurveSet reference_curves(const LmsTable& table, Sex sex, std::span<const double> levels,
                               std::span<const double> age_grid);

/// Chart CSV: header age,p3,p5,... then one row per grid age, values at six
/// significant digits.
void write_chart_csv(std::ostream& out, const ChartCurveSet& chart);
ChartCurveSet read_chart_csv(std::istream& in, Measure measure = Measure::weight,
                             Sex sex = Sex::male);

struct LevelComparison {
  double level = 0.0;
  double max_abs_diff = 0.0;
  double age_of_max_abs = 0.0;  // smallest age achieving the max
  double mean_abs_diff = 0.0;
  double mean_diff = 0.0;      // signed, b - a
  double mean_rel_diff = 0.0;  // signed, (b - a)/a
  double max_rel_diff = 0.0;   // max |b - a|/|a|
};

struct ChartComparison {
  std::vector<LevelComparison> levels;
  std::size_t shared_ages = 0;
  double age_lo = 0.0, age_hi = 0.0;
  double overall_max_abs_diff = 0.0;
  double overall_max_rel_diff = 0.0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Per-level divergence of b against a over the shared grid ages. Levels
/// default to {3, 50, 97} when the list is empty. Throws std::domain_error
/// when the grids are disjoint or a requested level is missing.
ChartComparison compare_charts(const ChartCurveSet& a, const ChartCurveSet& b,
                               std::span<const double> levels = {});

}  // namespace growth
