#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "growth/binning.hpp"

namespace growth {

enum class PadSide { lower, upper };
enum class PadMode {
  repeat_anchor_value,  // constant: the series value at anchor_age
  repeat_window_max,    // constant: max series value over source_window
  use_empirical,        // values copied from a second series at the target ages
};

/// Adds synthetic points beyond one end of a series so a moving smoothing
/// window keeps support near the boundary.
struct PaddingRule {
  PadSide side = PadSide::lower;
  PadMode mode = PadMode::repeat_anchor_value;
  double anchor_age = 0.0;                        // repeat_anchor_value
  std::pair<double, double> source_window{0, 0};  // repeat_window_max, inclusive
  std::vector<double> target_ages;                // strictly monotone away from the data
};

/// Returns the series extended with synthetic points at the rule's target
/// ages (sorted by age on return). `source` supplies values for
/// use_empirical mode and, when given, the anchor lookup for
/// repeat_anchor_value. Throws std::domain_error when the anchor age is
/// absent, the source window is empty, or a target age collides with an
/// existing point.
EmpiricalSeries apply_padding(const EmpiricalSeries& series, const PaddingRule& rule,
                              const EmpiricalSeries* source = nullptr);

struct WindowOverride {
  double age_lo = 0.0;  // inclusive
  double age_hi = 0.0;  // inclusive
  int window_points = 0;
};

/// Nearest-neighbour locally weighted regression settings for one chart.
struct SmoothingPolicy {
  std::string name = "custom";
  int window_points = 13;
  int local_degree = 1;  // 0, 1 or 2
  std::optional<PaddingRule> lower_pad;
  std::optional<PaddingRule> upper_pad;
  std::vector<WindowOverride> window_by_age;  // first match wins

  int window_at(double age) const;

  static SmoothingPolicy edw_weight();
  static SmoothingPolicy nhanes_weight();
  static SmoothingPolicy bmi();
  static SmoothingPolicy by_name(const std::string& name);
};

/// LOESS output; same ages as the unpadded input series.
struct SmoothedSeries {
  Sex sex = Sex::male;
  Measure measure = Measure::weight;
  double level = 50.0;
  std::vector<SeriesPoint> points;
  std::string policy_name;
};

/// Locally weighted regression over a (possibly padded) series: for each
/// non-synthetic age, fit a tricube-weighted polynomial of local_degree to
/// the window_at(age) nearest points (distance ties prefer the lower age)
/// and evaluate it at that age. Synthetic points support the windows but
/// are excluded from the output. Throws std::domain_error when a window
/// needs more points than the series has.
SmoothedSeries loess_smooth(const EmpiricalSeries& series, const SmoothingPolicy& policy);

/// Replaces values with the fit of one global weighted straight line of
/// value on age. Weights must be non-negative with positive total; needs
/// >= 3 points and at least two distinct ages carrying weight.
EmpiricalSeries wlr_presmooth(const EmpiricalSeries& series, std::span<const double> weights);

}  // namespace growth
