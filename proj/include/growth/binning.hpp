#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "growth/encounter.hpp"
#include "growth/types.hpp"

namespace growth {

/// Half-open age interval [lower, upper), keyed by its midpoint.
struct AgeBin {
  double midpoint = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Contiguous half-year bins covering [start, end). start/end must be
/// multiples of the width apart.
std::vector<AgeBin> make_age_grid(double start, double end, double width = 0.5);

/// The 36 standard chart bins: midpoints 2.25, 2.75, ..., 19.75.
std::vector<AgeBin> standard_age_grid();

/// Percentile level sets used by the charts; BMI adds the 85th.
std::vector<double> chart_levels(Measure measure);

/// The unique bin with lower <= age < upper, or nullopt.
std::optional<AgeBin> assign_bin(double age, std::span<const AgeBin> grid);

/// Order-statistic percentile: sort ascending, take the rank
/// round_half_up(p/100 * N + 1/2) clamped to [1, N], 1-indexed.
/// Throws std::domain_error on empty input or p outside (0, 100).
double empirical_percentile(std::vector<double> values, double p);

struct SeriesPoint {
  double age = 0.0;
  double value = 0.0;
  std::size_t n = 0;        // bin size behind this point (0 for synthetic)
  bool synthetic = false;   // true for padding points added for smoothing
};

/// One percentile track of one measure for one sex, ages ascending.
struct EmpiricalSeries {
  Sex sex = Sex::male;
  Measure measure = Measure::weight;
  double level = 50.0;  // percentile in (0, 100)
  std::vector<SeriesPoint> points;
};

/// Computes one series per requested level. Bins without encounters are
/// omitted. Throws std::domain_error when every bin is empty.
std::vector<EmpiricalSeries> build_empirical_series(std::span<const Encounter> encounters,
                                                    Sex sex, Measure measure,
                                                    std::span<const double> levels,
                                                    std::span<const AgeBin> grid);

/// CSV with columns age,level,value,n covering all series.
void write_series_csv(std::ostream& out, std::span<const EmpiricalSeries> series);

}  // namespace growth
