#include "growth/binning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "growth/csv.hpp"

namespace growth {

std::vector<AgeBin> make_age_grid(double start, double end, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("age grid: width must be positive");
  if (!(end > start)) throw std::invalid_argument("age grid: end must exceed start");
  const std::size_t count = static_cast<std::size_t>(std::llround((end - start) / width));
  if (std::fabs(start + static_cast<double>(count) * width - end) > 1e-9)
    throw std::invalid_argument("age grid: range is not a whole number of bins");
  std::vector<AgeBin> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i].lower = start + static_cast<double>(i) * width;
    grid[i].upper = start + static_cast<double>(i + 1) * width;
    grid[i].midpoint = (grid[i].lower + grid[i].upper) / 2.0;
  }
  return grid;
}

std::vector<AgeBin> standard_age_grid() { return make_age_grid(2.0, 20.0); }

std::vector<double> chart_levels(Measure measure) {
  if (measure == Measure::bmi) return {3, 5, 10, 25, 50, 75, 85, 90, 95, 97};
  return {3, 5, 10, 25, 50, 75, 90, 95, 97};
}

std::optional<AgeBin> assign_bin(double age, std::span<const AgeBin> grid) {
  // Grid is sorted and disjoint; binary-search the first bin with upper > age.
  auto it = std::upper_bound(grid.begin(), grid.end(), age,
                             [](double a, const AgeBin& b) { return a < b.upper; });
  if (it == grid.end() || age < it->lower) return std::nullopt;
  return *it;
}

double empirical_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::domain_error("empirical_percentile: empty value set");
  if (!(p > 0.0 && p < 100.0))
    throw std::domain_error("empirical_percentile: p must be in (0, 100)");
  std::sort(values.begin(), values.end());
  const double count = static_cast<double>(values.size());
  // Rank p/100 * N + 1/2, rounded to the nearest integer with halves up.
  // Multiply before dividing so integer-valued p*N stays exact.
  const double rank_real = p * count / 100.0 + 0.5;
  long rank = static_cast<long>(std::floor(rank_real + 0.5));
  rank = std::clamp(rank, 1L, static_cast<long>(values.size()));
  return values[static_cast<std::size_t>(rank - 1)];
}

std::vector<EmpiricalSeries> build_empirical_series(std::span<const Encounter> encounters,
                                                    Sex sex, Measure measure,
                                                    std::span<const double> levels,
                                                    std::span<const AgeBin> grid) {
  std::vector<std::vector<double>> bin_values(grid.size());
  for (const Encounter& e : encounters) {
    if (e.sex != sex) continue;
    auto it = std::upper_bound(grid.begin(), grid.end(), e.age_years,
                               [](double a, const AgeBin& b) { return a < b.upper; });
    if (it == grid.end() || e.age_years < it->lower) continue;
    bin_values[static_cast<std::size_t>(it - grid.begin())].push_back(e.measure_value(measure));
  }

  if (std::all_of(bin_values.begin(), bin_values.end(),
                  [](const auto& v) { return v.empty(); }))
    throw std::domain_error("build_empirical_series: no data in grid");

  // Sort each occupied bin once; every level reads the same order statistics.
  for (auto& v : bin_values) std::sort(v.begin(), v.end());

  std::vector<EmpiricalSeries> out;
  out.reserve(levels.size());
  for (double level : levels) {
    EmpiricalSeries s;
    s.sex = sex;
    s.measure = measure;
    s.level = level;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& v = bin_values[i];
      if (v.empty()) continue;
      const double n = static_cast<double>(v.size());
      const double rank_real = level * n / 100.0 + 0.5;
      long rank = static_cast<long>(std::floor(rank_real + 0.5));
      rank = std::clamp(rank, 1L, static_cast<long>(v.size()));
      s.points.push_back({grid[i].midpoint, v[static_cast<std::size_t>(rank - 1)], v.size(), false});
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_series_csv(std::ostream& out, std::span<const EmpiricalSeries> series) {
  out << "age,level,value,n\n";
  for (const EmpiricalSeries& s : series) {
    for (const SeriesPoint& pt : s.points) {
      out << csv::format_sig(pt.age, 6) << ',' << csv::format_sig(s.level, 6) << ','
          << csv::format_sig(pt.value, 6) << ',' << pt.n << '\n';
    }
  }
}

}  // namespace growth
