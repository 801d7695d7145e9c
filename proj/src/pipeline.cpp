#include "growth/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace growth {

std::vector<double> GridSpec::ages() const {
  if (!(step > 0.0)) throw std::invalid_argument("grid: step must be positive");
  if (!(end > start)) throw std::invalid_argument("grid: end must exceed start");
  const double count = (end - start) / step;
  const long n = std::lround(count);
  if (n < 1 || std::fabs(count - static_cast<double>(n)) > 1e-9)
    throw std::invalid_argument("grid: span is not a whole number of steps");
  std::vector<double> ages(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) ages[static_cast<std::size_t>(i)] = start + step * i;
  ages.back() = end;
  return ages;
}

ChartConfig ChartConfig::preset(Measure measure, Sex sex, Schema dataset) {
  ChartConfig c;
  c.measure = measure;
  c.sex = sex;
  c.dataset = dataset;
  switch (dataset) {
    case Schema::edw: c.exclusions = ExclusionPolicy::edw(); break;
    case Schema::nhanes: c.exclusions = ExclusionPolicy::nhanes(); break;
    case Schema::generic: c.exclusions = ExclusionPolicy::none(); break;
  }
  c.levels = chart_levels(measure);
  switch (measure) {
    case Measure::weight:
      c.poly_degree = 10;
      if (dataset == Schema::nhanes) {
        c.smoothing = SmoothingPolicy::nhanes_weight();
        c.bin_start = 1.5;  // the 1.75 bin anchors the lower padding
        c.source_bins = {{20.0, 23.5}};
      } else {
        c.smoothing = SmoothingPolicy::edw_weight();
      }
      break;
    case Measure::bmi:
      c.poly_degree = 4;
      c.smoothing = SmoothingPolicy::bmi();
      break;
    case Measure::stature:
      break;  // no local smoothing; WLR + triple logistic
  }
  return c;
}

void ChartConfig::validate() const {
  if (levels.empty()) throw std::invalid_argument("chart config: no percentile levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 100.0))
      throw std::invalid_argument("chart config: level outside (0, 100)");
    if (i && !(levels[i] > levels[i - 1]))
      throw std::invalid_argument("chart config: levels must be strictly ascending");
  }
  if (measure != Measure::stature && poly_degree < 1)
    throw std::invalid_argument("chart config: polynomial degree must be >= 1");
  if (!(bin_end > bin_start)) throw std::invalid_argument("chart config: empty bin range");
  if (source_bins && !(source_bins->second > source_bins->first))
    throw std::invalid_argument("chart config: empty source bin range");
  (void)output_grid.ages();
}

double LevelModel::eval(double age) const {
  if (polynomial) return polynomial->eval(age);
  if (logistic) return logistic->eval(age);
  throw std::logic_error("level model holds no curve");
}

nlohmann::json LevelModel::to_json() const {
  nlohmann::json j;
  j["level"] = level;
  if (polynomial) {
    j["model"] = "polynomial";
    j["curve"] = polynomial->to_json();
  } else if (logistic) {
    j["model"] = "triple_logistic";
    j["curve"] = logistic->to_json();
  }
  j["fit"] = fit.to_json();
  j["monotone"] = monotonicity.monotone;
  if (!monotonicity.violations.empty()) j["violating_ages"] = monotonicity.violations;
  if (nadir_age)
    j["nadir_age"] = *nadir_age;
  else
    j["nadir_age"] = nullptr;
  return j;
}

namespace {

LevelModel fit_level_polynomial(const SmoothedSeries& series, const ChartConfig& config,
                                std::span<const double> grid_ages) {
  std::vector<double> ages, values;
  ages.reserve(series.points.size());
  values.reserve(series.points.size());
  for (const SeriesPoint& p : series.points) {
    ages.push_back(p.age);
    values.push_back(p.value);
  }
  LevelModel model;
  model.level = series.level;
  auto [curve, report] = fit_polynomial(ages, values, config.poly_degree);
  model.polynomial = std::move(curve);
  model.fit = report;
  model.monotonicity = check_monotone(*model.polynomial, grid_ages);
  if (config.measure == Measure::bmi)
    model.nadir_age =
        find_bmi_nadir(*model.polynomial, {config.output_grid.start, config.output_grid.end});
  return model;
}

LevelModel fit_level_logistic(const EmpiricalSeries& series, const ChartConfig& config,
                              std::span<const double> grid_ages) {
  EmpiricalSeries input = series;
  if (config.wlr_enabled && series.level >= config.wlr_min_level - 1e-9) {
    // Straighten the sampling-noise-prone upper segment with one weighted
    // line; skipped when fewer than three points fall in it.
    EmpiricalSeries upper;
    upper.sex = series.sex;
    upper.measure = series.measure;
    upper.level = series.level;
    std::vector<double> weights;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < series.points.size(); ++i) {
      if (series.points[i].age >= config.wlr_age_lo - 1e-9) {
        upper.points.push_back(series.points[i]);
        weights.push_back(static_cast<double>(series.points[i].n));
        index.push_back(i);
      }
    }
    if (upper.points.size() >= 3) {
      const EmpiricalSeries straightened = wlr_presmooth(upper, weights);
      for (std::size_t k = 0; k < index.size(); ++k)
        input.points[index[k]].value = straightened.points[k].value;
    }
  }
  std::vector<double> ages, values;
  ages.reserve(input.points.size());
  values.reserve(input.points.size());
  for (const SeriesPoint& p : input.points) {
    ages.push_back(p.age);
    values.push_back(p.value);
  }
  LevelModel model;
  model.level = series.level;
  auto [curve, report] =
      fit_triple_logistic(ages, values, default_logistic_init(ages, values), config.lm);
  model.logistic = curve;
  model.fit = report;
  model.monotonicity = check_monotone(*model.logistic, grid_ages);
  return model;
}

}  // namespace

ChartBuildResult build_chart(std::span<const Encounter> encounters, const ChartConfig& config) {
  config.validate();
  ChartBuildResult result;

  const std::vector<AgeBin> grid = make_age_grid(config.bin_start, config.bin_end, 0.5);
  result.empirical =
      build_empirical_series(encounters, config.sex, config.measure, config.levels, grid);

  std::vector<EmpiricalSeries> source_series;
  if (config.source_bins) {
    const std::vector<AgeBin> source_grid =
        make_age_grid(config.source_bins->first, config.source_bins->second, 0.5);
    source_series =
        build_empirical_series(encounters, config.sex, config.measure, config.levels, source_grid);
  }

  const std::vector<double> grid_ages = config.output_grid.ages();
  result.chart.measure = config.measure;
  result.chart.sex = config.sex;
  result.chart.ages = grid_ages;

  for (std::size_t li = 0; li < result.empirical.size(); ++li) {
    const EmpiricalSeries& series = result.empirical[li];
    LevelModel model;
    if (config.measure == Measure::stature) {
      model = fit_level_logistic(series, config, grid_ages);
    } else {
      EmpiricalSeries padded = series;
      if (config.smoothing.lower_pad)
        padded = apply_padding(padded, *config.smoothing.lower_pad,
                               source_series.empty() ? nullptr : &source_series[li]);
      if (config.smoothing.upper_pad)
        padded = apply_padding(padded, *config.smoothing.upper_pad,
                               source_series.empty() ? nullptr : &source_series[li]);
      SmoothedSeries smoothed = loess_smooth(padded, config.smoothing);
      model = fit_level_polynomial(smoothed, config, grid_ages);
      result.smoothed.push_back(std::move(smoothed));
    }

    LevelCurve curve;
    curve.level = series.level;
    curve.values.reserve(grid_ages.size());
    for (double age : grid_ages) curve.values.push_back(model.eval(age));
    result.chart.levels.push_back(std::move(curve));
    result.models.push_back(std::move(model));
  }
  return result;
}

ChartBuildResult build_chart_from_stream(std::istream& in, const ChartConfig& config) {
  IngestResult ingest = run_ingest(in, config.dataset, config.exclusions);
  ChartBuildResult result = build_chart(ingest.encounters, config);
  result.exclusions = ingest.report;
  result.diagnostics = std::move(ingest.diagnostics);
  return result;
}

nlohmann::json ChartBuildResult::to_json(const ChartConfig& config) const {
  nlohmann::json j;
  j["measure"] = to_string(config.measure);
  j["sex"] = to_string(config.sex);
  j["dataset"] = to_string(config.dataset);
  j["output_grid"] = {{"start", config.output_grid.start},
                      {"end", config.output_grid.end},
                      {"step", config.output_grid.step}};
  nlohmann::json bins = {{"start", config.bin_start}, {"end", config.bin_end}};
  if (config.source_bins) {
    bins["source_start"] = config.source_bins->first;
    bins["source_end"] = config.source_bins->second;
  }
  j["bins"] = bins;
  if (config.measure == Measure::stature) {
    j["wlr"] = {{"enabled", config.wlr_enabled},
                {"min_level", config.wlr_min_level},
                {"age_lo", config.wlr_age_lo}};
  } else {
    j["smoothing"] = {{"name", config.smoothing.name},
                      {"window_points", config.smoothing.window_points},
                      {"local_degree", config.smoothing.local_degree}};
    j["poly_degree"] = config.poly_degree;
  }
  j["exclusions"] = exclusions.to_json();
  j["diagnostic_count"] = diagnostics.size();
  nlohmann::json lv = nlohmann::json::array();
  for (const LevelModel& m : models) lv.push_back(m.to_json());
  j["levels"] = lv;
  return j;
}

}  // namespace growth
