#include "growth/lms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "growth/csv.hpp"

namespace growth {

LmsTable::LmsTable(Measure measure, std::vector<LmsEntry> entries)
    : measure_(measure), entries_(std::move(entries)) {
  std::stable_sort(entries_.begin(), entries_.end(), [](const LmsEntry& a, const LmsEntry& b) {
    if (a.sex != b.sex) return a.sex < b.sex;
    return a.age_years < b.age_years;
  });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].sex == entries_[i - 1].sex &&
        !(entries_[i].age_years > entries_[i - 1].age_years))
      throw std::runtime_error("lms table: duplicate (sex, age) row at age " +
                               csv::format_sig(entries_[i].age_years, 10));
  }
  for (const LmsEntry& e : entries_) {
    if (!(e.M > 0.0) || !(e.S > 0.0))
      throw std::runtime_error("lms table: non-positive M or S at sex " + to_string(e.sex) +
                               ", age " + csv::format_sig(e.age_years, 10));
  }
}

std::pair<double, double> LmsTable::coverage(Sex sex) const {
  const LmsEntry* first = nullptr;
  const LmsEntry* last = nullptr;
  for (const LmsEntry& e : entries_) {
    if (e.sex != sex) continue;
    if (!first) first = &e;
    last = &e;
  }
  if (!first) throw std::domain_error("lms table: no rows for sex " + to_string(sex));
  return {first->age_years, last->age_years};
}

LmsEntry LmsTable::interpolate(Sex sex, double age_years) const {
  auto lo = std::lower_bound(entries_.begin(), entries_.end(), sex,
                             [](const LmsEntry& e, Sex s) { return e.sex < s; });
  auto hi = std::upper_bound(entries_.begin(), entries_.end(), sex,
                             [](Sex s, const LmsEntry& e) { return s < e.sex; });
  if (lo == hi) throw std::domain_error("lms table: no rows for sex " + to_string(sex));
  if (age_years < lo->age_years - 1e-12 || age_years > (hi - 1)->age_years + 1e-12)
    throw std::domain_error("lms table: age " + csv::format_sig(age_years, 10) +
                            " outside coverage [" + csv::format_sig(lo->age_years, 10) + ", " +
                            csv::format_sig((hi - 1)->age_years, 10) + "]");

  auto upper = std::lower_bound(lo, hi, age_years,
                                [](const LmsEntry& e, double a) { return e.age_years < a; });
  if (upper == hi) --upper;
  if (upper == lo || std::fabs(upper->age_years - age_years) <= 1e-12) {
    LmsEntry out = *upper;
    out.age_years = age_years;
    return out;
  }
  const LmsEntry& right = *upper;
  const LmsEntry& left = *(upper - 1);
  const double w = (age_years - left.age_years) / (right.age_years - left.age_years);
  LmsEntry out;
  out.sex = sex;
  out.age_years = age_years;
  out.L = left.L + w * (right.L - left.L);
  out.M = left.M + w * (right.M - left.M);
  out.S = left.S + w * (right.S - left.S);
  return out;
}

LmsTable load_lms_table(std::istream& in, Measure measure) {
  csv::Reader reader(in);
  const auto col_sex = reader.column({"sex"});
  const auto col_agemos = reader.column({"agemos", "age_months"});
  const auto col_age = reader.column({"age", "age_years"});
  const auto col_l = reader.column({"l"});
  const auto col_m = reader.column({"m"});
  const auto col_s = reader.column({"s"});
  if (!col_sex) throw std::runtime_error("lms table: missing required column: Sex");
  if (!col_agemos && !col_age)
    throw std::runtime_error("lms table: missing required column: Agemos (or Age)");
  if (!col_l) throw std::runtime_error("lms table: missing required column: L");
  if (!col_m) throw std::runtime_error("lms table: missing required column: M");
  if (!col_s) throw std::runtime_error("lms table: missing required column: S");

  std::vector<LmsEntry> entries;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    const std::size_t line = reader.line_number();
    auto get = [&](std::size_t idx, const char* name) -> double {
      if (idx >= fields.size() || csv::is_missing(fields[idx]))
        throw std::runtime_error("lms table: line " + std::to_string(line) + ": missing " + name);
      const auto v = csv::parse_double(fields[idx]);
      if (!v)
        throw std::runtime_error("lms table: line " + std::to_string(line) + ": unparseable " +
                                 std::string(name) + " \"" + fields[idx] + "\"");
      return *v;
    };

    LmsEntry e;
    try {
      e.sex = parse_sex(fields.at(*col_sex));
    } catch (const std::exception& ex) {
      throw std::runtime_error("lms table: line " + std::to_string(line) + ": " + ex.what());
    }
    e.age_years = col_agemos && *col_agemos < fields.size() && !csv::is_missing(fields[*col_agemos])
                      ? get(*col_agemos, "Agemos") / 12.0
                      : get(col_age.value(), "Age");
    e.L = get(*col_l, "L");
    e.M = get(*col_m, "M");
    e.S = get(*col_s, "S");
    if (!(e.M > 0.0) || !(e.S > 0.0))
      throw std::runtime_error("lms table: line " + std::to_string(line) +
                               ": non-positive M or S");
    entries.push_back(e);
  }
  return LmsTable(measure, std::move(entries));
}

constexpr double kBoxCoxZeroL = 1e-12;

double lms_to_value(const LmsEntry& entry, double z) {
  if (std::fabs(entry.L) < kBoxCoxZeroL) return entry.M * std::exp(entry.S * z);
  const double base = 1.0 + entry.L * entry.S * z;
  if (!(base > 0.0))
    throw std::domain_error("lms_to_value: z outside the representable range (1 + LSz <= 0)");
  return entry.M * std::pow(base, 1.0 / entry.L);
}

double value_to_z(const LmsEntry& entry, double x) {
  if (!(x > 0.0)) throw std::domain_error("value_to_z: value must be positive");
  if (std::fabs(entry.L) < kBoxCoxZeroL) return std::log(x / entry.M) / entry.S;
  return (std::pow(x / entry.M, entry.L) - 1.0) / (entry.L * entry.S);
}

namespace {

/// Wichura's rational approximation for the standard normal quantile
/// (Applied Statistics algorithm 241, double-precision variant).
double normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num = q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                                 6.7265770927008700853e4) *
                                    r +
                                4.5921953931549871457e4) *
                                   r +
                               1.3731693765509461125e4) *
                                  r +
                              1.9715909503065514427e3) *
                                 r +
                             1.3314166789178437745e2) *
                                r +
                            3.3871328727963666080e0);
    const double den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                             3.9307895800092710610e4) *
                                r +
                            2.1213794301586595867e4) *
                               r +
                           5.3941960214247511077e3) *
                              r +
                          6.8718700749205790830e2) *
                             r +
                         4.2313330701600911252e1) *
                            r +
                        1.0);
    return num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    const double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                             2.41780725177450611770e-1) *
                                r +
                            1.27045825245236838258e0) *
                               r +
                           3.64784832476320460504e0) *
                              r +
                          5.76949722146069140550e0) *
                             r +
                         4.63033784615654529590e0) *
                            r +
                        1.42343711074968357734e0);
    const double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                             1.51986665636164571966e-2) *
                                r +
                            1.48103976427480074590e-1) *
                               r +
                           6.89767334985100004550e-1) *
                              r +
                          1.67638483018380384940e0) *
                             r +
                         2.05319162663775882187e0) *
                            r +
                        1.0);
    z = num / den;
  } else {
    r -= 5.0;
    const double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                             1.24266094738807843860e-3) *
                                r +
                            2.65321895265761230930e-2) *
                               r +
                           2.96560571828504891230e-1) *
                              r +
                          1.78482653991729133580e0) *
                             r +
                         5.46378491116411436990e0) *
                            r +
                        6.65790464350110377720e0);
    const double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                             1.84631831751005468180e-6) *
                                r +
                            7.86869131145613259100e-4) *
                               r +
                           1.48753612908506148525e-2) *
                              r +
                          1.36929880922735805310e-1) *
                             r +
                         5.99832206555887937690e-1) *
                            r +
                        1.0);
    z = num / den;
  }
  return q < 0.0 ? -z : z;
}

}  // namespace

double z_of_percentile(double p) {
  if (!(p > 0.0 && p < 100.0))
    throw std::domain_error("z_of_percentile: percentile must be in (0, 100)");
  return normal_quantile(p / 100.0);
}

double z_of_probability(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("z_of_probability: probability must be in (0, 1)");
  return normal_quantile(p);
}

double percentile_of_z(double z) {
  return 100.0 * 0.5 * std::erfc(-z / std::sqrt(2.0));
}

ChartCurveSet reference_curves(const LmsTable& table, Sex sex, std::span<const double> levels,
                               std::span<const double> age_grid) {
  ChartCurveSet chart;
  chart.measure = table.measure();
  chart.sex = sex;
  chart.ages.assign(age_grid.begin(), age_grid.end());

  std::vector<double> sorted_levels(levels.begin(), levels.end());
  std::sort(sorted_levels.begin(), sorted_levels.end());
  for (double level : sorted_levels) {
    LevelCurve curve;
    curve.level = level;
    const double z = z_of_percentile(level);
    curve.values.reserve(age_grid.size());
    for (double age : age_grid) curve.values.push_back(lms_to_value(table.interpolate(sex, age), z));
    chart.levels.push_back(std::move(curve));
  }
  return chart;
}

namespace {

std::string level_label(double level) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", level);
  return buf;
}

}  // namespace

void write_chart_csv(std::ostream& out, const ChartCurveSet& chart) {
  out << "age";
  for (const LevelCurve& c : chart.levels) out << ",p" << level_label(c.level);
  out << '\n';
  for (std::size_t i = 0; i < chart.ages.size(); ++i) {
    out << csv::format_sig(chart.ages[i], 6);
    for (const LevelCurve& c : chart.levels) out << ',' << csv::format_sig(c.values[i], 6);
    out << '\n';
  }
}

ChartCurveSet read_chart_csv(std::istream& in, Measure measure, Sex sex) {
  csv::Reader reader(in);
  std::vector<std::string> header = reader.header();
  for (std::string& h : header) {
    while (!h.empty() && std::isspace(static_cast<unsigned char>(h.front()))) h.erase(h.begin());
    while (!h.empty() && std::isspace(static_cast<unsigned char>(h.back()))) h.pop_back();
    for (char& c : h) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (header.empty() || header[0] != "age")
    throw std::runtime_error("chart csv: first column must be age");

  ChartCurveSet chart;
  chart.measure = measure;
  chart.sex = sex;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const std::string& name = header[i];
    if (name.size() < 2 || name[0] != 'p')
      throw std::runtime_error("chart csv: unexpected column \"" + name + "\"");
    const auto level = csv::parse_double(name.substr(1));
    if (!level || !(*level > 0.0 && *level < 100.0))
      throw std::runtime_error("chart csv: unexpected column \"" + name + "\"");
    chart.levels.push_back({*level, {}});
  }
  if (chart.levels.empty()) throw std::runtime_error("chart csv: no percentile columns");

  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != header.size())
      throw std::runtime_error("chart csv: line " + std::to_string(reader.line_number()) +
                               ": wrong field count");
    const auto age = csv::parse_double(fields[0]);
    if (!age)
      throw std::runtime_error("chart csv: line " + std::to_string(reader.line_number()) +
                               ": unparseable age");
    chart.ages.push_back(*age);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto v = csv::parse_double(fields[i]);
      if (!v)
        throw std::runtime_error("chart csv: line " + std::to_string(reader.line_number()) +
                                 ": unparseable value");
      chart.levels[i - 1].values.push_back(*v);
    }
  }
  return chart;
}

namespace {

const LevelCurve* find_level(const ChartCurveSet& chart, double level) {
  for (const LevelCurve& c : chart.levels)
    if (std::fabs(c.level - level) <= 1e-9) return &c;
  return nullptr;
}

}  // namespace

ChartComparison compare_charts(const ChartCurveSet& a, const ChartCurveSet& b,
                               std::span<const double> levels) {
  std::vector<double> wanted(levels.begin(), levels.end());
  if (wanted.empty()) wanted = {3.0, 50.0, 97.0};
  std::sort(wanted.begin(), wanted.end());

  // Shared grid ages, matched within tolerance.
  std::vector<std::pair<std::size_t, std::size_t>> shared;
  for (std::size_t i = 0, j = 0; i < a.ages.size() && j < b.ages.size();) {
    const double da = a.ages[i], db = b.ages[j];
    if (std::fabs(da - db) <= 1e-9) {
      shared.emplace_back(i, j);
      ++i;
      ++j;
    } else if (da < db) {
      ++i;
    } else {
      ++j;
    }
  }
  if (shared.empty()) throw std::domain_error("compare_charts: grids are disjoint");

  ChartComparison cmp;
  cmp.shared_ages = shared.size();
  cmp.age_lo = a.ages[shared.front().first];
  cmp.age_hi = a.ages[shared.back().first];

  for (double level : wanted) {
    const LevelCurve* ca = find_level(a, level);
    const LevelCurve* cb = find_level(b, level);
    if (!ca || !cb)
      throw std::domain_error("compare_charts: level " + level_label(level) +
                              " missing from one chart");
    LevelComparison lc;
    lc.level = level;
    lc.age_of_max_abs = a.ages[shared.front().first];
    double sum_abs = 0.0, sum_diff = 0.0, sum_rel = 0.0;
    for (const auto& [ia, ib] : shared) {
      const double va = ca->values[ia];
      const double vb = cb->values[ib];
      const double diff = vb - va;
      sum_diff += diff;
      sum_abs += std::fabs(diff);
      const double rel = diff / va;
      sum_rel += rel;
      if (std::fabs(diff) > lc.max_abs_diff) {
        lc.max_abs_diff = std::fabs(diff);
        lc.age_of_max_abs = a.ages[ia];
      }
      lc.max_rel_diff = std::max(lc.max_rel_diff, std::fabs(rel));
    }
    const double n = static_cast<double>(shared.size());
    lc.mean_abs_diff = sum_abs / n;
    lc.mean_diff = sum_diff / n;
    lc.mean_rel_diff = sum_rel / n;
    cmp.overall_max_abs_diff = std::max(cmp.overall_max_abs_diff, lc.max_abs_diff);
    cmp.overall_max_rel_diff = std::max(cmp.overall_max_rel_diff, lc.max_rel_diff);
    cmp.levels.push_back(lc);
  }
  return cmp;
}

nlohmann::json ChartComparison::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const LevelComparison& lc : levels) {
    lv.push_back({{"level", lc.level},
                  {"max_abs_diff", lc.max_abs_diff},
                  {"age_of_max_abs", lc.age_of_max_abs},
                  {"mean_abs_diff", lc.mean_abs_diff},
                  {"mean_diff", lc.mean_diff},
                  {"mean_rel_diff", lc.mean_rel_diff},
                  {"max_rel_diff", lc.max_rel_diff}});
  }
  return {{"levels", lv},
          {"shared_ages", shared_ages},
          {"age_lo", age_lo},
          {"age_hi", age_hi},
          {"overall_max_abs_diff", overall_max_abs_diff},
          {"overall_max_rel_diff", overall_max_rel_diff}};
}

std::string ChartComparison::to_text() const {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "chart comparison over %zu shared ages [%g, %g]\n", shared_ages,
                age_lo, age_hi);
  out += buf;
  for (const LevelComparison& lc : levels) {
    std::snprintf(buf, sizeof(buf),
                  "  p%-4g max|d|=%.6g at age %.6g  mean|d|=%.6g  mean d=%+.6g  "
                  "mean rel=%+.4e  max rel=%.4e\n",
                  lc.level, lc.max_abs_diff, lc.age_of_max_abs, lc.mean_abs_diff, lc.mean_diff,
                  lc.mean_rel_diff, lc.max_rel_diff);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "  overall max|d|=%.6g  overall max rel=%.4e\n",
                overall_max_abs_diff, overall_max_rel_diff);
  out += buf;
  return out;
}

}  // namespace growth
