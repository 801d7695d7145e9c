#include "growth/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace growth {

namespace {

constexpr double kAgeTol = 1e-9;

std::vector<double> half_year_steps(double from, double to) {
  std::vector<double> ages;
  for (double a = from; to >= from ? a <= to + kAgeTol : a >= to - kAgeTol;
       a += (to >= from ? 0.5 : -0.5))
    ages.push_back(a);
  return ages;
}

std::vector<double> tenth_year_steps_down(double from, double to) {
  std::vector<double> ages;
  for (int i = 0;; ++i) {
    const double a = from - 0.1 * i;
    if (a < to - kAgeTol) break;
    ages.push_back(a);
  }
  return ages;
}

const SeriesPoint* find_point(const EmpiricalSeries& s, double age) {
  for (const SeriesPoint& p : s.points)
    if (std::fabs(p.age - age) <= kAgeTol) return &p;
  return nullptr;
}

}  // namespace

EmpiricalSeries apply_padding(const EmpiricalSeries& series, const PaddingRule& rule,
                              const EmpiricalSeries* source) {
  if (series.points.empty()) throw std::domain_error("apply_padding: empty series");
  if (rule.target_ages.empty()) return series;

  EmpiricalSeries out = series;
  switch (rule.mode) {
    case PadMode::repeat_anchor_value: {
      const EmpiricalSeries& anchor_in = source ? *source : series;
      const SeriesPoint* anchor = find_point(anchor_in, rule.anchor_age);
      if (!anchor)
        throw std::domain_error("apply_padding: anchor age " + std::to_string(rule.anchor_age) +
                                " not present in series");
      for (double age : rule.target_ages) out.points.push_back({age, anchor->value, 0, true});
      break;
    }
    case PadMode::repeat_window_max: {
      const EmpiricalSeries& window_in = source ? *source : series;
      double best = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (const SeriesPoint& p : window_in.points) {
        if (p.age >= rule.source_window.first - kAgeTol &&
            p.age <= rule.source_window.second + kAgeTol) {
          best = std::max(best, p.value);
          any = true;
        }
      }
      if (!any)
        throw std::domain_error("apply_padding: source window contains no series points");
      for (double age : rule.target_ages) out.points.push_back({age, best, 0, true});
      break;
    }
    case PadMode::use_empirical: {
      if (!source) throw std::domain_error("apply_padding: use_empirical needs a source series");
      for (double age : rule.target_ages) {
        const SeriesPoint* p = find_point(*source, age);
        if (!p)
          throw std::domain_error("apply_padding: source series has no point at age " +
                                  std::to_string(age));
        out.points.push_back({age, p->value, p->n, true});
      }
      break;
    }
  }

  std::sort(out.points.begin(), out.points.end(),
            [](const SeriesPoint& a, const SeriesPoint& b) { return a.age < b.age; });
  for (std::size_t i = 1; i < out.points.size(); ++i)
    if (out.points[i].age - out.points[i - 1].age <= kAgeTol)
      throw std::domain_error("apply_padding: target age collides with an existing point");
  return out;
}

int SmoothingPolicy::window_at(double age) const {
  for (const WindowOverride& o : window_by_age)
    if (age >= o.age_lo - kAgeTol && age <= o.age_hi + kAgeTol) return o.window_points;
  return window_points;
}

SmoothingPolicy SmoothingPolicy::edw_weight() {
  SmoothingPolicy p;
  p.name = "edw-weight";
  p.window_points = 13;
  p.local_degree = 1;
  PaddingRule lower;
  lower.side = PadSide::lower;
  lower.mode = PadMode::repeat_anchor_value;
  lower.anchor_age = 2.25;
  lower.target_ages = tenth_year_steps_down(1.75, 1.15);  // 7 points
  p.lower_pad = lower;
  PaddingRule upper;
  upper.side = PadSide::upper;
  upper.mode = PadMode::repeat_window_max;
  upper.source_window = {16.75, 19.75};
  upper.target_ages = half_year_steps(20.25, 23.25);  // 7 points
  p.upper_pad = upper;
  return p;
}

SmoothingPolicy SmoothingPolicy::nhanes_weight() {
  SmoothingPolicy p;
  p.name = "nhanes-weight";
  p.window_points = 13;
  p.local_degree = 1;
  // The chart series itself reaches down to the 1.75 bin; only the ages
  // below it are synthetic repeats of that bin's value.
  PaddingRule lower;
  lower.side = PadSide::lower;
  lower.mode = PadMode::repeat_anchor_value;
  lower.anchor_age = 1.75;
  lower.target_ages = tenth_year_steps_down(1.65, 1.15);  // 6 points
  p.lower_pad = lower;
  // Real percentile points above age 20 are borrowed for window support.
  PaddingRule upper;
  upper.side = PadSide::upper;
  upper.mode = PadMode::use_empirical;
  upper.target_ages = half_year_steps(20.25, 23.25);  // 7 points
  p.upper_pad = upper;
  return p;
}

SmoothingPolicy SmoothingPolicy::bmi() {
  SmoothingPolicy p;
  p.name = "bmi";
  p.window_points = 20;  // ages above 12.5
  p.local_degree = 1;
  p.window_by_age = {{0.0, 12.5, 7}};  // five neighbours plus the two added lower points
  PaddingRule lower;
  lower.side = PadSide::lower;
  lower.mode = PadMode::repeat_anchor_value;
  lower.anchor_age = 2.25;
  lower.target_ages = {2.0, 1.75};
  p.lower_pad = lower;
  PaddingRule upper;
  upper.side = PadSide::upper;
  upper.mode = PadMode::repeat_window_max;
  upper.source_window = {16.75, 19.75};
  upper.target_ages = half_year_steps(20.25, 23.25);  // 7 points
  p.upper_pad = upper;
  return p;
}

SmoothingPolicy SmoothingPolicy::by_name(const std::string& name) {
  if (name == "edw-weight") return edw_weight();
  if (name == "nhanes-weight") return nhanes_weight();
  if (name == "bmi") return bmi();
  throw std::invalid_argument("unknown smoothing preset: \"" + name + "\"");
}

namespace {

/// Weighted polynomial fit of degree <= 2 centred at x0, evaluated at x0.
/// Falls back to lower degrees when the weighted design is singular.
double local_fit_at(std::span<const double> x, std::span<const double> y,
                    std::span<const double> w, double x0, int degree) {
  const std::size_t n = x.size();
  for (int deg = degree; deg > 0; --deg) {
    // Normal equations on centred data; dimension deg+1 <= 3.
    double m[3][3] = {};
    double rhs[3] = {};
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x[i] - x0;
      const double pow_d[3] = {1.0, d, d * d};
      for (int r = 0; r <= deg; ++r) {
        for (int c = 0; c <= deg; ++c) m[r][c] += w[i] * pow_d[r] * pow_d[c];
        rhs[r] += w[i] * pow_d[r] * y[i];
      }
    }
    // Gaussian elimination with partial pivoting on the (deg+1) system.
    const int dim = deg + 1;
    double a[3][4];
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) a[r][c] = m[r][c];
      a[r][dim] = rhs[r];
    }
    bool singular = false;
    for (int col = 0; col < dim && !singular; ++col) {
      int pivot = col;
      for (int r = col + 1; r < dim; ++r)
        if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
      if (std::fabs(a[pivot][col]) < 1e-12 * std::max(1.0, std::fabs(m[0][0]))) {
        singular = true;
        break;
      }
      if (pivot != col)
        for (int c = 0; c <= dim; ++c) std::swap(a[pivot][c], a[col][c]);
      for (int r = col + 1; r < dim; ++r) {
        const double f = a[r][col] / a[col][col];
        for (int c = col; c <= dim; ++c) a[r][c] -= f * a[col][c];
      }
    }
    if (singular) continue;  // retry with a lower degree
    double coef[3];
    for (int r = dim - 1; r >= 0; --r) {
      double s = a[r][dim];
      for (int c = r + 1; c < dim; ++c) s -= a[r][c] * coef[c];
      coef[r] = s / a[r][r];
    }
    return coef[0];  // value at the centre
  }
  // Degree 0: weighted mean.
  double sw = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    swy += w[i] * y[i];
  }
  if (!(sw > 0.0)) throw std::domain_error("loess: window has no weight");
  return swy / sw;
}

}  // namespace

SmoothedSeries loess_smooth(const EmpiricalSeries& series, const SmoothingPolicy& policy) {
  if (policy.local_degree < 0 || policy.local_degree > 2)
    throw std::invalid_argument("loess: local_degree must be 0, 1 or 2");
  const auto& pts = series.points;

  SmoothedSeries out;
  out.sex = series.sex;
  out.measure = series.measure;
  out.level = series.level;
  out.policy_name = policy.name;

  std::vector<std::size_t> order(pts.size());
  std::vector<double> xs(pts.size()), ys(pts.size()), ws(pts.size());
  for (const SeriesPoint& p : pts) {
    if (p.synthetic) continue;
    const double a = p.age;
    const int k = policy.window_at(a);
    if (k < policy.local_degree + 2)
      throw std::invalid_argument("loess: window_points must be >= local_degree + 2");
    if (static_cast<std::size_t>(k) > pts.size())
      throw std::domain_error("loess: series has fewer points than the window needs");

    // k nearest by |age - a|; ties prefer the lower age.
    order.resize(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      const double di = std::fabs(pts[i].age - a);
      const double dj = std::fabs(pts[j].age - a);
      if (di != dj) return di < dj;
      return pts[i].age < pts[j].age;
    });

    xs.clear();
    ys.clear();
    ws.clear();
    double dmax = 0.0;
    for (int i = 0; i < k; ++i) {
      const SeriesPoint& q = pts[order[static_cast<std::size_t>(i)]];
      xs.push_back(q.age);
      ys.push_back(q.value);
      dmax = std::max(dmax, std::fabs(q.age - a));
    }
    for (int i = 0; i < k; ++i) {
      if (dmax <= 0.0) {
        ws.push_back(1.0);
        continue;
      }
      const double u = std::fabs(xs[static_cast<std::size_t>(i)] - a) / dmax;
      const double t = 1.0 - u * u * u;
      ws.push_back(t * t * t);
    }

    const double value = local_fit_at(xs, ys, ws, a, policy.local_degree);
    out.points.push_back({a, value, p.n, false});
  }
  return out;
}

EmpiricalSeries wlr_presmooth(const EmpiricalSeries& series, std::span<const double> weights) {
  const auto& pts = series.points;
  if (pts.size() < 3) throw std::domain_error("wlr_presmooth: need at least 3 points");
  if (weights.size() != pts.size())
    throw std::invalid_argument("wlr_presmooth: one weight per point required");

  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double w = weights[i];
    if (w < 0.0) throw std::invalid_argument("wlr_presmooth: negative weight");
    sw += w;
    sx += w * pts[i].age;
    sy += w * pts[i].value;
    sxx += w * pts[i].age * pts[i].age;
    sxy += w * pts[i].age * pts[i].value;
  }
  if (!(sw > 0.0)) throw std::domain_error("wlr_presmooth: total weight is zero");
  const double det = sw * sxx - sx * sx;
  if (!(det > 1e-12 * std::max(1.0, sw * sxx)))
    throw std::domain_error("wlr_presmooth: singular design (all weighted ages equal)");
  const double slope = (sw * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / sw;

  EmpiricalSeries out = series;
  for (SeriesPoint& p : out.points) p.value = intercept + slope * p.age;
  return out;
}

}  // namespace growth
