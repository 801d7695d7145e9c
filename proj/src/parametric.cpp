#include "growth/parametric.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace growth {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double PolynomialCurve::eval(double age) const {
  const double u = (age - age_center) / age_halfwidth;
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * u + *it;
  return acc;
}

bool PolynomialCurve::in_fit_range(double age) const {
  return age >= age_center - age_halfwidth && age <= age_center + age_halfwidth;
}

nlohmann::json PolynomialCurve::to_json() const {
  return {{"type", "polynomial"},
          {"degree", degree},
          {"age_center", age_center},
          {"age_halfwidth", age_halfwidth},
          {"coefficients", coefficients}};
}

PolynomialCurve PolynomialCurve::from_json(const nlohmann::json& j) {
  PolynomialCurve c;
  c.degree = j.at("degree").get<int>();
  c.age_center = j.at("age_center").get<double>();
  c.age_halfwidth = j.at("age_halfwidth").get<double>();
  c.coefficients = j.at("coefficients").get<std::vector<double>>();
  return c;
}

double TripleLogisticCurve::eval(double t) const {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += amplitude[i] * logistic(rate[i] * (t - inflection[i]));
  return sum;
}

double TripleLogisticCurve::derivative(double t) const {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double s = logistic(rate[i] * (t - inflection[i]));
    sum += amplitude[i] * rate[i] * s * (1.0 - s);
  }
  return sum;
}

void TripleLogisticCurve::canonicalize() {
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return inflection[i] < inflection[j]; });
  const TripleLogisticCurve tmp = *this;
  for (int k = 0; k < 3; ++k) {
    amplitude[k] = tmp.amplitude[order[k]];
    rate[k] = tmp.rate[order[k]];
    inflection[k] = tmp.inflection[order[k]];
  }
}

nlohmann::json TripleLogisticCurve::to_json() const {
  return {{"type", "triple_logistic"},
          {"amplitude", amplitude},
          {"rate", rate},
          {"inflection", inflection}};
}

TripleLogisticCurve TripleLogisticCurve::from_json(const nlohmann::json& j) {
  TripleLogisticCurve c;
  c.amplitude = j.at("amplitude").get<std::array<double, 3>>();
  c.rate = j.at("rate").get<std::array<double, 3>>();
  c.inflection = j.at("inflection").get<std::array<double, 3>>();
  return c;
}

nlohmann::json FitReport::to_json() const {
  return {{"sse", sse},
          {"iterations", iterations},
          {"converged", converged},
          {"max_abs_residual", max_abs_residual},
          {"sse_history", sse_history}};
}

std::pair<PolynomialCurve, FitReport> fit_polynomial(std::span<const double> ages,
                                                     std::span<const double> values, int degree,
                                                     std::span<const double> weights) {
  if (degree < 0) throw std::invalid_argument("fit_polynomial: degree must be >= 0");
  if (ages.size() != values.size())
    throw std::invalid_argument("fit_polynomial: ages/values size mismatch");
  if (!weights.empty() && weights.size() != ages.size())
    throw std::invalid_argument("fit_polynomial: weights size mismatch");

  const std::set<double> distinct(ages.begin(), ages.end());
  if (distinct.size() < static_cast<std::size_t>(degree) + 1)
    throw std::domain_error("fit_polynomial: need at least degree+1 distinct ages");

  const auto [lo_it, hi_it] = std::minmax_element(ages.begin(), ages.end());
  PolynomialCurve curve;
  curve.degree = degree;
  curve.age_center = (*lo_it + *hi_it) / 2.0;
  curve.age_halfwidth = (*hi_it - *lo_it) / 2.0;
  if (!(curve.age_halfwidth > 0.0)) curve.age_halfwidth = 1.0;  // single distinct age, degree 0

  const auto n = static_cast<Eigen::Index>(ages.size());
  Eigen::MatrixXd design(n, degree + 1);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (ages[static_cast<std::size_t>(i)] - curve.age_center) / curve.age_halfwidth;
    const double sw = weights.empty() ? 1.0 : std::sqrt(weights[static_cast<std::size_t>(i)]);
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      design(i, j) = sw * p;
      p *= u;
    }
    rhs(i) = sw * values[static_cast<std::size_t>(i)];
  }

  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  curve.coefficients.assign(coef.data(), coef.data() + coef.size());

  FitReport report;
  report.iterations = 1;
  report.converged = true;
  const Eigen::VectorXd resid = design * coef - rhs;  // scaled by sqrt(weight)
  report.sse = resid.squaredNorm();
  for (std::size_t i = 0; i < ages.size(); ++i) {
    const double r = curve.eval(ages[i]) - values[i];
    report.max_abs_residual = std::max(report.max_abs_residual, std::fabs(r));
  }
  report.sse_history = {report.sse};
  return {std::move(curve), report};
}

std::array<double, 9> triple_logistic_gradient(const TripleLogisticCurve& curve, double t) {
  std::array<double, 9> g{};
  for (int i = 0; i < 3; ++i) {
    const double s = logistic(curve.rate[i] * (t - curve.inflection[i]));
    const double bell = s * (1.0 - s);
    g[static_cast<std::size_t>(i)] = s;                                             // d/da_i
    g[static_cast<std::size_t>(3 + i)] = curve.amplitude[i] * bell * (t - curve.inflection[i]);  // d/db_i
    g[static_cast<std::size_t>(6 + i)] = -curve.amplitude[i] * curve.rate[i] * bell;             // d/dc_i
  }
  return g;
}

TripleLogisticCurve default_logistic_init(std::span<const double> ages,
                                          std::span<const double> statures) {
  if (statures.empty()) throw std::domain_error("default_logistic_init: no data");
  (void)ages;
  const auto [lo_it, hi_it] = std::minmax_element(statures.begin(), statures.end());
  const double lo = *lo_it;
  const double range = std::max(*hi_it - lo, 1.0);
  TripleLogisticCurve c;
  c.amplitude = {std::max(lo + 0.55 * range, 0.1), std::max(0.20 * range, 0.1),
                 std::max(0.25 * range, 0.1)};
  c.rate = {1.0, 0.5, 1.0};
  c.inflection = {1.0, 8.0, 13.0};
  return c;
}

namespace {

struct ParamVector {
  std::array<double, 9> v{};  // a1,a2,a3,b1,b2,b3,c1,c2,c3

  static ParamVector from(const TripleLogisticCurve& c) {
    ParamVector p;
    for (int i = 0; i < 3; ++i) {
      p.v[static_cast<std::size_t>(i)] = c.amplitude[i];
      p.v[static_cast<std::size_t>(3 + i)] = c.rate[i];
      p.v[static_cast<std::size_t>(6 + i)] = c.inflection[i];
    }
    return p;
  }

  TripleLogisticCurve curve() const {
    TripleLogisticCurve c;
    for (int i = 0; i < 3; ++i) {
      c.amplitude[i] = v[static_cast<std::size_t>(i)];
      c.rate[i] = v[static_cast<std::size_t>(3 + i)];
      c.inflection[i] = v[static_cast<std::size_t>(6 + i)];
    }
    return c;
  }

  bool positivity_ok() const {
    for (int i = 0; i < 6; ++i)
      if (!(v[static_cast<std::size_t>(i)] > 0.0)) return false;
    return true;
  }
};

double sse_of(const TripleLogisticCurve& c, std::span<const double> t, std::span<const double> y) {
  double sse = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = c.eval(t[i]) - y[i];
    sse += r * r;
  }
  return sse;
}

}  // namespace

std::pair<TripleLogisticCurve, FitReport> fit_triple_logistic(std::span<const double> ages,
                                                              std::span<const double> statures,
                                                              const TripleLogisticCurve& init,
                                                              const LmOptions& options) {
  if (ages.size() != statures.size())
    throw std::invalid_argument("fit_triple_logistic: ages/statures size mismatch");
  if (ages.size() < 9)
    throw std::domain_error("fit_triple_logistic: need at least 9 points");
  const auto [lo_it, hi_it] = std::minmax_element(ages.begin(), ages.end());
  if (!(*hi_it - *lo_it >= 10.0))
    throw std::domain_error("fit_triple_logistic: ages must span at least 10 years");

  const auto n = static_cast<Eigen::Index>(ages.size());
  ParamVector cur = ParamVector::from(init);
  TripleLogisticCurve cur_curve = cur.curve();
  double cur_sse = sse_of(cur_curve, ages, statures);
  if (!std::isfinite(cur_sse))
    throw std::runtime_error("fit_triple_logistic: non-finite residuals at the starting point");

  FitReport report;
  report.sse_history = {cur_sse};
  double damping = options.initial_damping;
  bool converged = false;

  Eigen::MatrixXd jac(n, 9);
  Eigen::VectorXd resid(n);

  int iter = 0;
  for (; iter < options.max_iterations && !converged; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = ages[static_cast<std::size_t>(i)];
      resid(i) = cur_curve.eval(t) - statures[static_cast<std::size_t>(i)];
      const auto g = triple_logistic_gradient(cur_curve, t);
      for (int j = 0; j < 9; ++j) jac(i, j) = g[static_cast<std::size_t>(j)];
    }
    if (!resid.allFinite())
      throw std::runtime_error("fit_triple_logistic: non-finite residuals");

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * resid;

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index d = 0; d < 9; ++d)
        damped(d, d) += damping * std::max(jtj(d, d), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);

      ParamVector cand = cur;
      for (int j = 0; j < 9; ++j) cand.v[static_cast<std::size_t>(j)] += step(j);

      double cand_sse = std::numeric_limits<double>::infinity();
      if (cand.positivity_ok()) cand_sse = sse_of(cand.curve(), ages, statures);

      if (std::isfinite(cand_sse) && cand_sse < cur_sse) {
        const double rel_drop = (cur_sse - cand_sse) / std::max(cur_sse, 1e-300);
        cur = cand;
        cur_curve = cur.curve();
        cur_sse = cand_sse;
        report.sse_history.push_back(cur_sse);
        damping *= 0.3;
        accepted = true;
        if (rel_drop < options.tolerance || cur_sse <= 1e-300) converged = true;
      } else {
        damping *= 10.0;
        if (damping > 1e14) break;  // no acceptable step at this linearization
      }
    }
    if (!accepted) break;
  }

  cur_curve.canonicalize();
  report.sse = cur_sse;
  report.iterations = iter;
  report.converged = converged;
  for (std::size_t i = 0; i < ages.size(); ++i)
    report.max_abs_residual =
        std::max(report.max_abs_residual, std::fabs(cur_curve.eval(ages[i]) - statures[i]));
  return {cur_curve, report};
}

namespace {

template <typename Eval>
MonotonicityResult check_monotone_impl(Eval&& f, std::span<const double> grid) {
  MonotonicityResult result;
  if (grid.size() < 2) return result;
  double prev = f(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v < prev - 1e-9) {
      result.monotone = false;
      result.violations.push_back(grid[i]);
    }
    prev = v;
  }
  return result;
}

}  // namespace

MonotonicityResult check_monotone(const PolynomialCurve& curve, std::span<const double> grid) {
  return check_monotone_impl([&](double t) { return curve.eval(t); }, grid);
}

MonotonicityResult check_monotone(const TripleLogisticCurve& curve,
                                  std::span<const double> grid) {
  return check_monotone_impl([&](double t) { return curve.eval(t); }, grid);
}

namespace {

/// Real roots of c0 + c1 x + c2 x^2 + c3 x^3, degenerate leading terms allowed.
std::vector<double> real_cubic_roots(double c0, double c1, double c2, double c3) {
  const double scale = std::max({std::fabs(c0), std::fabs(c1), std::fabs(c2), std::fabs(c3)});
  if (scale == 0.0) return {};
  const double eps = 1e-14 * scale;

  if (std::fabs(c3) <= eps) {
    if (std::fabs(c2) <= eps) {
      if (std::fabs(c1) <= eps) return {};
      return {-c0 / c1};
    }
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return {};
    const double sq = std::sqrt(disc);
    // Citardauq pairing avoids cancellation.
    const double q = -0.5 * (c1 + (c1 >= 0.0 ? sq : -sq));
    std::vector<double> roots;
    roots.push_back(q / c2);
    if (q != 0.0) roots.push_back(c0 / q);
    return roots;
  }

  // Normalize to x^3 + p x^2 + q x + r and depress with x = y - p/3.
  const double p = c2 / c3;
  const double q = c1 / c3;
  const double r = c0 / c3;
  const double a = q - p * p / 3.0;
  const double b = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
  const double shift = -p / 3.0;
  const double disc = b * b / 4.0 + a * a * a / 27.0;

  std::vector<double> roots;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-b / 2.0 + sq);
    const double v = std::cbrt(-b / 2.0 - sq);
    roots.push_back(u + v + shift);
  } else {
    const double m = 2.0 * std::sqrt(std::max(-a / 3.0, 0.0));
    if (m == 0.0) {
      roots.push_back(shift);
    } else {
      const double arg = std::clamp(3.0 * b / (a * m), -1.0, 1.0);
      const double theta = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k)
        roots.push_back(m * std::cos(theta - 2.0 * M_PI * k / 3.0) + shift);
    }
  }
  return roots;
}

}  // namespace

std::optional<double> find_bmi_nadir(const PolynomialCurve& curve,
                                     std::pair<double, double> search_range) {
  if (curve.degree != 4 || curve.coefficients.size() != 5)
    throw std::domain_error("find_bmi_nadir: curve must be a degree-4 polynomial");
  const auto [age_lo, age_hi] = search_range;
  if (!(age_hi > age_lo)) throw std::invalid_argument("find_bmi_nadir: empty search range");

  const auto& c = curve.coefficients;
  // Stationary points: roots of the derivative cubic in u.
  std::vector<double> roots =
      real_cubic_roots(c[1], 2.0 * c[2], 3.0 * c[3], 4.0 * c[4]);

  auto dval = [&](double u) {
    return c[1] + u * (2.0 * c[2] + u * (3.0 * c[3] + u * 4.0 * c[4]));
  };
  auto ddval = [&](double u) { return 2.0 * c[2] + u * (6.0 * c[3] + u * 12.0 * c[4]); };

  const double u_lo = (age_lo - curve.age_center) / curve.age_halfwidth;
  const double u_hi = (age_hi - curve.age_center) / curve.age_halfwidth;

  std::optional<double> best_age;
  double best_value = std::numeric_limits<double>::infinity();
  for (double u : roots) {
    // Newton polish on the derivative.
    for (int it = 0; it < 50; ++it) {
      const double d = dval(u);
      const double dd = ddval(u);
      if (dd == 0.0 || std::fabs(d) < 1e-300) break;
      const double next = u - d / dd;
      if (!std::isfinite(next) || std::fabs(next - u) < 1e-16 * std::max(1.0, std::fabs(u))) {
        u = next;
        break;
      }
      u = next;
    }
    if (!(u > u_lo + 1e-12 && u < u_hi - 1e-12)) continue;  // interior only
    // Local minimum: curvature up, or derivative sign change across u.
    const double dd = ddval(u);
    const double h = 1e-6 * std::max(1.0, std::fabs(u));
    const bool is_min = dd > 0.0 || (dd == 0.0 && dval(u - h) < 0.0 && dval(u + h) > 0.0);
    if (!is_min) continue;
    const double age = curve.age_center + u * curve.age_halfwidth;
    const double value = curve.eval(age);
    if (value < best_value - 1e-15 ||
        (std::fabs(value - best_value) <= 1e-15 && (!best_age || age < *best_age))) {
      best_value = value;
      best_age = age;
    }
  }

  if (!best_age) return std::nullopt;
  // A boundary value below every interior minimum means the curve is still
  // descending into an edge; no nadir to report.
  if (std::min(curve.eval(age_lo), curve.eval(age_hi)) < best_value) return std::nullopt;
  return best_age;
}

}  // namespace growth
