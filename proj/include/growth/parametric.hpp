#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

namespace growth {

/// Polynomial in the scaled variable u = (age - age_center) / age_halfwidth,
/// coefficients[j] multiplying u^j. Fitting scales the data range onto
/// [-1, 1]; evaluation outside it is extrapolation.
struct PolynomialCurve {
  int degree = 0;
  std::vector<double> coefficients;
  double age_center = 0.0;
  double age_halfwidth = 1.0;

  double eval(double age) const;  // Horner in u
  bool in_fit_range(double age) const;
  nlohmann::json to_json() const;
  static PolynomialCurve from_json(const nlohmann::json& j);
};

/// Sum of three logistic components; monotone increasing when every
/// amplitude and rate is positive.
struct TripleLogisticCurve {
  std::array<double, 3> amplitude{};   // cm
  std::array<double, 3> rate{};        // 1/years
  std::array<double, 3> inflection{};  // years

  double eval(double t) const;
  double derivative(double t) const;  // analytic df/dt
  /// Reorders components so inflection ages are non-decreasing.
  void canonicalize();
  nlohmann::json to_json() const;
  static TripleLogisticCurve from_json(const nlohmann::json& j);
};

struct FitReport {
  double sse = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_abs_residual = 0.0;
  std::vector<double> sse_history;  // SSE after each accepted step

  nlohmann::json to_json() const;
};

/// Unweighted (or weighted) least squares in the scaled variable via
/// Householder QR. Needs at least degree+1 distinct ages; throws
/// std::domain_error otherwise.
std::pair<PolynomialCurve, FitReport> fit_polynomial(std::span<const double> ages,
                                                     std::span<const double> values, int degree,
                                                     std::span<const double> weights = {});

struct LmOptions {
  int max_iterations = 500;
  double tolerance = 1e-10;       // relative SSE change declaring convergence
  double initial_damping = 1e-3;  // x10 on rejection, x0.3 on acceptance
};

/// Damped least squares with the analytic Jacobian. Steps producing a
/// non-positive amplitude or rate, a NaN, or a larger SSE are rejected and
/// retried with more damping. Returns best-so-far with converged=false when
/// the iteration budget runs out; components are re-ordered by inflection
/// age on return. Throws std::runtime_error when residuals go non-finite.
std::pair<TripleLogisticCurve, FitReport> fit_triple_logistic(std::span<const double> ages,
                                                              std::span<const double> statures,
                                                              const TripleLogisticCurve& init,
                                                              const LmOptions& options = {});

/// Data-driven starting point: inflections at 1, 8 and 13 years; the value
/// range above its minimum split 55/20/25 across the components (the first
/// also carries the minimum); rates 1.0, 0.5, 1.0.
TripleLogisticCurve default_logistic_init(std::span<const double> ages,
                                          std::span<const double> statures);

/// Partial derivatives of eval with respect to the nine parameters, in the
/// order a1,a2,a3,b1,b2,b3,c1,c2,c3.
std::array<double, 9> triple_logistic_gradient(const TripleLogisticCurve& curve, double t);

struct MonotonicityResult {
  bool monotone = true;
  std::vector<double> violations;  // ages where the curve decreases
};

/// Consecutive grid evaluations must be non-decreasing within 1e-9 slack.
MonotonicityResult check_monotone(const PolynomialCurve& curve, std::span<const double> age_grid);
MonotonicityResult check_monotone(const TripleLogisticCurve& curve,
                                  std::span<const double> age_grid);

/// Interior local minimum of a degree-4 polynomial with the smallest value
/// inside [range.first, range.second], found from the real roots of the
/// derivative cubic and refined to |f'| < 1e-10. Returns nullopt when the
/// minimum over the range sits on a boundary. Requires degree 4.
std::optional<double> find_bmi_nadir(const PolynomialCurve& curve,
                                     std::pair<double, double> search_range);

}  // namespace growth
