#pragma once

// Supremum tail classes over a Weibullian random horizon.
//
// Every quadruple here is written out in closed form and is required (by the test
// suite) to coincide with the corresponding composition of product/power/scale:
//
//   general:   sup X over [0,T]   ~  sigma_X(T) * N,  sigma_X(T) = sqrt(D) T^{alpha_inf/2}
//   fBm:       sup B_H over [0,T] =d T^H sup B_H over [0,1]
//   fLm:       Gamma_S^H * N  <=  sup L_H over [0,S]  <=  sup B_H over [0, Gamma_S]

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wsup/errors.hpp"
#include "wsup/tail_class.hpp"

namespace wsup {

/// sigma_X^2(t) = D t^{alpha_inf} + o(t^{alpha_inf - a}) for every a < remainder_exponent.
struct VarianceModel {
  double d;
  double alpha_inf;
  std::function<double(double)> eval;
  double remainder_exponent = std::numeric_limits<double>::infinity();

  static VarianceModel power_law(double d, double alpha_inf) {
    return {d, alpha_inf, [d, alpha_inf](double t) { return d * std::pow(t, alpha_inf); }};
  }

  static VarianceModel fbm(double h) { return power_law(1.0, 2.0 * h); }

  /// Integrated stationary process with covariance R(t) = (1 + t^2)^{-(2 - alpha_inf)/2};
  /// sigma^2(t) = 2 int_0^t (t - v) R(v) dv, evaluated by quadrature.
  static VarianceModel integrated_cauchy(double alpha_inf) {
    const double d = 2.0 / (alpha_inf * (alpha_inf - 1.0));
    auto eval = [alpha_inf](double t) {
      if (t <= 0) return 0.0;
      auto f = [=](double v) { return (t - v) * std::pow(1.0 + v * v, -(2.0 - alpha_inf) / 2.0); };
      using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
      return 2.0 * gk::integrate(f, 0.0, t, 20, 1e-12);
    };
    // The linear correction c t leaves o(t^{alpha_inf - a}) only for a < alpha_inf - 1.
    return {d, alpha_inf, eval, alpha_inf - 1.0};
  }
};

struct VarianceDiagnostics {
  bool zero_at_origin = true;
  bool nondecreasing = true;
  bool convex = true;
  bool below_leading_term = true;  // A3
  double tail_ratio = 0.0;         // eval(t) / (D t^alpha_inf) at the largest grid point
  std::vector<std::string> warnings;
};

/// Spot checks on a log grid t = 10^k, k in [-2, 6].
inline VarianceDiagnostics check_variance_model(const VarianceModel& v) {
  VarianceDiagnostics diag;
  diag.zero_at_origin = std::abs(v.eval(0.0)) <= 1e-12;
  std::vector<double> ts;
  for (double k = -2.0; k <= 6.0 + 1e-9; k += 0.25) ts.push_back(std::pow(10.0, k));
  double prev = v.eval(0.0);
  for (double t : ts) {
    const double s = v.eval(t);
    if (s < prev) diag.nondecreasing = false;
    if (s > v.d * std::pow(t, v.alpha_inf) * (1.0 + 1e-9)) diag.below_leading_term = false;
    // Midpoint convexity on [t/2, 3t/2].
    const double lo = v.eval(0.5 * t), hi = v.eval(1.5 * t);
    if (s > 0.5 * (lo + hi) * (1.0 + 1e-9)) diag.convex = false;
    prev = s;
  }
  diag.tail_ratio = v.eval(ts.back()) / (v.d * std::pow(ts.back(), v.alpha_inf));
  if (!diag.zero_at_origin) diag.warnings.emplace_back("variance: eval(0) != 0");
  if (!diag.nondecreasing) diag.warnings.emplace_back("variance: not nondecreasing on the check grid");
  if (!diag.convex) diag.warnings.emplace_back("variance: convexity (A1) spot check failed");
  if (!diag.below_leading_term) diag.warnings.emplace_back("variance: eval(t) > D t^alpha_inf somewhere (A3)");
  if (std::abs(diag.tail_ratio - 1.0) > 0.05)
    diag.warnings.emplace_back("variance: eval(t) / (D t^alpha_inf) not near 1 at t = 1e6");
  return diag;
}

/// Tail class of sigma_X(T) = sqrt(D) T^{alpha_inf / 2}.
inline WeibullTailClass sigma_tail_class(double d, double alpha_inf, const WeibullTailClass& horizon) {
  const double a = horizon.alpha(), b = horizon.beta(), g = horizon.gamma();
  return {2.0 * a / alpha_inf, b * std::pow(d, -a / alpha_inf), 2.0 * g / alpha_inf,
          horizon.c() * std::pow(d, -g / alpha_inf)};
}

/// sup over [0, T] of a stationary-increment Gaussian process with sigma^2(t) ~ D t^{alpha_inf}.
inline WeibullTailClass sup_tail_general(const VarianceModel& v, const WeibullTailClass& horizon,
                                         std::vector<std::string>* warnings = nullptr) {
  if (!(v.alpha_inf > 1.0 && v.alpha_inf < 2.0))
    throw domain_error("sup_tail_general: alpha_inf must lie in (1, 2)");
  detail::require(v.d > 0, "sup_tail_general: D must be > 0");
  if (warnings) {
    if (v.eval) {
      auto diag = check_variance_model(v);
      warnings->insert(warnings->end(), diag.warnings.begin(), diag.warnings.end());
    }
    if (!(horizon.alpha() < v.remainder_exponent))
      warnings->emplace_back("sup_tail_general: variance remainder is not o(t^{alpha_inf - alpha})");
  }
  const double a = horizon.alpha(), b = horizon.beta(), g = horizon.gamma(), c = horizon.c();
  const double ai = v.alpha_inf, d = v.d, s = a + ai;
  const double alpha = 2.0 * a / s;
  const double beta = std::pow(b, ai / s) * std::pow(2.0 * d, -a / s) *
                      (std::pow(a / ai, ai / s) + std::pow(ai / a, a / s));
  const double gamma = 2.0 * g / s;
  const double cc = c * std::sqrt(ai / (2.0 * s)) * std::pow(ai / (2.0 * a * b), g / s) * std::pow(d, -g / s);
  return {alpha, beta, gamma, cc};
}

/// Effective leading variance coefficient of the integrated process when R(t) ~ d_cov t^{alpha_inf - 2}.
inline double ig_variance_coefficient(double d_cov, double alpha_inf) {
  return 2.0 * d_cov / (alpha_inf * (alpha_inf - 1.0));
}

inline WeibullTailClass sup_tail_ig(double d_cov, double alpha_inf, const WeibullTailClass& horizon) {
  detail::require(d_cov > 0, "sup_tail_ig: covariance coefficient must be > 0");
  if (!(alpha_inf > 1.0 && alpha_inf < 2.0)) throw domain_error("sup_tail_ig: alpha_inf must lie in (1, 2)");
  return sup_tail_general(VarianceModel::power_law(ig_variance_coefficient(d_cov, alpha_inf), alpha_inf), horizon);
}

namespace detail {

inline void require_hurst(double h) {
  if (!(h > 0.0 && h <= 1.0)) throw domain_error("Hurst parameter must lie in (0, 1]");
}

inline void require_pickands(double h, double pickands) {
  if (h < 0.5 && !(std::isfinite(pickands) && pickands > 0))
    throw domain_error("a positive Pickands constant is required for H < 1/2");
}

}  // namespace detail

/// sup of B_H over [0, 1]. For H < 1/2 the prefactor carries the Pickands constant H_H.
inline WeibullTailClass sup_fbm_unit_interval(double h, double pickands = std::numeric_limits<double>::quiet_NaN()) {
  detail::require_hurst(h);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  if (h < 0.5) {
    detail::require_pickands(h, pickands);
    const double c = pickands / (h * std::sqrt(std::numbers::pi)) * std::pow(2.0, -(h + 1.0) / (2.0 * h));
    return {2.0, 0.5, 1.0 / h - 3.0, c};
  }
  if (h == 0.5) return {2.0, 0.5, -1.0, 2.0 * inv_sqrt_2pi};
  return {2.0, 0.5, -1.0, inv_sqrt_2pi};
}

/// sup of B_H over [0, T] for T in the horizon class.
inline WeibullTailClass sup_tail_fbm(double h, const WeibullTailClass& horizon,
                                     double pickands = std::numeric_limits<double>::quiet_NaN()) {
  detail::require_hurst(h);
  const double a = horizon.alpha(), b = horizon.beta(), g = horizon.gamma(), c = horizon.c();
  const double s = a + 2.0 * h;
  const double alpha = 2.0 * a / s;
  const double beta = std::pow(b, 2.0 * h / s) * (0.5 * std::pow(a / h, 2.0 * h / s) + std::pow(a / h, -a / s));
  if (h < 0.5) {
    detail::require_pickands(h, pickands);
    const double gamma = (a / h - 2.0 * a + 2.0 * g) / s;
    const double c1 = pickands * std::pow(0.5, 1.0 / (2.0 * h)) * c / std::sqrt(s) *
                      std::pow(h, (2.0 * h - a + 2.0 * g - 2.0) / (2.0 * a + 4.0 * h)) *
                      std::pow(a * b, (1.0 - 2.0 * h - g) / s);
    return {alpha, beta, gamma, c1};
  }
  const double c2 = c * std::sqrt(h) / std::sqrt(s) * std::pow(h / (a * b), g / s);
  return {alpha, beta, 2.0 * g / s, h == 0.5 ? 2.0 * c2 : c2};
}

/// The constant m_H as displayed alongside the fLm result:
/// (1/2)^{1/(2H+1)} [ (1/(2H))^{2H/(2H+1)} + (1/(2H))^{1/(2H+1)} ].
inline double m_h(double h) {
  detail::require_hurst(h);
  const double e = 2.0 * h + 1.0;
  return std::pow(0.5, 1.0 / e) * (std::pow(1.0 / (2.0 * h), 2.0 * h / e) + std::pow(1.0 / (2.0 * h), 1.0 / e));
}

/// Rate beta of the fLm supremum class, i.e. the beta of Gamma_1^H * N:
/// (1/2)^{1/(2H+1)} [ (1/(2H))^{2H/(2H+1)} + (2H)^{1/(2H+1)} ]. Equals m_h at H = 1/2.
inline double flm_log_rate(double h) {
  detail::require_hurst(h);
  const double e = 2.0 * h + 1.0;
  return std::pow(0.5, 1.0 / e) * (std::pow(1.0 / (2.0 * h), 2.0 * h / e) + std::pow(2.0 * h, 1.0 / e));
}

/// Gamma subordinator at time s: Gamma(s / nu, 1).
inline WeibullTailClass gamma_tail(double s, double nu = 1.0) {
  detail::require(s > 0 && nu > 0, "gamma_tail: s and nu must be > 0");
  const double shape = s / nu;
  return {1.0, 1.0, shape - 1.0, std::exp(-std::lgamma(shape))};
}

enum class FlmRegime { exact, bounds };

struct FlmTailResult {
  FlmRegime regime;
  std::optional<WeibullTailClass> tail;   // regime == exact
  std::optional<WeibullTailClass> lower;  // regime == bounds
  std::optional<WeibullTailClass> upper;  // regime == bounds
  double m_h;                             // log-asymptotic rate
  double log_exponent;                    // 2 / (2H + 1)
  bool extension = false;                 // nu != 1
};

/// sup of a standard fractional Laplace motion over [0, S]. Exact class for H > 1/2,
/// lower/upper classes for H <= 1/2 (the upper one needs H_H when H < 1/2).
inline FlmTailResult flm_sup_tail(double h, double s_horizon, double nu = 1.0,
                                  double pickands = std::numeric_limits<double>::quiet_NaN()) {
  detail::require_hurst(h);
  detail::require(s_horizon > 0 && nu > 0, "flm_sup_tail: S and nu must be > 0");
  const double shape = s_horizon / nu;
  const double e = 1.0 + 2.0 * h;
  const WeibullTailClass endpoint{2.0 / e, flm_log_rate(h), (2.0 * shape - 2.0) / e,
                                  std::pow(h, (2.0 * shape + 2.0 * h - 1.0) / (2.0 + 4.0 * h)) /
                                      (std::exp(std::lgamma(shape)) * std::sqrt(e))};
  FlmTailResult r{};
  r.m_h = flm_log_rate(h);
  r.log_exponent = 2.0 / e;
  r.extension = nu != 1.0;
  if (h > 0.5) {
    r.regime = FlmRegime::exact;
    r.tail = endpoint;
    return r;
  }
  r.regime = FlmRegime::bounds;
  r.lower = endpoint;
  if (h == 0.5) {
    r.upper = WeibullTailClass{2.0 / e, r.m_h, shape - 1.0,
                               std::pow(0.5, (shape - 1.0) / 2.0) / std::exp(std::lgamma(shape))};
  } else {
    detail::require_pickands(h, pickands);
    r.upper = WeibullTailClass{2.0 / e, r.m_h, (2.0 * shape * h - 4.0 * h + 1.0) / (h * e),
                               pickands * std::pow(2.0, -1.0 / (2.0 * h)) *
                                   std::pow(h, (2.0 * h + 2.0 * shape - 5.0) / (4.0 * h + 2.0)) /
                                   (std::exp(std::lgamma(shape)) * std::sqrt(e))};
  }
  return r;
}

/// P(sup of B_{1/2} over [0, T] > u) for T ~ Exp(rate); exact for every u >= 0.
inline double brownian_exp_exact(double a_rate, double u) {
  detail::require(a_rate > 0, "brownian_exp_exact: rate must be > 0");
  detail::require(u >= 0, "brownian_exp_exact: u must be >= 0");
  return std::exp(-std::sqrt(2.0 * a_rate) * u);
}

}  // namespace wsup
