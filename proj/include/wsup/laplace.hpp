#pragma once

// Laplace-type integral
//
//   I(u) = int_{a(u)}^{A(u)} x^gamma exp(-beta1 u^alpha1 / x^alpha1 - beta2 x^alpha2) dx,
//   a(u) = u^{alpha1 / (2 (alpha1 + alpha2))},  A(u) = u^{2 alpha1 / (alpha1 + alpha2)},
//
// its saddle-point asymptotics C u^delta exp(-beta3 u^alpha3), and an adaptive
// Gauss-Kronrod oracle for the integral itself. The oracle shares no code with
// the closed form beyond the integrand definition.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wsup/errors.hpp"

namespace wsup {

struct LaplaceIntegralParams {
  double alpha1;
  double beta1;
  double alpha2;
  double beta2;
  double gamma;

  void validate() const {
    detail::require(alpha1 > 0 && beta1 > 0 && alpha2 > 0 && beta2 > 0,
                    "laplace: alpha1, beta1, alpha2, beta2 must be > 0");
    detail::require(std::isfinite(gamma), "laplace: gamma must be finite");
  }
};

struct LaplaceAsymptotic {
  double alpha3;
  double beta3;
  double delta;
  double c;

  double log_value(double u) const { return std::log(c) + delta * std::log(u) - beta3 * std::pow(u, alpha3); }
  double value(double u) const { return std::exp(log_value(u)); }
};

inline LaplaceAsymptotic l1fed_closed_form(const LaplaceIntegralParams& p) {
  p.validate();
  const double a1 = p.alpha1, a2 = p.alpha2, s = a1 + a2;
  const double g = p.gamma;
  LaplaceAsymptotic r{};
  r.alpha3 = a1 * a2 / s;
  r.beta3 = std::pow(p.beta1, a2 / s) * std::pow(p.beta2, a1 / s) *
            (std::pow(a1 / a2, a2 / s) + std::pow(a2 / a1, a1 / s));
  r.delta = a1 * (-a2 + 2.0 * g + 2.0) / (2.0 * s);
  r.c = std::exp(0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(s) +
                 (-a2 + 2.0 * g + 2.0) / (2.0 * s) * std::log(a1 * p.beta1) +
                 (-a1 - 2.0 * g - 2.0) / (2.0 * s) * std::log(a2 * p.beta2));
  return r;
}

/// S(x, u) = -beta1 u^alpha1 / x^alpha1 - beta2 x^alpha2.
inline double laplace_exponent(const LaplaceIntegralParams& p, double x, double u) {
  return -p.beta1 * std::pow(u / x, p.alpha1) - p.beta2 * std::pow(x, p.alpha2);
}

/// dS / dx.
inline double laplace_exponent_slope(const LaplaceIntegralParams& p, double x, double u) {
  return p.alpha1 * p.beta1 * std::pow(u, p.alpha1) * std::pow(x, -p.alpha1 - 1.0) -
         p.alpha2 * p.beta2 * std::pow(x, p.alpha2 - 1.0);
}

/// d^2 S / dx^2.
inline double laplace_exponent_curvature(const LaplaceIntegralParams& p, double x, double u) {
  return -p.alpha1 * (p.alpha1 + 1.0) * p.beta1 * std::pow(u, p.alpha1) * std::pow(x, -p.alpha1 - 2.0) -
         p.alpha2 * (p.alpha2 - 1.0) * p.beta2 * std::pow(x, p.alpha2 - 2.0);
}

/// Unique maximizer of S(., u) on (0, inf).
inline double saddle_point(const LaplaceIntegralParams& p, double u) {
  p.validate();
  detail::require(u > 0, "saddle_point: u must be > 0");
  const double s = p.alpha1 + p.alpha2;
  return std::pow(p.alpha1 * p.beta1 / (p.alpha2 * p.beta2), 1.0 / s) * std::pow(u, p.alpha1 / s);
}

struct IntegrationWindow {
  double lower;
  double upper;
};

inline IntegrationWindow integration_window(const LaplaceIntegralParams& p, double u) {
  const double s = p.alpha1 + p.alpha2;
  return {std::pow(u, p.alpha1 / (2.0 * s)), std::pow(u, 2.0 * p.alpha1 / s)};
}

/// Smallest u with a(u) < x0(u) < A(u); the exponents are ordered so this is a power bound.
inline double interior_threshold(const LaplaceIntegralParams& p) {
  const double s = p.alpha1 + p.alpha2;
  const double k = std::pow(p.alpha1 * p.beta1 / (p.alpha2 * p.beta2), 1.0 / s);
  // a(u) < x0(u)  <=>  u^{a1/(2s)} > 1/k ;  x0(u) < A(u)  <=>  u^{a1/s} > k.
  const double lo = k < 1.0 ? std::pow(1.0 / k, 2.0 * s / p.alpha1) : 0.0;
  const double hi = k > 1.0 ? std::pow(k, s / p.alpha1) : 0.0;
  return std::max(lo, hi);
}

struct OracleResult {
  double log_value;       // log of the integral
  double rescaled_value;  // integral of exp(log f(x) - log f(x0))
  double rescaled_error;  // Gauss-Kronrod error estimate on the rescaled integral
};

/// Adaptive quadrature of the integral in log-rescaled form. Throws convergence_error
/// (carrying the best log-value estimate) if rel_tol is not reached.
inline OracleResult l1fed_integral_oracle_log(const LaplaceIntegralParams& p, double u, double rel_tol) {
  p.validate();
  detail::require(u > 0, "oracle: u must be > 0");
  detail::require(rel_tol > 0 && rel_tol <= 1e-3, "oracle: rel_tol must lie in (0, 1e-3]");
  const auto [lower, upper] = integration_window(p, u);
  if (!(lower < upper)) throw domain_error("oracle: empty integration window a(u) >= A(u)");

  const double x0 = std::clamp(saddle_point(p, u), lower, upper);
  const double log_peak = p.gamma * std::log(x0) + laplace_exponent(p, x0, u);
  auto integrand = [&](double x) {
    return std::exp(p.gamma * std::log(x) + laplace_exponent(p, x, u) - log_peak);
  };

  // Breakpoints at geometrically growing multiples of the peak width. When x0 is clamped to
  // an endpoint the integrand decays at the first-order rate instead.
  const double curvature = std::abs(laplace_exponent_curvature(p, x0, u));
  const double slope = std::abs(laplace_exponent_slope(p, x0, u) + p.gamma / x0);
  double width = curvature > 0 ? 1.0 / std::sqrt(curvature) : (upper - lower);
  if (slope > 0) width = std::min(width, 1.0 / slope);
  std::vector<double> cuts{lower, x0, upper};
  for (double k = 1.0; k < 1e6; k *= 3.0) {
    for (double x : {x0 - k * width, x0 + k * width})
      if (x > lower && x < upper) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Global adaptive bisection: always split the segment with the largest error estimate.
  using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  struct Segment {
    double a, b, value, err;
    bool operator<(const Segment& o) const { return err < o.err; }
  };
  auto rule = [&](double a, double b) {
    double err = 0.0;
    const double v = gk::integrate(integrand, a, b, 0, 0.0, &err);
    return Segment{a, b, v, err};
  };
  std::priority_queue<Segment> queue;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) queue.push(rule(cuts[i], cuts[i + 1]));
  constexpr std::size_t kMaxSegments = 4000;
  auto sums = [&] {
    total = 0.0;
    total_err = 0.0;
    auto copy = queue;
    while (!copy.empty()) {
      total += copy.top().value;
      total_err += copy.top().err;
      copy.pop();
    }
  };
  sums();
  while (total_err > rel_tol * total && queue.size() < kMaxSegments) {
    const Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = rule(worst.a, mid), right = rule(mid, worst.b);
    queue.push(left);
    queue.push(right);
    total += left.value + right.value - worst.value;
    total_err += left.err + right.err - worst.err;
  }
  sums();
  if (!(total > 0) || !std::isfinite(total))
    throw convergence_error("oracle: non-positive or non-finite quadrature result", std::log(std::max(total, 0.0)) + log_peak,
                            total_err);
  if (total_err > rel_tol * total)
    throw convergence_error("oracle: relative tolerance not reached", std::log(total) + log_peak, total_err / total);
  return {std::log(total) + log_peak, total, total_err};
}

inline double l1fed_integral_oracle(const LaplaceIntegralParams& p, double u, double rel_tol) {
  return std::exp(l1fed_integral_oracle_log(p, u, rel_tol).log_value);
}

/// oracle / closed form, computed in log space.
inline double l1fed_ratio(const LaplaceIntegralParams& p, double u, double rel_tol = 1e-8) {
  return std::exp(l1fed_integral_oracle_log(p, u, rel_tol).log_value - l1fed_closed_form(p).log_value(u));
}

/// u at which beta3 u^alpha3 equals the given exponent.
inline double u_for_exponent(const LaplaceIntegralParams& p, double exponent) {
  const auto cf = l1fed_closed_form(p);
  return std::pow(exponent / cf.beta3, 1.0 / cf.alpha3);
}

}  // namespace wsup
