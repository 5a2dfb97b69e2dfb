#pragma once

// Asymptotically Weibullian tails: P(V > u) = C u^gamma exp(-beta u^alpha) (1 + o(1)).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "wsup/errors.hpp"

namespace wsup {

class WeibullTailClass {
 public:
  WeibullTailClass(double alpha, double beta, double gamma, double c)
      : alpha_(alpha), beta_(beta), gamma_(gamma), c_(c) {
    detail::require(std::isfinite(alpha) && alpha > 0, "tail class: alpha must be > 0");
    detail::require(std::isfinite(beta) && beta > 0, "tail class: beta must be > 0");
    detail::require(std::isfinite(gamma), "tail class: gamma must be finite");
    detail::require(std::isfinite(c) && c > 0, "tail class: C must be > 0");
  }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  double c() const noexcept { return c_; }

  /// log C + gamma log u - beta u^alpha; finite where tail_value underflows.
  double log_tail_value(double u) const {
    detail::require(u > 0, "tail_value: u must be > 0");
    return std::log(c_) + gamma_ * std::log(u) - beta_ * std::pow(u, alpha_);
  }

  /// Asymptotic surrogate, not clamped to [0, 1].
  double tail_value(double u) const { return std::exp(log_tail_value(u)); }

  /// Threshold beyond which tail_value is strictly decreasing.
  double monotone_from() const {
    return std::pow(std::max(0.0, gamma_) / (alpha_ * beta_), 1.0 / alpha_) + 1.0;
  }

  friend bool operator==(const WeibullTailClass&, const WeibullTailClass&) = default;

 private:
  double alpha_;
  double beta_;
  double gamma_;
  double c_;
};

inline std::ostream& operator<<(std::ostream& os, const WeibullTailClass& w) {
  return os << "W(" << w.alpha() << ", " << w.beta() << ", " << w.gamma() << ", " << w.c() << ")";
}

inline double tail_value(const WeibullTailClass& w, double u) { return w.tail_value(u); }

/// Tail class of X*Y for independent nonnegative X in w1, Y in w2.
inline WeibullTailClass product(const WeibullTailClass& w1, const WeibullTailClass& w2) {
  const double a1 = w1.alpha(), a2 = w2.alpha();
  const double b1 = w1.beta(), b2 = w2.beta();
  const double g1 = w1.gamma(), g2 = w2.gamma();
  const double s = a1 + a2;

  const double alpha = a1 * a2 / s;
  const double beta = std::exp((a2 / s) * std::log(b1) + (a1 / s) * std::log(b2)) *
                      (std::pow(a1 / a2, a2 / s) + std::pow(a2 / a1, a1 / s));
  const double gamma = (a1 * a2 + 2.0 * a1 * g2 + 2.0 * a2 * g1) / (2.0 * s);
  // (a1 b1)^e1 (a2 b2)^e2 can overflow for extreme rates; assemble in log space.
  const double log_c = 0.5 * std::log(2.0 * std::numbers::pi) + std::log(w1.c()) + std::log(w2.c()) -
                       0.5 * std::log(s) +
                       (a2 - 2.0 * g1 + 2.0 * g2) / (2.0 * s) * std::log(a1 * b1) +
                       (a1 - 2.0 * g2 + 2.0 * g1) / (2.0 * s) * std::log(a2 * b2);
  return {alpha, beta, gamma, std::exp(log_c)};
}

/// Tail class of T^h.
inline WeibullTailClass power(const WeibullTailClass& w, double h) {
  detail::require(std::isfinite(h) && h > 0, "power: exponent must be > 0");
  return {w.alpha() / h, w.beta(), w.gamma() / h, w.c()};
}

/// Tail class of k*T.
inline WeibullTailClass scale(const WeibullTailClass& w, double k) {
  detail::require(std::isfinite(k) && k > 0, "scale: factor must be > 0");
  return {w.alpha(), w.beta() / std::pow(k, w.alpha()), w.gamma(), w.c() / std::pow(k, w.gamma())};
}

/// Standard normal: Psi(u) ~ (2 pi)^{-1/2} u^{-1} exp(-u^2 / 2).
inline WeibullTailClass normal_tail_class() {
  return {2.0, 0.5, -1.0, 1.0 / std::sqrt(2.0 * std::numbers::pi)};
}

/// Psi(u) = P(N > u).
inline double normal_tail(double u) { return 0.5 * std::erfc(u / std::numbers::sqrt2); }

}  // namespace wsup
