#pragma once

// Monte Carlo estimation of the Pickands constant H_H, and closed forms that consume it.
//
// sup_integral_ratio (default): W(t) = sqrt(2) B(t) - |t|^{2H} for a two-sided fBm on [-T, T];
//   H_H = E[ max_t e^{W(t)} / int e^{W(t)} dt ].  Per-path values are bounded, so the
//   estimator has finite variance for every T.
// window_mean: E exp(max_{[0,T]} sqrt(2) B_H(t) - t^{2H}) / T, i.e. H_H(T)/T. Its bias is
//   O(1/T) and its variance grows exponentially in T; kept for comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsup/closed_forms.hpp"
#include "wsup/gaussian_sim.hpp"
#include "wsup/mc_estimator.hpp"
#include "wsup/rng.hpp"

namespace wsup {

enum class PickandsMethod { sup_integral_ratio, window_mean };

inline std::string to_string(PickandsMethod m) {
  return m == PickandsMethod::sup_integral_ratio ? "sup_integral_ratio" : "window_mean";
}

struct PickandsConfig {
  double t_window = 10.0;
  std::size_t grid_n = 4096;
  std::size_t n_paths = 20000;
  std::uint64_t seed = 7;
  unsigned threads = 1;
  PickandsMethod method = PickandsMethod::sup_integral_ratio;
};

struct PickandsEstimate {
  double h;
  double t_window;
  double estimate;
  double ci_low;
  double ci_high;
  std::size_t grid_n;
  std::size_t n_paths;
  std::uint64_t seed;
  PickandsMethod method;
  bool heavy_tail_warning;
};

namespace detail {

inline double ratio_sample(double h, double t_window, std::size_t grid_n, Engine& rng, std::vector<double>& b) {
  // Odd number of points so that t = 0 is a node: index mid <-> t = 0.
  const std::size_t n = grid_n | 1u;
  const std::size_t mid = n / 2;
  const double step = 2.0 * t_window / static_cast<double>(n - 1);
  b.resize(n);
  if (h == 1.0) {
    const double z = std::normal_distribution<double>{}(rng);
    for (std::size_t i = 0; i < n; ++i) b[i] = z * step * static_cast<double>(i);
  } else {
    sample_fbm_values(h, n, 2.0 * t_window, rng, b);
  }
  const double b_mid = b[mid];
  double w_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::abs(static_cast<double>(i) - static_cast<double>(mid)) * step;
    b[i] = std::numbers::sqrt2 * (b[i] - b_mid) - std::pow(t, 2.0 * h);
    w_max = std::max(w_max, b[i]);
  }
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    integral += 0.5 * step * (std::exp(b[i] - w_max) + std::exp(b[i + 1] - w_max));
  return 1.0 / integral;
}

inline double window_sample(double h, double t_window, std::size_t grid_n, Engine& rng, std::vector<double>& b) {
  if (h == 1.0) {
    // max over [0, T] of sqrt(2) t N - t^2, attained at t* = clamp(N / sqrt(2), 0, T).
    const double z = std::normal_distribution<double>{}(rng);
    const double t = std::clamp(z / std::numbers::sqrt2, 0.0, t_window);
    return std::exp(std::numbers::sqrt2 * t * z - t * t);
  }
  b.resize(grid_n);
  sample_fbm_values(h, grid_n, t_window, rng, b);
  const double step = t_window / static_cast<double>(grid_n - 1);
  double w_max = 0.0;
  for (std::size_t i = 1; i < grid_n; ++i)
    w_max = std::max(w_max, std::numbers::sqrt2 * b[i] - std::pow(step * static_cast<double>(i), 2.0 * h));
  return std::exp(w_max);
}

}  // namespace detail

inline PickandsEstimate estimate_pickands(double h, const PickandsConfig& cfg) {
  detail::require_hurst(h);
  detail::require(std::isfinite(cfg.t_window) && cfg.t_window > 0, "pickands: t_window must be > 0");
  detail::require(cfg.grid_n >= 3, "pickands: grid_n must be >= 3");
  detail::require(cfg.n_paths >= 2, "pickands: n_paths must be >= 2");

  std::vector<double> values(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    thread_local std::vector<double> buffer;
    Engine rng = make_stream(cfg.seed, i);
    values[i] = cfg.method == PickandsMethod::sup_integral_ratio
                    ? detail::ratio_sample(h, cfg.t_window, cfg.grid_n, rng, buffer)
                    : detail::window_sample(h, cfg.t_window, cfg.grid_n, rng, buffer);
  });

  const double n = static_cast<double>(cfg.n_paths);
  double sum = 0.0, largest = 0.0;
  for (double v : values) {
    sum += v;
    largest = std::max(largest, v);
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);

  const double norm = cfg.method == PickandsMethod::window_mean ? cfg.t_window : 1.0;
  const double est = mean / norm;
  const double half = kZ95 * se / norm;
  const std::size_t grid_used = cfg.method == PickandsMethod::sup_integral_ratio ? (cfg.grid_n | 1u) : cfg.grid_n;
  return PickandsEstimate{h,
                          cfg.t_window,
                          est,
                          std::max(est - half, est * 1e-6),
                          est + half,
                          grid_used,
                          cfg.n_paths,
                          cfg.seed,
                          cfg.method,
                          largest > 0.1 * sum};
}

template <class BasicJson>
void to_json(BasicJson& j, const PickandsEstimate& e) {
  j = BasicJson{{"h", e.h},
                     {"t_window", e.t_window},
                     {"estimate", e.estimate},
                     {"ci_low", e.ci_low},
                     {"ci_high", e.ci_high},
                     {"grid_n", e.grid_n},
                     {"n_paths", e.n_paths},
                     {"seed", e.seed},
                     {"method", to_string(e.method)},
                     {"heavy_tail_warning", e.heavy_tail_warning}};
}

// Closed forms with the Pickands constant estimated on demand ------------------

/// A tail class together with the Pickands estimate it was built from (absent when unused).
struct PickandsBackedTail {
  WeibullTailClass tail;
  std::optional<PickandsEstimate> pickands;
};

inline PickandsBackedTail sup_fbm_unit_interval_auto(double h, const PickandsConfig& cfg) {
  detail::require_hurst(h);
  if (h >= 0.5) return {sup_fbm_unit_interval(h), std::nullopt};
  const auto est = estimate_pickands(h, cfg);
  return {sup_fbm_unit_interval(h, est.estimate), est};
}

inline PickandsBackedTail sup_tail_fbm_auto(double h, const WeibullTailClass& horizon, const PickandsConfig& cfg) {
  detail::require_hurst(h);
  if (h >= 0.5) return {sup_tail_fbm(h, horizon), std::nullopt};
  const auto est = estimate_pickands(h, cfg);
  return {sup_tail_fbm(h, horizon, est.estimate), est};
}

}  // namespace wsup
