#pragma once

// Monte Carlo estimation of P(sup_{[0,T]} X > u) and P(X(T) > u) for a random horizon T.
// Paths are simulated once and summarized (grid sup, coarse-grid sup, endpoint), so a
// whole u-grid is evaluated on one shared path set.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsup/closed_forms.hpp"
#include "wsup/errors.hpp"
#include "wsup/gaussian_sim.hpp"
#include "wsup/rng.hpp"

namespace wsup {

enum class EndpointMode { shared_path, exact };

struct McConfig {
  std::size_t n_paths = 100000;
  std::size_t grid_n = 4096;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  EndpointMode endpoint = EndpointMode::shared_path;
  std::size_t refine_stride = 4;  // coarse sup uses every refine_stride-th grid point
};

struct TailEstimate {
  double u;
  double p_hat;
  double ci_low;
  double ci_high;
  std::size_t n_paths;
  std::size_t grid_n;
  std::uint64_t seed;
  std::size_t hits;
  bool below_resolution;
};

/// Per-path summaries of one simulation run.
struct PathSummaries {
  std::vector<double> sup;         // max over the grid_n-point grid of [0, T]
  std::vector<double> coarse_sup;  // max over the sub-grid with stride refine_stride
  std::vector<double> endpoint;    // X(T), from the path or exact per EndpointMode
  std::vector<double> horizon;     // T
  McConfig config;
};

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ95OneSided = 1.6448536269514722;

/// Wilson score interval; zero hits give the one-sided 95% upper bound.
inline TailEstimate wilson_estimate(double u, std::size_t hits, const McConfig& cfg) {
  const double n = static_cast<double>(cfg.n_paths);
  const double p = static_cast<double>(hits) / n;
  TailEstimate e{u, p, 0.0, 1.0, cfg.n_paths, cfg.grid_n, cfg.seed, hits, hits == 0};
  if (hits == 0) {
    const double z2 = kZ95OneSided * kZ95OneSided;
    e.ci_high = (z2 / n) / (1.0 + z2 / n);
    return e;
  }
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  e.ci_low = std::clamp(center - half, 0.0, p);
  e.ci_high = std::clamp(center + half, p, 1.0);
  return e;
}

namespace detail {

/// Standalone stream for exact endpoint draws, disjoint from the path streams.
inline Engine endpoint_stream(std::uint64_t seed, std::size_t index) {
  return make_stream(stream_seed(seed, 0xe5d0e5d0e5d0ULL), index);
}

inline void validate_config(const McConfig& cfg) {
  require(cfg.n_paths >= 1, "mc: n_paths must be >= 1");
  require(cfg.grid_n >= 2, "mc: grid_n must be >= 2");
  require(cfg.refine_stride >= 1, "mc: refine_stride must be >= 1");
}

/// X on the uniform grid of [0, t]; fBm uses self-similarity from a unit-interval path.
inline void sample_on_horizon(const ProcessKind& kind, std::size_t grid_n, double t, Engine& rng,
                              std::span<double> out) {
  if (const auto* f = std::get_if<Fbm>(&kind)) {
    sample_fbm_values(f->h, grid_n, 1.0, rng, out);
    const double s = std::pow(t, f->h);
    for (double& v : out) v *= s;
    return;
  }
  if (const auto* ig = std::get_if<IntegratedGaussian>(&kind)) {
    const double step = t / static_cast<double>(grid_n - 1);
    StationarySampler z_sampler(grid_n, [a = ig->alpha_inf, step](std::size_t k) {
      return cauchy_covariance(a, step * static_cast<double>(k));
    });
    std::vector<double> z(grid_n);
    z_sampler.sample(rng, z);
    out[0] = 0.0;
    for (std::size_t i = 1; i < grid_n; ++i) out[i] = out[i - 1] + 0.5 * step * (z[i - 1] + z[i]);
    return;
  }
  sample_process_values(kind, grid_n, t, rng, out);
}

}  // namespace detail

/// Simulates cfg.n_paths paths: path i uses stream (seed, i) for its horizon and values.
inline PathSummaries simulate_summaries(const ProcessKind& kind, const HorizonModel& horizon, const McConfig& cfg) {
  detail::validate_kind(kind);
  detail::validate_config(cfg);
  const bool exact_end = cfg.endpoint == EndpointMode::exact;
  if (exact_end && !std::holds_alternative<Fbm>(kind))
    throw domain_error("mc: exact endpoint mode is available for fBm models only");

  PathSummaries s{std::vector<double>(cfg.n_paths), std::vector<double>(cfg.n_paths),
                  std::vector<double>(cfg.n_paths), std::vector<double>(cfg.n_paths), cfg};
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    thread_local std::vector<double> values;
    values.resize(cfg.grid_n);
    Engine rng = make_stream(cfg.seed, i);
    const double t = horizon.draw(rng);
    detail::sample_on_horizon(kind, cfg.grid_n, t, rng, values);
    double fine = values[0], coarse = values[0];
    for (std::size_t k = 1; k < cfg.grid_n; ++k) {
      fine = std::max(fine, values[k]);
      if (k % cfg.refine_stride == 0) coarse = std::max(coarse, values[k]);
    }
    s.sup[i] = fine;
    s.coarse_sup[i] = coarse;
    s.horizon[i] = t;
    if (exact_end) {
      Engine erng = detail::endpoint_stream(cfg.seed, i);
      s.endpoint[i] = std::pow(t, std::get<Fbm>(kind).h) * std::normal_distribution<double>{}(erng);
    } else {
      s.endpoint[i] = values[cfg.grid_n - 1];
    }
  });
  return s;
}

inline std::size_t count_above(std::span<const double> xs, double u) {
  return static_cast<std::size_t>(std::count_if(xs.begin(), xs.end(), [u](double x) { return x > u; }));
}

inline TailEstimate sup_estimate(const PathSummaries& s, double u) {
  return wilson_estimate(u, count_above(s.sup, u), s.config);
}

inline TailEstimate coarse_sup_estimate(const PathSummaries& s, double u) {
  McConfig c = s.config;
  c.grid_n = (c.grid_n - 1) / c.refine_stride + 1;
  return wilson_estimate(u, count_above(s.coarse_sup, u), c);
}

inline TailEstimate endpoint_estimate(const PathSummaries& s, double u) {
  return wilson_estimate(u, count_above(s.endpoint, u), s.config);
}

inline void require_threshold(double u) { detail::require(std::isfinite(u) && u >= 0, "mc: u must be >= 0"); }

inline TailEstimate estimate_sup_tail(const ProcessModel& model, const HorizonModel& horizon, double u,
                                      const McConfig& cfg) {
  require_threshold(u);
  return sup_estimate(simulate_summaries(model.kind, horizon, cfg), u);
}

inline TailEstimate estimate_endpoint_tail(const ProcessModel& model, const HorizonModel& horizon, double u,
                                           const McConfig& cfg) {
  require_threshold(u);
  return endpoint_estimate(simulate_summaries(model.kind, horizon, cfg), u);
}

struct TailCurveRow {
  TailEstimate sup;
  TailEstimate coarse_sup;
  TailEstimate endpoint;
};

/// Sup, refinement and endpoint estimates over a u-grid, all on one shared path set.
inline std::vector<TailCurveRow> estimate_tail_curve(const ProcessKind& kind, const HorizonModel& horizon,
                                                     std::span<const double> u_grid, const McConfig& cfg) {
  for (double u : u_grid) require_threshold(u);
  const auto s = simulate_summaries(kind, horizon, cfg);
  std::vector<TailCurveRow> rows;
  rows.reserve(u_grid.size());
  for (double u : u_grid) rows.push_back({sup_estimate(s, u), coarse_sup_estimate(s, u), endpoint_estimate(s, u)});
  return rows;
}

/// alpha~ of the sup tail class for this model and horizon.
inline double sup_tail_alpha(const ProcessKind& kind, const HorizonModel& horizon) {
  if (const auto* f = std::get_if<Flm>(&kind)) {
    if (!std::holds_alternative<FixedHorizon>(horizon.family()))
      throw domain_error("slope check: fLm requires a fixed horizon");
    return 2.0 / (2.0 * f->h + 1.0);
  }
  const auto t = horizon.tail();
  if (!t) throw domain_error("slope check: horizon has no Weibullian tail class");
  if (const auto* fb = std::get_if<Fbm>(&kind)) return 2.0 * t->alpha() / (2.0 * fb->h + t->alpha());
  const double a_inf = std::get<IntegratedGaussian>(kind).alpha_inf;
  return 2.0 * t->alpha() / (t->alpha() + a_inf);
}

struct SlopeDiagnostic {
  double alpha_tilde;
  double slope;
  double slope_se;
  double ci_low;
  double ci_high;
  double intercept;
  std::size_t points_used;
  std::vector<TailEstimate> estimates;
};

/// Weighted least squares of log p_hat(u) on u^alpha~, weights n p / (1 - p) (inverse
/// delta-method variance of log p_hat). Points with zero hits are skipped.
inline SlopeDiagnostic log_tail_slope_check(const ProcessKind& kind, const HorizonModel& horizon,
                                            std::span<const double> u_grid, const McConfig& cfg,
                                            std::optional<double> alpha_tilde = std::nullopt) {
  detail::require(u_grid.size() >= 2, "slope check: at least 2 u values required");
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    detail::require(u_grid[i] > 0, "slope check: u values must be > 0");
    if (i) detail::require(u_grid[i] > u_grid[i - 1], "slope check: u_grid must be increasing");
  }
  const double a = alpha_tilde ? *alpha_tilde : sup_tail_alpha(kind, horizon);
  const auto s = simulate_summaries(kind, horizon, cfg);

  SlopeDiagnostic d{};
  d.alpha_tilde = a;
  double sw = 0, sx = 0, sy = 0;
  std::vector<double> xs, ys, ws;
  for (double u : u_grid) {
    const auto e = sup_estimate(s, u);
    d.estimates.push_back(e);
    if (e.hits == 0 || e.hits == e.n_paths) continue;
    const double w = static_cast<double>(e.n_paths) * e.p_hat / (1.0 - e.p_hat);
    xs.push_back(std::pow(u, a));
    ys.push_back(std::log(e.p_hat));
    ws.push_back(w);
    sw += w;
    sx += w * xs.back();
    sy += w * ys.back();
  }
  d.points_used = xs.size();
  if (xs.size() < 2) throw insufficient_data_error("slope check: fewer than 2 thresholds with hits");
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += ws[i] * (xs[i] - xbar) * (xs[i] - xbar);
    sxy += ws[i] * (xs[i] - xbar) * (ys[i] - ybar);
  }
  d.slope = sxy / sxx;
  d.intercept = ybar - d.slope * xbar;
  d.slope_se = 1.0 / std::sqrt(sxx);
  d.ci_low = d.slope - kZ95 * d.slope_se;
  d.ci_high = d.slope + kZ95 * d.slope_se;
  return d;
}

// Serialization ---------------------------------------------------------------

template <class BasicJson>
void to_json(BasicJson& j, const TailEstimate& e) {
  j = BasicJson{{"u", e.u},
                     {"p_hat", e.p_hat},
                     {"ci_low", e.ci_low},
                     {"ci_high", e.ci_high},
                     {"n_paths", e.n_paths},
                     {"grid_n", e.grid_n},
                     {"seed", e.seed},
                     {"hits", e.hits},
                     {"below_resolution", e.below_resolution}};
}

inline constexpr const char* kTailEstimateCsvHeader = "u,p_hat,ci_low,ci_high,n_paths,grid_n,seed,hits,below_resolution";

inline void write_csv_row(std::ostream& os, const TailEstimate& e) {
  os.precision(17);
  os << e.u << ',' << e.p_hat << ',' << e.ci_low << ',' << e.ci_high << ',' << e.n_paths << ',' << e.grid_n << ','
     << e.seed << ',' << e.hits << ',' << (e.below_resolution ? "true" : "false") << '\n';
}

template <class BasicJson>
void to_json(BasicJson& j, const SlopeDiagnostic& d) {
  j = BasicJson{{"alpha_tilde", d.alpha_tilde}, {"slope", d.slope},         {"slope_se", d.slope_se},
                     {"ci_low", d.ci_low},           {"ci_high", d.ci_high},     {"intercept", d.intercept},
                     {"points_used", d.points_used}, {"estimates", d.estimates}};
}

}  // namespace wsup
