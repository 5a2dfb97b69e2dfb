#pragma once

// Exact-in-law path simulation on uniform grids: fBm, integrated stationary Gaussian,
// Gamma subordinator and fractional Laplace motion, plus exactly samplable horizons.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <tuple>
#include <variant>
#include <vector>

#include <boost/math/distributions/gamma.hpp>

#include "wsup/closed_forms.hpp"
#include "wsup/covariance_sampler.hpp"
#include "wsup/errors.hpp"
#include "wsup/rng.hpp"
#include "wsup/tail_class.hpp"

namespace wsup {

struct Fbm {
  double h;
};

/// X(t) = int_0^t Z(s) ds with Cov(Z(s), Z(s+t)) = (1 + t^2)^{-(2 - alpha_inf)/2}.
struct IntegratedGaussian {
  double alpha_inf;
};

/// L_H(s) = B_H(Gamma_s), Gamma_{s+r} - Gamma_s ~ Gamma(r / nu, 1).
struct Flm {
  double h;
  double nu = 1.0;
};

using ProcessKind = std::variant<Fbm, IntegratedGaussian, Flm>;

struct Grid {
  std::size_t n_steps;  // number of grid points, including t = 0
  double t_max;
};

struct ProcessModel {
  ProcessKind kind;
  Grid grid;
};

struct Path {
  std::vector<double> times;
  std::vector<double> values;
  ProcessModel model;
};

inline std::vector<double> uniform_grid(std::size_t n, double t_max) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
  return t;
}

inline void write_csv(const Path& path, std::ostream& os) {
  os << "t,value\n";
  os.precision(17);
  for (std::size_t i = 0; i < path.times.size(); ++i) os << path.times[i] << ',' << path.values[i] << '\n';
}

/// Cauchy-class stationary covariance used for the integrated process.
inline double cauchy_covariance(double alpha_inf, double t) {
  return std::pow(1.0 + t * t, -(2.0 - alpha_inf) / 2.0);
}

/// Autocovariance of unit-step fractional Gaussian noise.
inline double fgn_autocov(double h, std::size_t k) {
  const double kk = static_cast<double>(k);
  return 0.5 * (std::pow(kk + 1.0, 2.0 * h) - 2.0 * std::pow(kk, 2.0 * h) + std::pow(std::abs(kk - 1.0), 2.0 * h));
}

namespace detail {

inline void validate_kind(const ProcessKind& kind) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Fbm>) {
          require_hurst(k.h);
        } else if constexpr (std::is_same_v<K, IntegratedGaussian>) {
          if (!(k.alpha_inf > 1.0 && k.alpha_inf < 2.0))
            throw domain_error("integrated Gaussian: alpha_inf must lie in (1, 2)");
        } else {
          require_hurst(k.h);
          require(k.nu > 0, "fLm: nu must be > 0");
        }
      },
      kind);
}

inline void validate_grid(std::size_t n, double t_max) {
  require(n >= 2, "grid: at least 2 points required");
  require(std::isfinite(t_max) && t_max > 0, "grid: t_max must be > 0");
}

/// Shared fGn samplers keyed by (H, length).
inline std::shared_ptr<const StationarySampler> fgn_sampler(double h, std::size_t n) {
  static std::mutex mutex;
  static std::map<std::pair<double, std::size_t>, std::shared_ptr<const StationarySampler>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{h, n}];
  if (!slot) slot = std::make_shared<const StationarySampler>(n, [h](std::size_t k) { return fgn_autocov(h, k); });
  return slot;
}

inline std::shared_ptr<const StationarySampler> cauchy_sampler(double alpha_inf, std::size_t n, double step) {
  static std::mutex mutex;
  static std::map<std::tuple<double, std::size_t, double>, std::shared_ptr<const StationarySampler>> cache;
  auto make = [&] {
    return std::make_shared<const StationarySampler>(
        n, [=](std::size_t k) { return cauchy_covariance(alpha_inf, step * static_cast<double>(k)); });
  };
  std::lock_guard lock(mutex);
  if (cache.size() > 32) cache.clear();
  auto& slot = cache[{alpha_inf, n, step}];
  if (!slot) slot = make();
  return slot;
}

}  // namespace detail

/// B_H on the uniform n-point grid of [0, t_max]; out[0] = 0.
inline void sample_fbm_values(double h, std::size_t n, double t_max, Engine& rng, std::span<double> out) {
  const double step = t_max / static_cast<double>(n - 1);
  std::normal_distribution<double> normal;
  out[0] = 0.0;
  if (h == 1.0) {
    const double z = normal(rng);
    for (std::size_t i = 1; i < n; ++i) out[i] = z * step * static_cast<double>(i);
    return;
  }
  if (h == 0.5) {
    const double sd = std::sqrt(step);
    for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + sd * normal(rng);
    return;
  }
  const auto sampler = detail::fgn_sampler(h, n - 1);
  sampler->sample(rng, out.subspan(1, n - 1));
  const double sd = std::pow(step, h);
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    acc += sd * out[i];
    out[i] = acc;
  }
}

/// B_H at increasing, strictly positive, distinct times (exact joint law).
inline void sample_fbm_at(double h, std::span<const double> times, Engine& rng, std::span<double> out) {
  const std::size_t m = times.size();
  if (m == 0) return;
  std::normal_distribution<double> normal;
  if (h == 1.0) {
    const double z = normal(rng);
    for (std::size_t i = 0; i < m; ++i) out[i] = z * times[i];
    return;
  }
  if (h == 0.5) {
    double prev_t = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      acc += std::sqrt(times[i] - prev_t) * normal(rng);
      prev_t = times[i];
      out[i] = acc;
    }
    return;
  }
  // Increment covariance is better conditioned than the level covariance for clustered times.
  auto pw = [h](double x) { return std::pow(std::abs(x), 2.0 * h); };
  Eigen::MatrixXd cov(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const double ti = times[i], ti0 = i ? times[i - 1] : 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      const double tj = times[j], tj0 = j ? times[j - 1] : 0.0;
      const double v = 0.5 * (pw(ti - tj0) + pw(ti0 - tj) - pw(ti - tj) - pw(ti0 - tj0));
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  DenseSampler sampler(cov);
  sampler.sample(rng, out.first(m));
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    acc += out[i];
    out[i] = acc;
  }
}

/// Stationary Z on the uniform n-point grid of [0, t_max].
inline void sample_cauchy_stationary(double alpha_inf, std::size_t n, double t_max, Engine& rng,
                                     std::span<double> out) {
  const double step = t_max / static_cast<double>(n - 1);
  detail::cauchy_sampler(alpha_inf, n, step)->sample(rng, out);
}

/// X = cumulative trapezoidal integral of Z.
inline void sample_integrated_gaussian_values(double alpha_inf, std::size_t n, double t_max, Engine& rng,
                                              std::span<double> out) {
  std::vector<double> z(n);
  sample_cauchy_stationary(alpha_inf, n, t_max, rng, z);
  const double step = t_max / static_cast<double>(n - 1);
  out[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * step * (z[i - 1] + z[i]);
}

/// Gamma subordinator on the uniform n-point grid of [0, s_max].
inline void sample_gamma_values(double s_max, double nu, std::size_t n, Engine& rng, std::span<double> out) {
  const double shape = s_max / static_cast<double>(n - 1) / nu;
  std::gamma_distribution<double> gamma(shape, 1.0);
  out[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + gamma(rng);
}

/// fLm on the uniform grid; returns the subordinator values through `clock` when non-empty.
inline void sample_flm_values(double h, double nu, std::size_t n, double s_max, Engine& rng, std::span<double> out,
                              std::span<double> clock = {}) {
  std::vector<double> gamma_path(n);
  sample_gamma_values(s_max, nu, n, rng, gamma_path);
  if (!clock.empty()) std::copy(gamma_path.begin(), gamma_path.end(), clock.begin());

  // Distinct positive clock times; clustered times are merged and share a value.
  std::vector<double> distinct;
  std::vector<std::size_t> slot(n, 0);
  distinct.reserve(n);
  for (std::size_t i = 1; i < n; ++i) {
    const double t = gamma_path[i];
    if (!(t > 1e-300)) {
      slot[i] = 0;
      continue;
    }
    if (distinct.empty() || t > distinct.back() * (1.0 + 1e-12)) distinct.push_back(t);
    slot[i] = distinct.size();
  }
  std::vector<double> values(distinct.size());
  sample_fbm_at(h, distinct, rng, values);
  out[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) out[i] = slot[i] ? values[slot[i] - 1] : 0.0;
}

/// Values of the model on the uniform grid_n-point grid of [0, t_max].
inline void sample_process_values(const ProcessKind& kind, std::size_t grid_n, double t_max, Engine& rng,
                                  std::span<double> out) {
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Fbm>)
          sample_fbm_values(k.h, grid_n, t_max, rng, out);
        else if constexpr (std::is_same_v<K, IntegratedGaussian>)
          sample_integrated_gaussian_values(k.alpha_inf, grid_n, t_max, rng, out);
        else
          sample_flm_values(k.h, k.nu, grid_n, t_max, rng, out);
      },
      kind);
}

inline Path simulate(const ProcessModel& model, std::uint64_t seed) {
  detail::validate_kind(model.kind);
  detail::validate_grid(model.grid.n_steps, model.grid.t_max);
  Path p{uniform_grid(model.grid.n_steps, model.grid.t_max), std::vector<double>(model.grid.n_steps), model};
  Engine rng = make_stream(seed, 0);
  sample_process_values(model.kind, model.grid.n_steps, model.grid.t_max, rng, p.values);
  return p;
}

inline Path simulate_fbm(double h, std::size_t n, double t_max, std::uint64_t seed) {
  return simulate(ProcessModel{Fbm{h}, {n, t_max}}, seed);
}

inline Path simulate_integrated_gaussian(double alpha_inf, std::size_t n, double t_max, std::uint64_t seed) {
  return simulate(ProcessModel{IntegratedGaussian{alpha_inf}, {n, t_max}}, seed);
}

inline Path simulate_flm(double h, double nu, double s_max, std::size_t n, std::uint64_t seed) {
  return simulate(ProcessModel{Flm{h, nu}, {n, s_max}}, seed);
}

inline Path sample_gamma_path(double s_max, double nu, std::size_t n, std::uint64_t seed) {
  detail::require(nu > 0, "gamma path: nu must be > 0");
  detail::validate_grid(n, s_max);
  Path p{uniform_grid(n, s_max), std::vector<double>(n), ProcessModel{Flm{0.5, nu}, {n, s_max}}};
  Engine rng = make_stream(seed, 0);
  sample_gamma_values(s_max, nu, n, rng, p.values);
  return p;
}

// Horizons ------------------------------------------------------------------

/// P(T > t) = exp(-beta t^alpha).
struct PureWeibull {
  double alpha;
  double beta;
};

struct Exponential {
  double rate;
};

struct GammaLaw {
  double shape;
  double scale = 1.0;
};

/// Deterministic horizon (sup over a fixed interval); has no tail class.
struct FixedHorizon {
  double t;
};

class HorizonModel {
 public:
  using Family = std::variant<PureWeibull, Exponential, GammaLaw, FixedHorizon>;

  HorizonModel(Family family) : family_(family) {  // NOLINT(google-explicit-constructor)
    std::visit(
        [](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, PureWeibull>)
            detail::require(f.alpha > 0 && f.beta > 0, "weibull horizon: alpha, beta must be > 0");
          else if constexpr (std::is_same_v<F, Exponential>)
            detail::require(f.rate > 0, "exponential horizon: rate must be > 0");
          else if constexpr (std::is_same_v<F, GammaLaw>)
            detail::require(f.shape > 0 && f.scale > 0, "gamma horizon: shape, scale must be > 0");
          else
            detail::require(f.t > 0, "fixed horizon: t must be > 0");
        },
        family_);
  }

  const Family& family() const noexcept { return family_; }

  std::optional<WeibullTailClass> tail() const {
    return std::visit(
        [](const auto& f) -> std::optional<WeibullTailClass> {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, PureWeibull>)
            return WeibullTailClass{f.alpha, f.beta, 0.0, 1.0};
          else if constexpr (std::is_same_v<F, Exponential>)
            return WeibullTailClass{1.0, f.rate, 0.0, 1.0};
          else if constexpr (std::is_same_v<F, GammaLaw>)
            return scale(gamma_tail(f.shape), f.scale);
          else
            return std::nullopt;
        },
        family_);
  }

  /// Draws above the upper 1e-8 quantile are rejected and redrawn.
  double truncation() const {
    static constexpr double kTailMass = 1e-8;
    return std::visit(
        [](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, PureWeibull>)
            return std::pow(-std::log(kTailMass) / f.beta, 1.0 / f.alpha);
          else if constexpr (std::is_same_v<F, Exponential>)
            return -std::log(kTailMass) / f.rate;
          else if constexpr (std::is_same_v<F, GammaLaw>)
            return boost::math::quantile(
                boost::math::complement(boost::math::gamma_distribution<double>(f.shape, f.scale), kTailMass));
          else
            return f.t;
        },
        family_);
  }

  double draw(Engine& rng) const {
    const double cap = truncation();
    for (;;) {
      const double t = draw_untruncated(rng);
      if (t > 0 && t <= cap) return t;
    }
  }

 private:
  double draw_untruncated(Engine& rng) const {
    return std::visit(
        [&rng](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, PureWeibull>)
            return std::pow(-std::log(open_uniform(rng)) / f.beta, 1.0 / f.alpha);
          else if constexpr (std::is_same_v<F, Exponential>)
            return -std::log(open_uniform(rng)) / f.rate;
          else if constexpr (std::is_same_v<F, GammaLaw>)
            return std::gamma_distribution<double>(f.shape, f.scale)(rng);
          else
            return f.t;
        },
        family_);
  }

  Family family_;
};

inline double sample_horizon(const HorizonModel& hm, std::uint64_t seed) {
  Engine rng = make_stream(seed, 0);
  return hm.draw(rng);
}

}  // namespace wsup
