#pragma once

// Exact Gaussian samplers: circulant embedding for stationary sequences and dense
// factorization for arbitrary covariance matrices.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <fftw3.h>

#include "wsup/errors.hpp"
#include "wsup/rng.hpp"

namespace wsup {

/// Negative circulant eigenvalues above this (relative to the largest) reject the embedding.
inline constexpr double kEigenTolerance = 1e-10;

namespace detail {

struct FftwFree {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftBuffer make_fft_buffer(std::size_t n) {
  return FftBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

/// In-place forward plan of length n, created once per length. Planning is not
/// thread-safe in FFTW; execution with fftw_execute_dft on other aligned buffers is.
inline fftw_plan fft_plan(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  auto buf = make_fft_buffer(n);
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf.get(), buf.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  plans.emplace(n, plan);
  return plan;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

/// C-infinity step: 1 for x <= 0, 0 for x >= 1.
inline double smooth_step_down(double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - x)), b = std::exp(-1.0 / x);
  return a / (a + b);
}

}  // namespace detail

/// Stationary Gaussian sequence X_0..X_{n-1} with Cov(X_i, X_j) = autocov(|i - j|).
///
/// Only lags 0..n-1 of the embedded sequence have to match autocov. The plain embedding
/// uses autocov at every lag; the tapered one rolls it off smoothly between lag n-1 and
/// m/2, which removes the wrap-around kink that breaks smooth covariances.
class CirculantSampler {
 public:
  enum class Extension { plain, tapered };

  /// Returns nullopt when no embedding up to 2^max_doublings times the minimal size
  /// is nonnegative definite within kEigenTolerance.
  static std::optional<CirculantSampler> build(std::size_t n, const std::function<double(std::size_t)>& autocov,
                                               int max_doublings = 3, Extension ext = Extension::plain) {
    detail::require(n >= 1, "circulant: n must be >= 1");
    std::size_t m = detail::next_pow2(std::max<std::size_t>(2, 2 * (n - 1)));
    for (int attempt = 0; attempt <= max_doublings; ++attempt, m *= 2) {
      auto buf = detail::make_fft_buffer(m);
      const double span = static_cast<double>(m / 2) - static_cast<double>(n - 1);
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t lag = j <= m / 2 ? j : m - j;
        double w = 1.0;
        if (ext == Extension::tapered && lag > n - 1)
          w = span > 0 ? detail::smooth_step_down(static_cast<double>(lag - (n - 1)) / span) : 0.0;
        buf[j][0] = w == 0.0 ? 0.0 : w * autocov(lag);
        buf[j][1] = 0.0;
      }
      fftw_execute_dft(detail::fft_plan(m), buf.get(), buf.get());
      double max_ev = 0.0, min_ev = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        max_ev = std::max(max_ev, buf[j][0]);
        min_ev = std::min(min_ev, buf[j][0]);
      }
      if (max_ev <= 0.0 || min_ev < -kEigenTolerance * max_ev) continue;
      std::vector<double> scale(m);
      for (std::size_t j = 0; j < m; ++j)
        scale[j] = std::sqrt(std::max(0.0, buf[j][0]) / static_cast<double>(m));
      return CirculantSampler(n, std::move(scale));
    }
    return std::nullopt;
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t embedding_size() const noexcept { return scale_.size(); }

  void sample(Engine& rng, std::span<double> out) const {
    const std::size_t m = scale_.size();
    auto buf = detail::make_fft_buffer(m);
    std::normal_distribution<double> normal;
    for (std::size_t j = 0; j < m; ++j) {
      buf[j][0] = scale_[j] * normal(rng);
      buf[j][1] = scale_[j] * normal(rng);
    }
    fftw_execute_dft(detail::fft_plan(m), buf.get(), buf.get());
    for (std::size_t k = 0; k < n_ && k < out.size(); ++k) out[k] = buf[k][0];
  }

 private:
  CirculantSampler(std::size_t n, std::vector<double> scale) : n_(n), scale_(std::move(scale)) {}

  std::size_t n_;
  std::vector<double> scale_;
};

/// Pivoted Cholesky of a Toeplitz covariance, stopped once every residual variance is
/// below kPivotTolerance * autocov(0). Near-singular (very smooth) covariances get a
/// factor of small rank r, at O(n r^2) cost.
inline constexpr double kPivotTolerance = 1e-12;

class LowRankSampler {
 public:
  /// nullopt when the factor would need more than max_rank columns.
  static std::optional<LowRankSampler> try_build(std::size_t n, const std::function<double(std::size_t)>& autocov,
                                                 std::size_t max_rank) {
    LowRankSampler s(n, autocov, max_rank);
    if (!s.converged_) return std::nullopt;
    return s;
  }

  LowRankSampler(std::size_t n, const std::function<double(std::size_t)>& autocov) : LowRankSampler(n, autocov, n) {}

  std::size_t rank() const noexcept { return static_cast<std::size_t>(factor_.cols()); }

  void sample(Engine& rng, std::span<double> out) const {
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(factor_.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    const Eigen::VectorXd x = factor_ * z;
    for (Eigen::Index i = 0; i < x.size() && static_cast<std::size_t>(i) < out.size(); ++i) out[i] = x[i];
  }

 private:
  LowRankSampler(std::size_t n, const std::function<double(std::size_t)>& autocov, std::size_t max_rank) {
    detail::require(n >= 1, "low-rank sampler: n must be >= 1");
    const double c0 = autocov(0);
    if (!(c0 > 0)) throw simulation_error("low-rank sampler: autocov(0) must be > 0");
    std::vector<double> lags(n);
    for (std::size_t k = 0; k < n; ++k) lags[k] = autocov(k);
    const Eigen::Index nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd resid = Eigen::VectorXd::Constant(nn, c0);
    Eigen::MatrixXd l(nn, std::min<Eigen::Index>(nn, 32));
    Eigen::Index rank = 0;
    for (;;) {
      Eigen::Index piv;
      const double d = resid.maxCoeff(&piv);
      if (d <= kPivotTolerance * c0) {
        converged_ = true;
        break;
      }
      if (rank == nn) {
        converged_ = true;
        break;
      }
      if (static_cast<std::size_t>(rank) >= max_rank) return;
      if (rank == l.cols()) l.conservativeResize(nn, std::min<Eigen::Index>(nn, 2 * l.cols()));
      Eigen::VectorXd col(nn);
      for (Eigen::Index k = 0; k < nn; ++k) col[k] = lags[static_cast<std::size_t>(std::abs(k - piv))];
      if (rank > 0) col.noalias() -= l.leftCols(rank) * l.row(piv).head(rank).transpose();
      col /= std::sqrt(d);
      l.col(rank) = col;
      resid -= col.cwiseAbs2();
      resid[piv] = 0.0;
      ++rank;
    }
    if (resid.minCoeff() < -1e-8 * c0) throw simulation_error("low-rank sampler: covariance is not positive semidefinite");
    factor_ = l.leftCols(rank);
  }

  Eigen::MatrixXd factor_;
  bool converged_ = false;
};

/// Rank below which a near-singular covariance is factored directly instead of embedded.
inline constexpr std::size_t kLowRankFirst = 48;

/// Zero-mean Gaussian vector with a given covariance matrix: Cholesky, falling back to
/// a clipped eigendecomposition for numerically singular PSD matrices.
class DenseSampler {
 public:
  explicit DenseSampler(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw simulation_error("dense sampler: eigendecomposition failed");
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double max_ev = ev.maxCoeff();
    if (!(max_ev >= 0.0) || ev.minCoeff() < -kEigenTolerance * std::max(max_ev, 1e-300))
      throw simulation_error("dense sampler: covariance is not positive semidefinite");
    factor_ = eig.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(factor_.rows()); }

  void sample(Engine& rng, std::span<double> out) const {
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(factor_.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    const Eigen::VectorXd x = factor_ * z;
    for (Eigen::Index i = 0; i < x.size() && static_cast<std::size_t>(i) < out.size(); ++i) out[i] = x[i];
  }

 private:
  Eigen::MatrixXd factor_;
};

/// Embedding growth allowed for the tapered extension before falling back to the
/// low-rank factor; smooth covariances need a long roll-off.
inline constexpr int kMaxEmbeddingDoublings = 6;

/// Stationary sampler: low-rank factor when the covariance is numerically of small rank,
/// otherwise plain circulant embedding, then the tapered one, then full pivoted Cholesky.
class StationarySampler {
 public:
  StationarySampler(std::size_t n, const std::function<double(std::size_t)>& autocov) {
    if (n > 2 * kLowRankFirst) {
      low_rank_ = LowRankSampler::try_build(n, autocov, kLowRankFirst);
      if (low_rank_) return;
    }
    if (auto c = CirculantSampler::build(n, autocov, 1)) {
      circulant_ = std::move(c);
      return;
    }
    if (auto c = CirculantSampler::build(n, autocov, kMaxEmbeddingDoublings, CirculantSampler::Extension::tapered)) {
      circulant_ = std::move(c);
      return;
    }
    low_rank_.emplace(n, autocov);
  }

  bool uses_circulant() const noexcept { return circulant_.has_value(); }
  std::size_t embedding_size() const noexcept { return circulant_ ? circulant_->embedding_size() : 0; }
  std::size_t rank() const noexcept { return low_rank_ ? low_rank_->rank() : 0; }

  void sample(Engine& rng, std::span<double> out) const {
    if (circulant_)
      circulant_->sample(rng, out);
    else
      low_rank_->sample(rng, out);
  }

 private:
  std::optional<CirculantSampler> circulant_;
  std::optional<LowRankSampler> low_rank_;
};

}  // namespace wsup
