#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>
#include <json.hpp>

#include "wsup/closed_forms.hpp"
#include "wsup/mc_estimator.hpp"
#include "wsup/pickands.hpp"

using namespace wsup;

namespace {

McConfig small_config(std::size_t n_paths, std::size_t grid_n, std::uint64_t seed = 42) {
  McConfig c;
  c.n_paths = n_paths;
  c.grid_n = grid_n;
  c.seed = seed;
  return c;
}

// P(T^h N > u) for T ~ Exp(rate), by quadrature over T.
double endpoint_oracle(double h, double rate, double u) {
  auto f = [&](double t) { return rate * std::exp(-rate * t) * normal_tail(u * std::pow(t, -h)); };
  using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
  return gk::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-12);
}

}  // namespace

TEST(Wilson, IntervalInvariants) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 1 + rng() % 100000;
    const std::size_t hits = rng() % (n + 1);
    McConfig c;
    c.n_paths = n;
    const auto e = wilson_estimate(1.0, hits, c);
    ASSERT_EQ(e.p_hat, static_cast<double>(hits) / static_cast<double>(n));
    ASSERT_LE(0.0, e.ci_low);
    ASSERT_LE(e.ci_low, e.p_hat);
    ASSERT_LE(e.p_hat, e.ci_high);
    ASSERT_LE(e.ci_high, 1.0);
    ASSERT_EQ(e.below_resolution, hits == 0);
  }
}

TEST(Wilson, ZeroHitsUpperBound) {
  McConfig c;
  c.n_paths = 1000;
  const auto e = wilson_estimate(5.0, 0, c);
  EXPECT_EQ(e.p_hat, 0.0);
  EXPECT_EQ(e.ci_low, 0.0);
  EXPECT_TRUE(e.below_resolution);
  // roughly z^2 / n for the one-sided bound
  EXPECT_NEAR(e.ci_high, 1.6448536269514722 * 1.6448536269514722 / 1000, 1e-4);
}

TEST(Wilson, KnownInterval) {
  McConfig c;
  c.n_paths = 100;
  const auto e = wilson_estimate(1.0, 50, c);
  EXPECT_NEAR(e.ci_low, 0.4038, 1e-4);
  EXPECT_NEAR(e.ci_high, 0.5962, 1e-4);
}

TEST(McEstimator, BrownianExponentialIdentity) {
  const ProcessModel m{Fbm{0.5}, {1024, 1.0}};
  const auto e = estimate_sup_tail(m, HorizonModel(Exponential{0.5}), 1.0, small_config(20000, 1024));
  const double want = brownian_exp_exact(0.5, 1.0);
  EXPECT_LE(e.ci_low - 0.05 * want, want);
  EXPECT_GE(e.ci_high + 0.05 * want, want);
  // grid suprema are biased low
  EXPECT_LT(e.p_hat, want);
}

// For rough paths P(sup > 0) = 1 in the continuum; a grid misses an O(n^{-H}) share of
// paths that dip below zero between nodes, so only the refinement trend is exact.
TEST(McEstimator, ZeroThresholdTendsToOne) {
  for (double h : {0.3, 0.5}) {
    const auto rows =
        estimate_tail_curve(Fbm{h}, HorizonModel(Exponential{1}), std::vector<double>{0.0}, small_config(4000, 4097));
    EXPECT_GE(rows[0].sup.p_hat, rows[0].coarse_sup.p_hat);
    EXPECT_GT(rows[0].sup.p_hat, 0.97) << "h=" << h;
    EXPECT_LT(1 - rows[0].sup.p_hat, 1 - rows[0].coarse_sup.p_hat) << "h=" << h;
  }
  // sup >= X(0) = 0 holds on every path, so the threshold is met with >=
  const auto s = simulate_summaries(IntegratedGaussian{1.5}, HorizonModel(Exponential{1}), small_config(300, 256));
  for (double v : s.sup) EXPECT_GE(v, 0.0);
  EXPECT_THROW(estimate_sup_tail({Fbm{0.5}, {256, 1}}, HorizonModel(Exponential{1}), -1.0, small_config(10, 256)),
               domain_error);
}

TEST(McEstimator, PathwiseDominanceAndMonotoneInU) {
  const McConfig c = small_config(4000, 512, 9);
  for (const ProcessKind k : {ProcessKind{Fbm{0.75}}, ProcessKind{IntegratedGaussian{1.4}}}) {
    const auto s = simulate_summaries(k, HorizonModel(Exponential{1}), c);
    for (std::size_t i = 0; i < c.n_paths; ++i) {
      ASSERT_GE(s.sup[i], s.endpoint[i]);
      ASSERT_GE(s.sup[i], s.coarse_sup[i]);
      ASSERT_GE(s.sup[i], 0.0);
    }
    double prev = 1.0;
    for (double u = 0.0; u < 6.0; u += 0.25) {
      const auto sup = sup_estimate(s, u), end = endpoint_estimate(s, u), coarse = coarse_sup_estimate(s, u);
      ASSERT_GE(sup.hits, end.hits);
      ASSERT_GE(sup.hits, coarse.hits);
      ASSERT_LE(sup.p_hat, prev);
      prev = sup.p_hat;
    }
  }
}

TEST(McEstimator, CoarseColumnReportsItsGrid) {
  const auto rows = estimate_tail_curve(Fbm{0.5}, HorizonModel(Exponential{1}), std::vector<double>{1.0}, small_config(100, 1025));
  EXPECT_EQ(rows[0].coarse_sup.grid_n, 257u);
  EXPECT_EQ(rows[0].sup.grid_n, 1025u);
}

TEST(McEstimator, ExactEndpointMatchesOracle) {
  McConfig c = small_config(40000, 64, 5);
  c.endpoint = EndpointMode::exact;
  const HorizonModel hz(Exponential{1});
  const auto s = simulate_summaries(Fbm{0.75}, hz, c);
  // threshold where the closed-form endpoint class gives 1e-2
  const auto cls = product(power(*hz.tail(), 0.75), normal_tail_class());
  double lo = 0.5, hi = 20;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cls.tail_value(mid) > 1e-2 ? lo : hi) = mid;
  }
  const auto e = endpoint_estimate(s, lo);
  const double exact = endpoint_oracle(0.75, 1.0, lo);
  EXPECT_LE(e.ci_low, exact);
  EXPECT_GE(e.ci_high, exact);
  // the asymptotic class is within a few percent of the exact law here
  EXPECT_NEAR(exact / 1e-2, 1.0, 0.15) << "exact=" << exact;

  const auto half = endpoint_estimate(s, 1e-12);
  EXPECT_LE(half.ci_low, 0.5);
  EXPECT_GE(half.ci_high, 0.5);
}

TEST(McEstimator, ExactEndpointOnlyForFbm) {
  McConfig c = small_config(10, 64);
  c.endpoint = EndpointMode::exact;
  EXPECT_THROW(simulate_summaries(IntegratedGaussian{1.5}, HorizonModel(Exponential{1}), c), domain_error);
  EXPECT_THROW(simulate_summaries(Flm{0.5}, HorizonModel(FixedHorizon{1}), c), domain_error);
}

TEST(McEstimator, ThreadCountDoesNotChangeResults) {
  for (const ProcessKind k : {ProcessKind{Fbm{0.3}}, ProcessKind{IntegratedGaussian{1.5}}, ProcessKind{Flm{0.6}}}) {
    McConfig c = small_config(300, 128, 77);
    const HorizonModel hz = std::holds_alternative<Flm>(k) ? HorizonModel(FixedHorizon{1}) : HorizonModel(GammaLaw{2});
    const auto a = simulate_summaries(k, hz, c);
    c.threads = 8;
    const auto b = simulate_summaries(k, hz, c);
    EXPECT_EQ(a.sup, b.sup);
    EXPECT_EQ(a.endpoint, b.endpoint);
    EXPECT_EQ(a.horizon, b.horizon);
    EXPECT_EQ(a.coarse_sup, b.coarse_sup);
  }
}

TEST(McEstimator, SeedControlsStreams) {
  const auto a = simulate_summaries(Fbm{0.5}, HorizonModel(Exponential{1}), small_config(50, 64, 1));
  const auto b = simulate_summaries(Fbm{0.5}, HorizonModel(Exponential{1}), small_config(50, 64, 1));
  const auto c = simulate_summaries(Fbm{0.5}, HorizonModel(Exponential{1}), small_config(50, 64, 2));
  EXPECT_EQ(a.sup, b.sup);
  EXPECT_NE(a.sup, c.sup);
  // path i does not depend on how many paths are run
  const auto d = simulate_summaries(Fbm{0.5}, HorizonModel(Exponential{1}), small_config(20, 64, 1));
  EXPECT_TRUE(std::equal(d.sup.begin(), d.sup.end(), a.sup.begin()));
}

TEST(McEstimator, HorizonDrawsFollowTheLaw) {
  const auto s = simulate_summaries(Fbm{0.5}, HorizonModel(Exponential{2}), small_config(20000, 8, 3));
  double mean = 0;
  for (double t : s.horizon) mean += t / s.horizon.size();
  EXPECT_NEAR(mean, 0.5, 3 * 0.5 / std::sqrt(20000.0));
}

TEST(SlopeCheck, BrownianExponentialSlope) {
  const std::vector<double> u{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
  const auto d = log_tail_slope_check(Fbm{0.5}, HorizonModel(Exponential{0.5}), u, small_config(20000, 4096, 11));
  EXPECT_DOUBLE_EQ(d.alpha_tilde, 1.0);
  EXPECT_EQ(d.points_used, u.size());
  EXPECT_NEAR(d.slope, -1.0, 0.05) << "slope=" << d.slope << " se=" << d.slope_se;
  EXPECT_LT(d.ci_low, d.slope);
  EXPECT_GT(d.ci_high, d.slope);
}

TEST(SlopeCheck, InsufficientData) {
  const std::vector<double> u{50, 60, 70};
  EXPECT_THROW(log_tail_slope_check(Fbm{0.5}, HorizonModel(Exponential{1}), u, small_config(200, 64)),
               insufficient_data_error);
  const std::vector<double> bad{1, 0.5};
  EXPECT_THROW(log_tail_slope_check(Fbm{0.5}, HorizonModel(Exponential{1}), bad, small_config(200, 64)), domain_error);
}

TEST(SlopeCheck, AlphaTilde) {
  EXPECT_DOUBLE_EQ(sup_tail_alpha(Fbm{0.75}, HorizonModel(Exponential{1})), 0.8);
  EXPECT_DOUBLE_EQ(sup_tail_alpha(Flm{0.5}, HorizonModel(FixedHorizon{1})), 1.0);
  EXPECT_DOUBLE_EQ(sup_tail_alpha(IntegratedGaussian{1.5}, HorizonModel(PureWeibull{2, 1})), 4.0 / 3.5);
  EXPECT_THROW(sup_tail_alpha(Flm{0.5}, HorizonModel(Exponential{1})), domain_error);
  EXPECT_THROW(sup_tail_alpha(Fbm{0.5}, HorizonModel(FixedHorizon{1})), domain_error);
}

TEST(Records, JsonAndCsv) {
  McConfig c;
  c.n_paths = 10;
  const auto e = wilson_estimate(2.0, 3, c);
  nlohmann::json j = e;
  for (const char* k : {"u", "p_hat", "ci_low", "ci_high", "n_paths", "grid_n", "seed", "hits", "below_resolution"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["p_hat"].get<double>(), 0.3);
  std::ostringstream os;
  write_csv_row(os, e);
  const std::string row = os.str(), header = kTailEstimateCsvHeader;
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_EQ(row.back(), '\n');
}

// Pickands constants --------------------------------------------------------

TEST(Pickands, HurstOneIsOneOverSqrtPi) {
  PickandsConfig c;
  c.n_paths = 4000;
  c.grid_n = 4097;
  const auto e = estimate_pickands(1.0, c);
  EXPECT_NEAR(e.estimate, 1 / std::sqrt(std::numbers::pi), 0.1 / std::sqrt(std::numbers::pi));
  EXPECT_FALSE(e.heavy_tail_warning);
  EXPECT_LT(e.ci_low, e.estimate);
  EXPECT_GT(e.ci_high, e.estimate);
  EXPECT_EQ(e.grid_n, 4097u);
}

TEST(Pickands, BrownianIsOne) {
  PickandsConfig c;
  c.n_paths = 4000;
  c.grid_n = 8193;
  const auto e = estimate_pickands(0.5, c);
  EXPECT_NEAR(e.estimate, 1.0, 0.1);
}

// Fixed grid step 0.005, so only the window changes. E exp W(t) = 1 at every t, so the
// mass outside a short window is not negligible: at T = 5 the estimate is still a few
// percent high, from T = 10 on the truncation bias is below the MC noise.
TEST(Pickands, WindowStability) {
  auto at = [](double t) {
    PickandsConfig c;
    c.t_window = t;
    c.n_paths = 2000;
    c.grid_n = static_cast<std::size_t>(400 * t) + 1;
    return estimate_pickands(0.5, c);
  };
  const auto e5 = at(5), e10 = at(10), e20 = at(20), e40 = at(40);
  for (const auto* e : {&e20, &e40}) {
    const double half_a = e->ci_high - e->estimate, half_b = e10.ci_high - e10.estimate;
    EXPECT_LT(std::abs(e->estimate - e10.estimate), half_a + half_b) << "T=" << e->t_window;
  }
  EXPECT_GT(e5.estimate, e20.estimate);
}

// H_1(T) = E exp(max_{[0,T]} sqrt2 t N - t^2) = 1 + T / sqrt(pi), exactly. Per-path values
// grow like exp(sqrt2 T N), so the normal-theory CI only covers well for small T.
TEST(Pickands, WindowMeanHurstOneExact) {
  PickandsConfig c;
  c.method = PickandsMethod::window_mean;
  c.t_window = 1.0;
  c.n_paths = 20000;
  const auto e = estimate_pickands(1.0, c);
  const double want = 1 + 1 / std::sqrt(std::numbers::pi);
  EXPECT_FALSE(e.heavy_tail_warning);
  EXPECT_LE(e.ci_low, want);
  EXPECT_GE(e.ci_high, want);
}

TEST(Pickands, Deterministic) {
  PickandsConfig c;
  c.n_paths = 200;
  c.grid_n = 513;
  const auto a = estimate_pickands(0.3, c);
  c.threads = 8;
  const auto b = estimate_pickands(0.3, c);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.ci_high, b.ci_high);
}

TEST(Pickands, Errors) {
  PickandsConfig c;
  EXPECT_THROW(estimate_pickands(0.0, c), domain_error);
  EXPECT_THROW(estimate_pickands(1.1, c), domain_error);
  c.t_window = 0;
  EXPECT_THROW(estimate_pickands(0.5, c), domain_error);
}

TEST(Pickands, AutoFeedsTheClosedForm) {
  PickandsConfig c;
  c.n_paths = 300;
  c.grid_n = 1025;
  const auto r = sup_fbm_unit_interval_auto(0.25, c);
  ASSERT_TRUE(r.pickands.has_value());
  EXPECT_NEAR(r.tail.c(), r.pickands->estimate / (0.25 * std::sqrt(std::numbers::pi)) * std::pow(2, -2.5), 1e-14);
  EXPECT_FALSE(sup_fbm_unit_interval_auto(0.5, c).pickands.has_value());
  const auto t = sup_tail_fbm_auto(0.25, {1, 1, 0, 1}, c);
  ASSERT_TRUE(t.pickands.has_value());
  EXPECT_EQ(t.pickands->estimate, r.pickands->estimate);
  nlohmann::json j = *t.pickands;
  EXPECT_EQ(j["method"], "sup_integral_ratio");
}
