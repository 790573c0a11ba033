#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "lobimpact/estimation.hpp"
#include "lobimpact/kernels.hpp"
#include "lobimpact/stats.hpp"

using namespace lobimpact;

namespace {

SimplifiedPriceModel constant_model(double kappa, double horizon) {
  SimplifiedPriceModel m;
  m.queues = QueueModel(AffineDifferenceRates{-1.0, 3.0, 0.5});
  m.kappa = Kappa(ConstantKappa{kappa});
  m.market = HawkesParams{Baseline::constant(1.0), Kernel(ExponentialKernel{0.5, 1.0})};
  m.horizon = horizon;
  return m;
}

// Slow propagator and a trade rate of 0.4 keep the finite-delta bias of the
// regression small next to sigma^2 = 0.09.
SimplifiedPriceModel noise_model(double sigma) {
  SimplifiedPriceModel m;
  m.queues = QueueModel(AffineDifferenceRates{-1.0, 1.0, 0.5});
  m.kappa = Kappa(ConstantKappa{0.5});
  m.market = HawkesParams{Baseline::constant(0.1), Kernel(ExponentialKernel{0.05, 0.1})};
  m.horizon = 1e5;
  m.delta = 0.05;
  m.noise_sigma = sigma;
  return m;
}

// kappa^2(q) = a + b q on the queue range; the queue mean sits near -7 and q stays below 5.
Kappa affine_square_kappa(double a, double b) {
  TabulatedKappa t;
  t.q_min = -400;
  for (long q = t.q_min; q <= 5; ++q) t.values.push_back(std::sqrt(std::max(a + b * static_cast<double>(q), 0.0)));
  return Kappa(t);
}

SimplifiedPriceModel affine_model(Kappa kappa, double horizon) {
  SimplifiedPriceModel m;
  m.queues = QueueModel(AffineDifferenceRates{-0.3, -0.1, 0.5});
  m.kappa = std::move(kappa);
  m.market = HawkesParams{Baseline::constant(1.0), Kernel(ExponentialKernel{0.05, 0.1})};
  m.horizon = horizon;
  m.delta = 0.02;
  return m;
}

SampledPrice from_prices(std::vector<double> prices, std::size_t trades = 1) {
  SampledPrice sp;
  sp.delta = 1.0;
  sp.horizon = static_cast<double>(prices.size() - 1);
  sp.prices = std::move(prices);
  for (std::size_t i = 0; i < trades; ++i) sp.trades.push_back(Trade{0.5 + static_cast<double>(i), Side::ask, 0, 1.0});
  return sp;
}

}  // namespace

TEST(SimplifiedPrice, ConstantKappaFactorsOut) {
  const auto one = simulate_simplified_price(constant_model(1.0, 200.0), 3);
  const auto half = simulate_simplified_price(constant_model(0.5, 200.0), 3);
  ASSERT_EQ(one.prices.size(), half.prices.size());
  ASSERT_GT(one.trades.size(), 100u);
  const Kernel kernel(ExponentialKernel{0.5, 1.0});
  for (std::size_t k = 0; k < one.prices.size(); ++k) {
    EXPECT_NEAR(half.prices[k], 0.5 * one.prices[k], 1e-12 * (1.0 + std::abs(one.prices[k])));
    if (k % 7 == 0) {
      const double direct = simplified_price_at(kernel, one.trades, one.delta * static_cast<double>(k));
      EXPECT_NEAR(one.prices[k], direct, 1e-9 * (1.0 + std::abs(direct)));
    }
  }
  EXPECT_DOUBLE_EQ(one.xi0, 2.0);
}

TEST(SimplifiedPrice, SingleTradeIsKappaTimesXi) {
  for (const Kernel& kernel : {Kernel(ExponentialKernel{0.5, 1.0}), Kernel(PowerLawKernel{0.4, 0.6, 1.0})}) {
    const double psi = psi_l1_exact(kernel);
    const std::vector<Trade> trades{Trade{1.5, Side::ask, 2, 0.3}};
    EXPECT_EQ(simplified_price_at(kernel, trades, 1.0), 0.0);
    for (double t : {1.5, 2.0, 4.0, 30.0})
      EXPECT_DOUBLE_EQ(simplified_price_at(kernel, trades, t), 0.3 * xi_of(kernel, psi, t - 1.5));
    const std::vector<Trade> bid{Trade{1.5, Side::bid, 2, 0.3}};
    EXPECT_DOUBLE_EQ(simplified_price_at(kernel, bid, 4.0), -0.3 * xi_of(kernel, psi, 2.5));
  }
}

TEST(SimplifiedPrice, PowerLawKernelUsesTheDirectSum) {
  SimplifiedPriceModel m = constant_model(0.2, 60.0);
  m.market.kernel = Kernel(PowerLawKernel{0.4, 0.6, 1.0});
  m.delta = 0.5;
  const auto sp = simulate_simplified_price(m, 5);
  ASSERT_GT(sp.trades.size(), 20u);
  for (std::size_t k = 0; k < sp.prices.size(); ++k)
    EXPECT_DOUBLE_EQ(sp.prices[k], simplified_price_at(m.market.kernel, sp.trades, sp.delta * static_cast<double>(k)));
}

TEST(SimplifiedPrice, DefaultStepIsTenInterTradeTimes) {
  const auto m = constant_model(0.5, 100.0);
  EXPECT_DOUBLE_EQ(default_sampling_step(m), 2.5);
  const auto sp = simulate_simplified_price(m, 1);
  EXPECT_DOUBLE_EQ(sp.delta, 2.5);
  EXPECT_EQ(sp.prices.size(), 41u);
  EXPECT_EQ(sp.prices.front(), 0.0);
}

TEST(SimplifiedPrice, FineSamplingRecoversTradeQuadraticVariation) {
  const auto sp = simulate_simplified_price(affine_model(affine_square_kappa(0.01, -0.002), 2e4), 11);
  ASSERT_GT(sp.trades.size(), 50000u);
  const double qv = trade_quadratic_variation(sp);
  EXPECT_LT(std::abs(realized_variance(sp) / qv - 1.0), 0.05);
}

TEST(RealizedVariance, ElementaryCases) {
  EXPECT_EQ(realized_variance(from_prices({1.5, 1.5, 1.5, 1.5})), 0.0);
  EXPECT_EQ(realized_variance(from_prices({0.0, 3.0})), 9.0);
  EXPECT_THROW((void)realized_variance(from_prices({1.0})), std::invalid_argument);
}

TEST(RealizedVariance, InvariantToAConstantShift) {
  // prices on a dyadic grid so every difference and square is exact in floating point
  auto sp = simulate_simplified_price(constant_model(0.5, 500.0), 2);
  for (double& p : sp.prices) p = std::ldexp(std::round(std::ldexp(p, 12)), -12);
  auto shifted = sp;
  for (double& p : shifted.prices) p += 1024.0;
  EXPECT_EQ(realized_variance(shifted), realized_variance(sp));
}

TEST(RealizedVariance, ConvergesToTheTradeSumAsDeltaShrinks) {
  const auto sp = simulate_simplified_price(affine_model(affine_square_kappa(0.01, -0.002), 2e4), 12);
  const double qv = trade_quadratic_variation(sp);
  const std::vector<std::size_t> ladder{1000, 100, 10, 1};
  std::vector<double> gaps;
  for (std::size_t m : ladder) gaps.push_back(std::abs(realized_variance(subsample(sp, m)) / qv - 1.0));
  EXPECT_LT(gaps.back(), 0.05);
  EXPECT_LT(gaps.back(), gaps.front());
}

TEST(KappaConst, AlgebraicIdentityAndHomogeneity) {
  const auto sp = simulate_simplified_price(constant_model(0.5, 2000.0), 4);
  const double k = estimate_kappa_const(sp, sp.xi0);
  const double n = static_cast<double>(sp.trades.size());
  EXPECT_NEAR(k * k * sp.xi0 * sp.xi0 * n, realized_variance(sp), 1e-12 * realized_variance(sp));
  EXPECT_NEAR(estimate_kappa_const(sp, 2.0 * sp.xi0), 0.5 * k, 1e-15);
}

TEST(KappaConst, EdgeCases) {
  EXPECT_EQ(estimate_kappa_const(from_prices({2.0, 2.0, 2.0}, 3), 2.0), 0.0);
  EXPECT_THROW((void)estimate_kappa_const(from_prices({0.0, 1.0}, 0), 2.0), NoTradesError);
}

TEST(KappaConst, RecoversTheSimulatedValue) {
  const auto sp = simulate_simplified_price(constant_model(0.5, 1e5), 7);
  ASSERT_GT(sp.trades.size(), 300000u);
  EXPECT_LT(std::abs(estimate_kappa_const(sp, 2.0) / 0.5 - 1.0), 0.05);
}

TEST(KappaConst, ErrorShrinksWithTheHorizon) {
  // mean trade rate is 4, so these horizons hold about 1e3, 1e4 and 1e5 trades
  const std::vector<double> horizons{250.0, 2500.0, 25000.0};
  std::vector<RunningStats> sq(horizons.size());
  for (std::size_t h = 0; h < horizons.size(); ++h)
    for (std::uint64_t r = 0; r < 40; ++r) {
      const auto sp = simulate_simplified_price(constant_model(0.5, horizons[h]), 1000 * (h + 1) + r);
      const double e = estimate_kappa_const(sp, 2.0) - 0.5;
      sq[h].add(e * e);
    }
  for (std::size_t h = 1; h < horizons.size(); ++h) {
    EXPECT_LT(sq[h].mean(), sq[h - 1].mean() + 2.0 * std::hypot(sq[h].stderr_mean(), sq[h - 1].stderr_mean()));
    EXPECT_LT(sq[h].mean(), sq[h - 1].mean());
  }
}

TEST(KappaConst, DeltaLadder) {
  const auto sp = simulate_simplified_price(constant_model(0.5, 5e4), 9);
  const std::vector<std::size_t> multipliers{1, 2, 4, 8};
  const auto rows = delta_ladder(sp, 2.0, multipliers);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_DOUBLE_EQ(rows[i].delta, sp.delta * static_cast<double>(multipliers[i]));
    EXPECT_LT(std::abs(rows[i].kappa / 0.5 - 1.0), 0.05);
  }
  EXPECT_EQ(rows[0].rv, realized_variance(sp));
}

TEST(KappaNoise, ZeroNoiseHasZeroIntercept) {
  const auto sp = simulate_simplified_price(noise_model(0.0), 21);
  const auto fit = estimate_kappa_noise(window_stats(sp, 1000));
  EXPECT_LT(std::abs(fit.intercept), 2.0 * fit.intercept_stderr);
  // slope is kappa^2 xi0^2; compare with the constant estimator on the same data
  const double k = estimate_kappa_const(sp, sp.xi0);
  EXPECT_LT(std::abs(fit.kappa(sp.xi0) / k - 1.0), 0.05);
}

TEST(KappaNoise, RecoversTheNoiseVariance) {
  const auto sp = simulate_simplified_price(noise_model(0.3), 22);
  const auto fit = estimate_kappa_noise(window_stats(sp, 1000));
  EXPECT_LT(std::abs(fit.intercept / 0.09 - 1.0), 0.10);
  EXPECT_LT(std::abs(fit.kappa(sp.xi0) / 0.5 - 1.0), 0.05);
}

TEST(KappaNoise, CollinearWindowsAreRejected) {
  std::vector<WindowStats> w;
  for (int i = 0; i < 10; ++i) w.push_back(WindowStats{2.0, 1.0 + i, 8.0, 0.0});
  EXPECT_THROW((void)estimate_kappa_noise(w), CollinearityError);
  EXPECT_THROW((void)estimate_kappa_noise(std::span(w).first(2)), std::invalid_argument);
}

TEST(WindowStats, PartitionTheSample) {
  const auto sp = simulate_simplified_price(constant_model(0.5, 1000.0), 6);
  const auto ws = window_stats(sp, 8);
  ASSERT_EQ(ws.size(), 8u);
  double rv = 0.0, n = 0.0, q = 0.0;
  for (const auto& w : ws) {
    EXPECT_DOUBLE_EQ(w.length, 125.0);
    rv += w.rv;
    n += w.trades;
  }
  for (const auto& tr : sp.trades) q += static_cast<double>(tr.queue);
  for (const auto& w : ws) q -= w.queue_sum;
  EXPECT_NEAR(rv, realized_variance(sp), 1e-9 * rv);
  EXPECT_EQ(n, static_cast<double>(sp.trades.size()));
  EXPECT_NEAR(q, 0.0, 1e-9);
  EXPECT_THROW((void)window_stats(sp, 0), std::invalid_argument);
}

TEST(KappaAffine, RecoversBothCoefficientsAtAMillionTrades) {
  const auto sp = simulate_simplified_price(affine_model(affine_square_kappa(0.01, -0.002), 2.5e5), 31);
  ASSERT_GT(sp.trades.size(), 900000u);
  for (const auto& tr : sp.trades) ASSERT_LE(tr.queue, 5);
  const auto fit = estimate_kappa_affine(window_stats(sp, 5000), sp.xi0);
  EXPECT_LT(std::abs(fit.a / 0.01 - 1.0), 0.05);
  EXPECT_LT(std::abs(fit.b / -0.002 - 1.0), 0.05);
}

TEST(KappaAffine, ConstantKappaGivesZeroSlope) {
  const auto sp = simulate_simplified_price(affine_model(Kappa(ConstantKappa{0.1}), 5e4), 32);
  const auto fit = estimate_kappa_affine(window_stats(sp, 1000), sp.xi0);
  EXPECT_LT(std::abs(fit.b), 2.0 * fit.b_stderr);
  const double k = estimate_kappa_const(sp, sp.xi0);
  EXPECT_LT(std::abs(fit.a / (k * k) - 1.0), 0.05);
}

TEST(KappaAffine, DecreasingKappaGivesNegativeSlope) {
  const auto sp = simulate_simplified_price(affine_model(Kappa(AffineKappa{-0.005, 0.1}), 2e4), 33);
  const auto fit = estimate_kappa_affine(window_stats(sp, 1000), sp.xi0);
  EXPECT_LT(fit.b + 3.0 * fit.b_stderr, 0.0);
}

TEST(SampledPriceCsv, RoundTrip) {
  const auto sp = simulate_simplified_price(affine_model(affine_square_kappa(0.01, -0.002), 200.0), 41);
  const auto dir = std::filesystem::temp_directory_path() / "lobimpact_estimation_csv";
  std::filesystem::create_directories(dir);
  write_sampled_price(sp, dir / "prices.csv", dir / "trades.csv");
  const auto back = read_sampled_price(dir / "prices.csv", dir / "trades.csv", sp.xi0);
  ASSERT_EQ(back.prices.size(), sp.prices.size());
  ASSERT_EQ(back.trades.size(), sp.trades.size());
  EXPECT_EQ(back.prices, sp.prices);
  EXPECT_DOUBLE_EQ(back.delta, sp.delta);
  for (std::size_t i = 0; i < sp.trades.size(); ++i) {
    EXPECT_EQ(back.trades[i].time, sp.trades[i].time);
    EXPECT_EQ(back.trades[i].side, sp.trades[i].side);
    EXPECT_EQ(back.trades[i].queue, sp.trades[i].queue);
    EXPECT_EQ(back.trades[i].kappa, sp.trades[i].kappa);
  }
  EXPECT_EQ(realized_variance(back), realized_variance(sp));
  std::filesystem::remove_all(dir);
}
