#include <gtest/gtest.h>

#include <cmath>

#include "lobimpact/rescaling.hpp"

using namespace lobimpact;

TEST(RescalingMap, ScalingIdentities) {
  RoughVolParams p{0.6, 1.3, 0.8};
  for (double T : {50.0, 200.0, 800.0}) {
    const auto m = rescaling_map(p, T);
    EXPECT_DOUBLE_EQ(m.beta * (1.0 - m.a), m.mu);
    EXPECT_NEAR(std::pow(T, p.alpha) * (1.0 - m.a) / std::tgamma(1.0 - p.alpha), p.lambda, 1e-12);
    const auto lit = rescaling_map(p, T, LambdaNormalization::literal);
    EXPECT_NEAR((1.0 - p.alpha) * std::pow(T, p.alpha) * (1.0 - lit.a), p.lambda, 1e-12);
    EXPECT_DOUBLE_EQ(std::pow(T, 1.0 - p.alpha) * m.mu, p.mu_star);
    const auto market = m.market();
    EXPECT_NEAR(market.kernel.l1_norm(), m.a, 1e-12);
    // K = lim t^alpha int_t^inf phi = 1 for the unit power law
    EXPECT_NEAR(std::pow(1e8, p.alpha) * market.kernel.tail(1e8) / m.a, 1.0, 1e-6);

    const QueueModel limit(AffineDifferenceRates{-1.0, 0.6, 0.5});
    const auto micro = m.queues(limit);
    const Kappa kappa(SqrtLogKappa{});
    const auto kt = m.kappa(kappa);
    for (long q : {-300L, -7L, 0L, 5L, 120L}) {
      const double x = static_cast<double>(q) / m.size_scale();
      EXPECT_NEAR(micro.limit_rate(q), m.beta * (0.5 + std::max(limit.difference(x), 0.0)), 1e-12);
      EXPECT_NEAR(micro.cancel_rate(q), m.beta * (0.5 + std::max(-limit.difference(x), 0.0)), 1e-12);
      EXPECT_NEAR(kt(static_cast<double>(q)), kappa(x), 1e-15);
    }
    const auto f = StrategyProfile::constant(0.5, 0.0, 1.0);
    const auto nu = m.metaorder(f);
    EXPECT_DOUBLE_EQ(nu(0.3 * T), m.beta * 0.5);
    EXPECT_EQ(nu(1.2 * T), 0.0);
  }
  EXPECT_THROW((void)rescaling_map(p, 2.0), std::invalid_argument);
}

namespace {

LimitImpactSpec affine_limit() {
  LimitImpactSpec spec;
  spec.queues = QueueModel(AffineDifferenceRates{-1.0, 0.6, 0.5});
  spec.kappa = Kappa(AffineKappa{-0.5, 1.0});
  spec.h = 1.0 / 256.0;
  return spec;
}

}  // namespace

TEST(Rescaling, QueueMeansApproachTheOde) {
  RescalingConfig c;
  c.ladder = {50.0, 200.0, 800.0};
  c.queue_paths = 100;
  c.queue_points = 4;
  c.limit_paths = 100;
  c.micro.n_histories = 0;
  c.seed = 3;
  auto r = rescaling_consistency(affine_limit(), StrategyProfile::constant(0.5, 0.0, 1.0), c);
  ASSERT_EQ(r.levels.size(), 3u);
  EXPECT_EQ(r.levels[0].impact.n_paths, 0u);
  for (const auto& level : r.levels) {
    // the simulator against the renewal-equation expectations of the same micro model
    for (std::size_t k = 0; k < r.grid.size(); ++k) {
      EXPECT_NEAR(level.queue_mean[k], level.queue_exact[k], 3.0 * level.queue_stderr[k]) << level.map.T;
      EXPECT_NEAR(level.count_mean[k], level.count_exact[k], 3.0 * level.count_stderr[k]) << level.map.T;
    }
  }
  for (std::size_t l = 1; l < r.levels.size(); ++l) {
    EXPECT_LT(r.levels[l].exact_queue_distance, r.levels[l - 1].exact_queue_distance);
    EXPECT_LT(r.levels[l].exact_count_distance, r.levels[l - 1].exact_count_distance);
  }
  const auto& top = r.levels.back();
  for (std::size_t k = 0; k < r.grid.size(); ++k)
    EXPECT_NEAR(top.queue_mean[k], r.queue_limit[k], 3.0 * top.queue_stderr[k]) << r.grid[k];
}

TEST(Rescaling, LiteralNormalizationConvergesToAnotherLambda) {
  RescalingConfig c;
  c.ladder = {800.0};
  c.queue_paths = 2;
  c.queue_points = 2;
  c.limit_paths = 2;
  c.micro.n_histories = 0;
  auto laplace = rescaling_consistency(affine_limit(), StrategyProfile{}, c);
  c.normalization = LambdaNormalization::literal;
  auto literal = rescaling_consistency(affine_limit(), StrategyProfile{}, c);
  EXPECT_LT(laplace.levels[0].exact_count_distance, literal.levels[0].exact_count_distance);
  EXPECT_GT(literal.levels[0].count_exact.back(), laplace.levels[0].count_exact.back());
}

TEST(Rescaling, MicroImpactApproachesTheLimit) {
  RescalingConfig c;
  c.ladder = {50.0, 200.0};
  c.queue_paths = 2;
  c.queue_points = 1;
  c.limit_paths = 2000;
  c.micro.n_histories = 100;
  c.seed = 4;
  auto r = rescaling_consistency(affine_limit(), StrategyProfile::constant(0.5, 0.0, 1.0), c);
  const auto& lim = r.limit_impact;
  const auto& lo = r.levels[0].impact;
  const auto& hi = r.levels[1].impact;
  EXPECT_LT(hi.value, 0.0);
  EXPECT_LE(std::abs(hi.value - lim.value),
            std::abs(lo.value - lim.value) + 2.0 * std::hypot(hi.stderr_value, lo.stderr_value, lim.stderr_value));
  EXPECT_EQ(hi.unfinished, 0u);
}
