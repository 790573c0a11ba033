#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lobimpact/kernels.hpp"

using namespace lobimpact;

namespace {

// Picard iteration psi <- phi + phi * psi with an explicit trapezoid convolution.
std::vector<double> picard_psi(const Kernel& k, double dt, std::size_t n, int iterations) {
  std::vector<double> phi(n), psi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) phi[i] = k(dt * static_cast<double>(i));
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> next(n);
    for (std::size_t m = 0; m < n; ++m) {
      double conv = 0.0;
      for (std::size_t j = 0; j <= m; ++j) {
        double w = (j == 0 || j == m) ? 0.5 : 1.0;
        conv += w * phi[m - j] * psi[j];
      }
      next[m] = phi[m] + (m > 0 ? dt * conv : 0.0);
    }
    psi = std::move(next);
  }
  return psi;
}

}  // namespace

TEST(Kernel, ExponentialClosedForms) {
  Kernel k(ExponentialKernel{0.4, 2.0});
  EXPECT_DOUBLE_EQ(k.l1_norm(), 0.2);
  EXPECT_NEAR(k(0.5), 0.4 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(k.cumulative(0.5) + k.tail(0.5), 0.2, 1e-15);
  EXPECT_EQ(k(-1.0), 0.0);
}

TEST(Kernel, PowerLawTailConstant) {
  PowerLawKernel spec{0.5, 0.6, 2.0};
  Kernel k(spec);
  EXPECT_NEAR(k.l1_norm(), 0.5, 1e-15);
  // t^alpha * int_t^inf phi -> norm * c^alpha
  const double K = 0.5 * std::pow(2.0, 0.6);
  EXPECT_NEAR(std::pow(1e8, 0.6) * k.tail(1e8), K, 1e-6 * K);
  // tail is the integral of phi: compare with a fine midpoint rule on [1, 3]
  double mid = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mid += k(1.0 + (i + 0.5) * 2.0 / n) * 2.0 / n;
  EXPECT_NEAR(mid, k.tail(1.0) - k.tail(3.0), 1e-9);
}

TEST(Kernel, TabulatedInterpolatesAndIntegrates) {
  std::vector<double> v;
  for (int i = 0; i <= 2000; ++i) v.push_back(0.5 * std::exp(-0.01 * i));
  Kernel k(TabulatedKernel{0.01, v});
  Kernel e(ExponentialKernel{0.5, 1.0});
  EXPECT_NEAR(k(0.305), e(0.305), 1e-5);
  EXPECT_NEAR(k.l1_norm(), e.cumulative(20.0), 1e-5);
  EXPECT_EQ(k(25.0), 0.0);
  EXPECT_GE(k.envelope(3.0), k(3.0));
}

TEST(Kernel, EnvelopeIsNonincreasingMajorant) {
  Kernel k(TabulatedKernel{0.5, {0.1, 0.3, 0.05, 0.2, 0.0}});
  double prev = 1e9;
  for (double t = 0.0; t <= 2.5; t += 0.01) {
    EXPECT_GE(k.envelope(t) + 1e-15, k(t));
    EXPECT_LE(k.envelope(t), prev + 1e-15);
    prev = k.envelope(t);
  }
}

TEST(SolvePsi, ExponentialMatchesClosedForm) {
  const double a = 0.5, b = 1.0;
  Kernel k(ExponentialKernel{a, b});
  auto table = solve_psi(k, 1e-3, 10.0);
  for (double t : {0.0, 0.3, 1.0, 4.0, 9.5}) EXPECT_NEAR(table(t), a * std::exp(-(b - a) * t), 2e-7) << t;
  EXPECT_LE(table.residual, 1e-6);
}

TEST(SolvePsi, AgreesWithPicardIteration) {
  Kernel k(PowerLawKernel{0.5, 0.6, 1.0});
  const double dt = 0.01;
  auto table = solve_psi(k, dt, 5.0);
  auto picard = picard_psi(k, dt, table.psi.size(), 60);
  for (std::size_t i = 0; i < picard.size(); i += 25) EXPECT_NEAR(table.psi[i], picard[i], 1e-12) << i;
  EXPECT_LE(table.residual, 1e-6);
}

TEST(SolvePsi, RefinementConverges) {
  // Second-order scheme: halving dt shrinks the gap to the fine solution about 4x.
  Kernel k(PowerLawKernel{0.6, 0.6, 1.0});
  auto coarse = solve_psi(k, 0.02, 2.0);
  auto mid = solve_psi(k, 0.01, 2.0);
  auto fine = solve_psi(k, 0.0025, 2.0);
  double e1 = std::abs(coarse(1.5) - fine(1.5));
  double e2 = std::abs(mid(1.5) - fine(1.5));
  EXPECT_LT(e2, 0.4 * e1);
}

TEST(SolvePsi, L1NormMatchesRenewalIdentity) {
  for (double n : {0.3, 0.5, 0.9}) {
    Kernel k(ExponentialKernel{n, 1.0});
    auto table = solve_psi(k, 0.01, 30.0 / (1.0 - n));
    double exact = n / (1.0 - n);
    EXPECT_NEAR(table.psi_l1, exact, 0.01 * exact) << n;
    EXPECT_TRUE(table.warnings.empty());
  }
}

TEST(SolvePsi, UnstableKernelRejected) {
  EXPECT_THROW((void)solve_psi(Kernel(ExponentialKernel{1.0, 1.0}), 0.01, 5.0), UnstableKernel);
  EXPECT_THROW((void)solve_psi(Kernel(PowerLawKernel{1.2, 0.5, 1.0}), 0.01, 5.0), UnstableKernel);
}

TEST(SolvePsi, TabulatedKernelWarnsAboutTail) {
  Kernel k(TabulatedKernel{0.1, {0.3, 0.2, 0.1, 0.0}});
  auto table = solve_psi(k, 0.01, 5.0);
  ASSERT_FALSE(table.warnings.empty());
}

TEST(Xi, StartsAtInverseOneMinusNorm) {
  for (double n : {0.3, 0.5, 0.9}) {
    Kernel k(ExponentialKernel{2.0 * n, 2.0});
    auto table = solve_psi(k, 0.004, 24.0 / (2.0 * (1.0 - n)));
    EXPECT_NEAR(xi_of(k, table.psi_l1, 0.0), 1.0 / (1.0 - n), 1e-4 / (1.0 - n)) << n;
  }
}

TEST(Xi, NonincreasingToOne) {
  Kernel k(PowerLawKernel{0.5, 0.6, 1.0});
  double psi = psi_l1_exact(k);
  double prev = xi_of(k, psi, 0.0);
  for (double t = 0.1; t < 1e6; t *= 1.5) {
    double x = xi_of(k, psi, t);
    EXPECT_LE(x, prev);
    EXPECT_GE(x, 1.0);
    prev = x;
  }
  EXPECT_NEAR(xi_of(k, psi, 1e12), 1.0, 1e-6);
}
