#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lobimpact/hawkes.hpp"
#include "lobimpact/impact.hpp"
#include "lobimpact/orderbook.hpp"
#include "lobimpact/scaling.hpp"

namespace lobimpact {

// Impact of one unit limit order at stationarity, -(c_k / c_l) mu / (1 - ||phi||) for
// an ask order (extra ask liquidity with c_k < 0 pushes the price down); bid flips the sign.
[[nodiscard]] double instantaneous_impact(double c_kappa, double c_lambda, double mu, double phi_norm,
                                          Side side = Side::ask);

class RangeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ShapeConfig {
  QueueModel queues{AffineDifferenceRates{-1.0, 0.025, 0.5}};  // D = lambda^L - lambda^C
  Kappa kappa{SqrtLogKappa{}};
  double m = 1.0;  // stationary variance level
  std::vector<double> gammas;
  double q_lo = -1e4;  // bracketing window for D^{-1}
  double q_hi = 1e4;
};

// D^{-1}(y) by bisection on [q_lo, q_hi] to 1e-10; RangeError when y is outside D's range there.
[[nodiscard]] double inverse_difference(const ShapeConfig& cfg, double y);
// kappa(D^{-1}(m - gamma)) - kappa(D^{-1}(m))
[[nodiscard]] double asymptotic_shape(const ShapeConfig& cfg, double gamma);
[[nodiscard]] std::vector<double> asymptotic_shape(const ShapeConfig& cfg);

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
};

// OLS of log y on log x.
[[nodiscard]] PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

// Limit-order intensity f for MI^l and market-order intensity g for
// MI^m_t = kappa* int_0^t (1 + (t - s)^-alpha / lambda) g(s) ds.
struct BrokerStrategy {
  StrategyProfile f;
  std::function<double(double)> g;
  std::vector<double> g_breaks;  // known discontinuities of g, to split the quadrature
  double g_end = 1.0;            // g vanishes after this time
  double c_kappa = -1.0;
  double c_lambda = -1.0;
  double kappa_star = 1.0;
  double alpha = 0.6;
  double lambda = 1.0;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BrokerRow {
  double t = 0.0;
  double limit = 0.0;   // MI^l
  double market = 0.0;  // MI^m
  double total = 0.0;
};

struct BrokerReport {
  std::vector<BrokerRow> rows;
  // limit and market impacts are added as if independent
  std::string approximation = "additive: limit- and market-order impacts evaluated independently";
};

[[nodiscard]] double market_order_impact(const BrokerStrategy& sp, double t);

// Grid points must be nodes of the Y path (MI^l comes from linear_limit_mi).
[[nodiscard]] BrokerReport broker_evaluation(const BrokerStrategy& sp, const RoughVolPath& y,
                                             std::span<const double> grid);

// Time average of kappa(q^a) for the base book, after a burn-in of 10 mean-reversion times.
struct StationaryKappa {
  double value = 0.0;
  double stderr_value = 0.0;  // batch means over 20 batches
  double burn_in = 0.0;
  double averaging_time = 0.0;
};

[[nodiscard]] StationaryKappa stationary_kappa(const ImpactModel& model, double averaging_time, std::uint64_t seed);

}  // namespace lobimpact
