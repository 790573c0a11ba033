#include "lobimpact/analytics.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <algorithm>
#include <cmath>

#include "lobimpact/stats.hpp"

namespace lobimpact {

double instantaneous_impact(double c_kappa, double c_lambda, double mu, double phi_norm, Side side) {
  if (!(c_lambda < 0.0)) throw std::domain_error("instantaneous_impact: needs c_lambda < 0");
  if (!(phi_norm >= 0.0 && phi_norm < 1.0)) throw std::domain_error("instantaneous_impact: needs ||phi|| in [0, 1)");
  if (!(mu >= 0.0)) throw std::domain_error("instantaneous_impact: needs mu >= 0");
  const double ask = -(c_kappa / c_lambda) * mu / (1.0 - phi_norm);
  return side == Side::ask ? ask : -ask;
}

double inverse_difference(const ShapeConfig& cfg, double y) {
  const auto& qm = cfg.queues;
  const double d_lo = qm.difference(cfg.q_lo);
  const double d_hi = qm.difference(cfg.q_hi);
  if (!(d_hi < d_lo)) throw RangeError("inverse_difference: D is not decreasing on the window");
  if (y > d_lo || y < d_hi)
    throw RangeError("inverse_difference: " + std::to_string(y) + " is outside D([q_lo, q_hi]) = [" +
                     std::to_string(d_hi) + ", " + std::to_string(d_lo) + "]");
  auto [a, b] = boost::math::tools::bisect([&](double q) { return qm.difference(q) - y; }, cfg.q_lo, cfg.q_hi,
                                           [](double lo, double hi) { return hi - lo <= 1e-10; });
  return 0.5 * (a + b);
}

double asymptotic_shape(const ShapeConfig& cfg, double gamma) {
  return cfg.kappa(inverse_difference(cfg, cfg.m - gamma)) - cfg.kappa(inverse_difference(cfg, cfg.m));
}

std::vector<double> asymptotic_shape(const ShapeConfig& cfg) {
  const double base = cfg.kappa(inverse_difference(cfg, cfg.m));
  std::vector<double> out;
  out.reserve(cfg.gammas.size());
  for (double g : cfg.gammas) out.push_back(cfg.kappa(inverse_difference(cfg, cfg.m - g)) - base);
  return out;
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: x and y differ in length");
  if (x.size() < 3) throw std::invalid_argument("fit_power_law: need at least 3 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_power_law: values must be > 0");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx, dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_power_law: x values are all equal");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

double market_order_impact(const BrokerStrategy& sp, double t) {
  if (!(sp.alpha > 0.0 && sp.alpha < 1.0) || !(sp.lambda > 0.0))
    throw std::domain_error("market_order_impact: needs alpha in (0, 1) and lambda > 0");
  if (!sp.g || t <= 0.0 || sp.g_end <= 0.0) return 0.0;
  const double upper = std::min(t, sp.g_end);
  std::vector<double> cuts{0.0};
  for (double b : sp.g_breaks)
    if (b > 0.0 && b < upper) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(upper);
  // tanh-sinh copes with the (t - s)^-alpha endpoint singularity on the last piece
  boost::math::quadrature::tanh_sinh<double> rule;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double err = 0.0, l1 = 0.0, v = 0.0;
    const auto where = "[" + std::to_string(cuts[k]) + ", " + std::to_string(cuts[k + 1]) + "]";
    try {
      v = rule.integrate(
        [&](double s, double tc) {
          // on the last piece up to t, tc = t - s exactly near the right end
          const bool last = k + 2 == cuts.size() && upper == t;
          const double dist = (last && tc > 0.0) ? tc : t - s;
          return (1.0 + std::pow(dist, -sp.alpha) / sp.lambda) * sp.g(s);
        },
        cuts[k], cuts[k + 1], 1e-12, &err, &l1);
    } catch (const std::exception& e) {
      throw QuadratureError("market_order_impact: quadrature failed on " + where + ": " + e.what());
    }
    if (!std::isfinite(v) || err > 1e-8 * std::max(1.0, l1))
      throw QuadratureError("market_order_impact: quadrature did not converge on " + where);
    total += v;
  }
  return sp.kappa_star * total;
}

BrokerReport broker_evaluation(const BrokerStrategy& sp, const RoughVolPath& y, std::span<const double> grid) {
  if (!(sp.c_lambda < 0.0)) throw std::domain_error("broker_evaluation: needs c_lambda < 0");
  BrokerReport r;
  for (double t : grid) {
    BrokerRow row;
    row.t = t;
    row.limit = linear_limit_mi(y, t, sp.f, sp.c_kappa, sp.c_lambda);
    row.market = market_order_impact(sp, t);
    row.total = row.limit + row.market;
    r.rows.push_back(row);
  }
  return r;
}

StationaryKappa stationary_kappa(const ImpactModel& model, double averaging_time, std::uint64_t seed) {
  if (!(averaging_time > 0.0)) throw std::invalid_argument("stationary_kappa: averaging time must be > 0");
  const double reversion = model.queues.mean_reversion(-200, 200);
  if (!(reversion > 0.0)) throw std::invalid_argument("stationary_kappa: queue model has no mean reversion");
  StationaryKappa out;
  out.burn_in = 10.0 / reversion;
  out.averaging_time = averaging_time;
  BookConfig cfg;
  cfg.queues = model.queues;
  cfg.market = model.market;
  cfg.q0_ask = model.q0_ask;
  cfg.q0_bid = model.q0_bid;
  cfg.horizon = out.burn_in + averaging_time;
  cfg.record_stream = false;
  const auto path = simulate_book(cfg, seed);
  const auto& qp = path.ask.queue;

  constexpr int batches = 20;
  const double width = averaging_time / batches;
  RunningStats means;
  for (int b = 0; b < batches; ++b) {
    const double t0 = out.burn_in + width * b, t1 = t0 + width;
    // integrate the piecewise-constant kappa(q) over [t0, t1]
    auto it = std::upper_bound(qp.times.begin(), qp.times.end(), t0);
    std::size_t i = static_cast<std::size_t>(std::distance(qp.times.begin(), it)) - 1;
    double s = t0, acc = 0.0;
    while (s < t1) {
      const double next = i + 1 < qp.times.size() ? std::min(qp.times[i + 1], t1) : t1;
      acc += model.kappa(static_cast<double>(qp.values[i])) * (next - s);
      s = next;
      ++i;
    }
    means.add(acc / width);
  }
  out.value = means.mean();
  out.stderr_value = means.stderr_mean();
  return out;
}

}  // namespace lobimpact
