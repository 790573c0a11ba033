#include "lobimpact/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lobimpact/kernels.hpp"
#include "lobimpact/rng.hpp"
#include "lobimpact/stats.hpp"

namespace lobimpact {

double default_sampling_step(const SimplifiedPriceModel& model) {
  if (!model.market.baseline.is_constant())
    throw std::invalid_argument("default_sampling_step: needs a constant baseline");
  const double rate = 2.0 * model.market.baseline.constant_rate() / (1.0 - model.market.kernel.l1_norm());
  if (!(rate > 0.0)) throw std::invalid_argument("default_sampling_step: trade rate is zero");
  return 10.0 / rate;
}

double simplified_price_at(const Kernel& kernel, std::span<const Trade> trades, double t) {
  const double psi = psi_l1_exact(kernel);
  double p = 0.0;
  for (const auto& tr : trades) {
    if (tr.time > t) break;
    const double sign = tr.side == Side::ask ? 1.0 : -1.0;
    p += sign * tr.kappa * xi_of(kernel, psi, t - tr.time);
  }
  return p;
}

SampledPrice simulate_simplified_price(const SimplifiedPriceModel& model, std::uint64_t seed) {
  const double delta = model.delta > 0.0 ? model.delta : default_sampling_step(model);
  if (!(model.horizon >= delta)) throw std::invalid_argument("simulate_simplified_price: horizon shorter than delta");
  if (!(model.noise_sigma >= 0.0)) throw std::invalid_argument("simulate_simplified_price: noise_sigma must be >= 0");

  BookConfig cfg;
  cfg.queues = model.queues;
  cfg.market = model.market;
  cfg.q0_ask = model.q0_ask;
  cfg.q0_bid = model.q0_bid;
  cfg.horizon = model.horizon;
  cfg.record_stream = false;
  const auto book = simulate_book(cfg, seed);

  SampledPrice sp;
  sp.delta = delta;
  sp.horizon = model.horizon;
  const auto& kernel = model.market.kernel;
  const double psi = psi_l1_exact(kernel);
  sp.xi0 = xi_of(kernel, psi, 0.0);
  auto add_side = [&](const BookSide& side, Side s) {
    for (std::size_t i = 0; i < side.market.size(); ++i)
      sp.trades.push_back(Trade{side.market[i], s, side.q_before_market[i], model.kappa(static_cast<double>(side.q_before_market[i]))});
  };
  add_side(book.ask, Side::ask);
  add_side(book.bid, Side::bid);
  std::sort(sp.trades.begin(), sp.trades.end(), [](const Trade& a, const Trade& b) { return a.time < b.time; });

  const auto samples = static_cast<std::size_t>(std::floor(model.horizon / delta + 1e-9));
  sp.prices.reserve(samples + 1);
  Rng noise(derive_seed(seed, {stream::noise}));
  double w = 0.0;
  const double sd = model.noise_sigma * std::sqrt(delta);
  std::size_t next = 0;

  if (const auto* e = kernel.exponential()) {
    // xi(t) = 1 + C exp(-b t): keep sum s kappa and its exponentially decayed twin
    const double C = (1.0 + psi) * e->a / e->b;
    double level = 0.0, decayed = 0.0, at = 0.0;
    for (std::size_t k = 0; k <= samples; ++k) {
      const double t = delta * static_cast<double>(k);
      while (next < sp.trades.size() && sp.trades[next].time <= t) {
        const auto& tr = sp.trades[next++];
        decayed *= std::exp(-e->b * (tr.time - at));
        at = tr.time;
        const double v = (tr.side == Side::ask ? 1.0 : -1.0) * tr.kappa;
        level += v;
        decayed += v;
      }
      decayed *= std::exp(-e->b * (t - at));
      at = t;
      if (k > 0) w += sd * noise.normal();
      sp.prices.push_back(level + C * decayed + w);
    }
  } else {
    for (std::size_t k = 0; k <= samples; ++k) {
      const double t = delta * static_cast<double>(k);
      if (k > 0) w += sd * noise.normal();
      sp.prices.push_back(simplified_price_at(kernel, sp.trades, t) + w);
    }
  }
  // trades after the last sample are not observed
  const double last = delta * static_cast<double>(samples);
  while (!sp.trades.empty() && sp.trades.back().time > last) sp.trades.pop_back();
  return sp;
}

SampledPrice subsample(const SampledPrice& sp, std::size_t m) {
  if (m == 0) throw std::invalid_argument("subsample: multiplier must be >= 1");
  SampledPrice out;
  out.delta = sp.delta * static_cast<double>(m);
  out.horizon = sp.horizon;
  out.xi0 = sp.xi0;
  for (std::size_t k = 0; k < sp.prices.size(); k += m) out.prices.push_back(sp.prices[k]);
  const double last = out.delta * static_cast<double>(out.prices.size() - 1);
  for (const auto& tr : sp.trades)
    if (tr.time <= last) out.trades.push_back(tr);
  return out;
}

double realized_variance(const SampledPrice& sp) {
  if (sp.prices.size() < 2) throw std::invalid_argument("realized_variance: need at least 2 samples");
  double rv = 0.0;
  for (std::size_t k = 1; k < sp.prices.size(); ++k) {
    const double d = sp.prices[k] - sp.prices[k - 1];
    rv += d * d;
  }
  return rv;
}

double trade_quadratic_variation(const SampledPrice& sp) {
  double s = 0.0;
  for (const auto& tr : sp.trades) s += tr.kappa * tr.kappa;
  return sp.xi0 * sp.xi0 * s;
}

double estimate_kappa_const(const SampledPrice& sp, double xi0) {
  if (sp.trades.empty()) throw NoTradesError("estimate_kappa_const: no trades in the sample");
  if (!(xi0 > 0.0)) throw std::invalid_argument("estimate_kappa_const: xi0 must be > 0");
  return std::sqrt(realized_variance(sp) / (xi0 * xi0 * static_cast<double>(sp.trades.size())));
}

std::vector<WindowStats> window_stats(const SampledPrice& sp, std::size_t windows) {
  if (sp.prices.size() < 2) throw std::invalid_argument("window_stats: need at least 2 samples");
  const std::size_t intervals = sp.prices.size() - 1;
  if (windows == 0 || windows > intervals) throw std::invalid_argument("window_stats: bad window count");
  const std::size_t per = intervals / windows;
  std::vector<WindowStats> out(windows);
  std::size_t next = 0;
  for (std::size_t w = 0; w < windows; ++w) {
    auto& ws = out[w];
    ws.length = sp.delta * static_cast<double>(per);
    for (std::size_t k = w * per + 1; k <= (w + 1) * per; ++k) {
      const double d = sp.prices[k] - sp.prices[k - 1];
      ws.rv += d * d;
    }
    const double t0 = sp.delta * static_cast<double>(w * per);
    const double t1 = sp.delta * static_cast<double>((w + 1) * per);
    while (next < sp.trades.size() && sp.trades[next].time <= t0) ++next;
    while (next < sp.trades.size() && sp.trades[next].time <= t1) {
      ws.trades += 1.0;
      ws.queue_sum += static_cast<double>(sp.trades[next].queue);
      ++next;
    }
  }
  return out;
}

namespace {

// Least squares on two regressors, after checking they are not (nearly) collinear.
LinearFit two_column_fit(std::span<const WindowStats> windows, double (*first)(const WindowStats&),
                         double (*second)(const WindowStats&), const char* who) {
  if (windows.size() < 3) throw std::invalid_argument(std::string(who) + ": need at least 3 windows");
  std::vector<double> X, y;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(windows.size()), 2);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const double a = first(windows[i]), b = second(windows[i]);
    X.push_back(a);
    X.push_back(b);
    y.push_back(windows[i].rv);
    A(static_cast<Eigen::Index>(i), 0) = a;
    A(static_cast<Eigen::Index>(i), 1) = b;
  }
  for (Eigen::Index j = 0; j < 2; ++j) {
    const double norm = A.col(j).norm();
    if (!(norm > 0.0)) throw CollinearityError(std::string(who) + ": a regressor is identically zero");
    A.col(j) /= norm;
  }
  const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues();
  if (sv(1) < 1e-8 * sv(0))
    throw CollinearityError(std::string(who) + ": regressors are collinear (singular value ratio " +
                            std::to_string(sv(1) / sv(0)) + ")");
  return ols(X, 2, y);
}

}  // namespace

double NoiseFit::kappa(double xi0) const { return std::sqrt(std::max(slope, 0.0)) / xi0; }

NoiseFit estimate_kappa_noise(std::span<const WindowStats> windows) {
  auto fit = two_column_fit(
      windows, [](const WindowStats& w) { return w.trades; }, [](const WindowStats& w) { return w.length; },
      "estimate_kappa_noise");
  return NoiseFit{fit.coef[0], fit.coef[1], fit.stderr_coef[0], fit.stderr_coef[1]};
}

AffineKappaFit estimate_kappa_affine(std::span<const WindowStats> windows, double xi0) {
  if (!(xi0 > 0.0)) throw std::invalid_argument("estimate_kappa_affine: xi0 must be > 0");
  auto fit = two_column_fit(
      windows, [](const WindowStats& w) { return w.trades; }, [](const WindowStats& w) { return w.queue_sum; },
      "estimate_kappa_affine");
  const double x2 = xi0 * xi0;
  return AffineKappaFit{fit.coef[0] / x2, fit.coef[1] / x2, fit.stderr_coef[0] / x2, fit.stderr_coef[1] / x2};
}

std::vector<DeltaLadderRow> delta_ladder(const SampledPrice& sp, double xi0, std::span<const std::size_t> multipliers) {
  std::vector<DeltaLadderRow> rows;
  for (std::size_t m : multipliers) {
    const auto sub = subsample(sp, m);
    rows.push_back(DeltaLadderRow{sub.delta, realized_variance(sub), estimate_kappa_const(sub, xi0)});
  }
  return rows;
}

void write_sampled_price(const SampledPrice& sp, const std::filesystem::path& prices,
                         const std::filesystem::path& trades) {
  std::ofstream p(prices), t(trades);
  if (!p || !t) throw std::runtime_error("write_sampled_price: cannot open output files");
  p.precision(17);
  t.precision(17);
  p << "t,price\n";
  for (std::size_t k = 0; k < sp.prices.size(); ++k) p << sp.delta * static_cast<double>(k) << ',' << sp.prices[k] << '\n';
  t << "t,side,queue,kappa\n";
  for (const auto& tr : sp.trades) t << tr.time << ',' << to_string(tr.side) << ',' << tr.queue << ',' << tr.kappa << '\n';
}

SampledPrice read_sampled_price(const std::filesystem::path& prices, const std::filesystem::path& trades, double xi0) {
  std::ifstream p(prices), t(trades);
  if (!p) throw std::runtime_error("read_sampled_price: cannot open " + prices.string());
  if (!t) throw std::runtime_error("read_sampled_price: cannot open " + trades.string());
  SampledPrice sp;
  sp.xi0 = xi0;
  std::string line;
  std::vector<double> times;
  std::getline(p, line);
  while (std::getline(p, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("read_sampled_price: malformed price row: " + line);
    times.push_back(std::stod(line.substr(0, comma)));
    sp.prices.push_back(std::stod(line.substr(comma + 1)));
  }
  if (times.size() < 2) throw std::runtime_error("read_sampled_price: need at least 2 price samples");
  sp.delta = times[1] - times[0];
  for (std::size_t k = 1; k < times.size(); ++k)
    if (std::abs(times[k] - times[k - 1] - sp.delta) > 1e-9 * std::max(1.0, times[k]))
      throw std::runtime_error("read_sampled_price: sampling is not uniform");
  sp.horizon = times.back();
  std::getline(t, line);
  while (std::getline(t, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string time, side, queue, kappa;
    if (!std::getline(ss, time, ',') || !std::getline(ss, side, ',') || !std::getline(ss, queue, ',') ||
        !std::getline(ss, kappa, ','))
      throw std::runtime_error("read_sampled_price: malformed trade row: " + line);
    if (side != "ask" && side != "bid") throw std::runtime_error("read_sampled_price: unknown side " + side);
    sp.trades.push_back(Trade{std::stod(time), side == "ask" ? Side::ask : Side::bid, std::stol(queue), std::stod(kappa)});
  }
  return sp;
}

}  // namespace lobimpact
