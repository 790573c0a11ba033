#include "lobimpact/rescaling.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

#include "lobimpact/kernels.hpp"
#include "lobimpact/rng.hpp"
#include "lobimpact/stats.hpp"

namespace lobimpact {

HawkesParams RescalingMap::market() const {
  return HawkesParams{Baseline::constant(mu), Kernel(PowerLawKernel{a, rough.alpha, 1.0})};
}

RescalingMap rescaling_map(const RoughVolParams& p, double T, LambdaNormalization normalization) {
  validate(p);
  if (!(p.alpha < 1.0)) throw std::invalid_argument("rescaling_map: needs alpha < 1");
  RescalingMap m;
  m.T = T;
  m.rough = p;
  m.normalization = normalization;
  const double c = normalization == LambdaNormalization::laplace ? std::tgamma(1.0 - p.alpha) : 1.0 / (1.0 - p.alpha);
  const double gap = p.lambda * c * std::pow(T, -p.alpha);
  if (!(T > 0.0) || !(gap < 1.0))
    throw std::invalid_argument("rescaling_map: T = " + std::to_string(T) + " gives a^T outside (0, 1)");
  m.a = 1.0 - gap;
  m.mu = p.mu_star * std::pow(T, p.alpha - 1.0);
  m.beta = m.mu / (1.0 - m.a);
  return m;
}

namespace {

double interpolate(const std::vector<double>& nodes, double h, double s) {
  const double x = s / h;
  const auto i = std::min(static_cast<std::size_t>(x), nodes.size() - 2);
  const double w = x - static_cast<double>(i);
  return (1.0 - w) * nodes[i] + w * nodes[i + 1];
}

struct ExactMeans {
  std::vector<double> queue, count;
};

// E[N_tau] = mu (tau + int_0^tau Psi) and E[q]' = beta d + (c / T) E[q] - mu (1 + Psi), with
// Psi(u) = int_0^u psi; the queue drift is affine on every integer, so the mean closes.
ExactMeans exact_micro_means(const RescalingMap& m, const AffineDifferenceRates& limit, double q0,
                             std::span<const double> grid, double dt) {
  const double end = grid.back() * m.T;
  const auto psi = solve_psi(m.market().kernel, dt, end + dt);
  const double rate = limit.c_lambda / m.T;
  const double drift = m.beta * limit.d_lambda;
  ExactMeans out;
  double tau = 0.0, q = q0, n = 0.0;
  double intensity = m.mu;  // mu (1 + Psi(0))
  for (double g : grid) {
    const double target = g * m.T;
    while (tau < target - 1e-12) {
      const double step = std::min(dt, target - tau);
      const double next = m.mu * (1.0 + psi.integral(tau + step));
      n += 0.5 * step * (intensity + next);
      // exponential integrator with the forcing trapezoid-averaged over the step
      const double e = std::exp(rate * step);
      q = e * q + 0.5 * step * (e * (drift - intensity) + (drift - next));
      intensity = next;
      tau += step;
    }
    out.queue.push_back(q / m.size_scale());
    out.count.push_back(n / m.size_scale());
  }
  return out;
}

}  // namespace

RescalingReport rescaling_consistency(const LimitImpactSpec& limit, const StrategyProfile& f,
                                      const RescalingConfig& config) {
  if (!limit.queues.affine()) throw std::invalid_argument("rescaling_consistency: queue rates must be affine-difference");
  if (!(config.t > 0.0) || config.queue_points == 0) throw std::invalid_argument("rescaling_consistency: bad grid");

  RescalingReport report;
  report.t = config.t;
  for (std::size_t k = 1; k <= config.queue_points; ++k)
    report.grid.push_back(config.t * static_cast<double>(k) / static_cast<double>(config.queue_points));

  // Limit means. The ODE is linear for affine D and E[Y] = F, so the noise-free path gives E[q] exactly.
  const auto steps = static_cast<std::size_t>(std::ceil(config.t / limit.h - 1e-9));
  auto cells = make_cells(limit.rough, limit.h, steps);
  auto skeleton = simulate_Y(cells, std::vector<double>(steps, 0.0));
  auto ode = solve_queue_ode(limit.queues, skeleton, StrategyProfile{}, limit.q0, 0.0);
  for (double s : report.grid) {
    report.queue_limit.push_back(interpolate(ode.q, limit.h, s));
    report.count_limit.push_back(boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double u) { return rough_kernel_primitive(limit.rough, u); }, 0.0, s, 10, 1e-12));
  }
  report.limit_impact = limit_market_impact(limit, f, config.t, config.limit_paths,
                                            derive_seed(config.seed, {0}), config.workers);

  for (std::size_t level = 0; level < config.ladder.size(); ++level) {
    RescalingLevel out;
    out.map = rescaling_map(limit.rough, config.ladder[level], config.normalization);
    const auto& m = out.map;
    const double scale = m.size_scale();
    const auto q0 = std::lround(limit.q0 * scale);
    const std::uint64_t level_seed = derive_seed(config.seed, {1, level});

    BookConfig book;
    book.queues = m.queues(limit.queues);
    book.market = m.market();
    book.q0_ask = q0;
    book.q0_bid = q0;
    book.horizon = config.t * m.T;
    book.record_stream = false;
    struct Sample {
      std::vector<double> q, n;
    };
    auto samples = parallel_map<Sample>(config.queue_paths, config.workers, [&](std::size_t p) {
      const auto path = simulate_book(book, derive_seed(level_seed, {p}));
      Sample s;
      std::size_t seen = 0;
      for (double g : report.grid) {
        const double tau = g * m.T;
        s.q.push_back(static_cast<double>(path.ask.queue.value_at(tau)) / scale);
        while (seen < path.ask.market.size() && path.ask.market[seen] <= tau) ++seen;
        s.n.push_back(static_cast<double>(seen) / scale);
      }
      return s;
    });
    for (std::size_t k = 0; k < report.grid.size(); ++k) {
      RunningStats q, n;
      for (const auto& s : samples) {
        q.add(s.q[k]);
        n.add(s.n[k]);
      }
      out.queue_mean.push_back(q.mean());
      out.queue_stderr.push_back(q.stderr_mean());
      out.count_mean.push_back(n.mean());
      out.count_stderr.push_back(n.stderr_mean());
      out.queue_sup_distance = std::max(out.queue_sup_distance, std::abs(q.mean() - report.queue_limit[k]));
      out.count_sup_distance = std::max(out.count_sup_distance, std::abs(n.mean() - report.count_limit[k]));
    }

    const auto exact = exact_micro_means(m, *limit.queues.affine(), static_cast<double>(q0), report.grid,
                                         config.renewal_dt);
    out.queue_exact = exact.queue;
    out.count_exact = exact.count;
    for (std::size_t k = 0; k < report.grid.size(); ++k) {
      out.exact_queue_distance = std::max(out.exact_queue_distance, std::abs(exact.queue[k] - report.queue_limit[k]));
      out.exact_count_distance = std::max(out.exact_count_distance, std::abs(exact.count[k] - report.count_limit[k]));
    }

    if (config.micro.n_histories == 0) {
      report.levels.push_back(std::move(out));
      continue;
    }
    ImpactModel model;
    model.queues = book.queues;
    model.kappa = m.kappa(limit.kappa);
    model.market = book.market;
    model.q0_ask = q0;
    model.q0_bid = q0;
    ImpactConfig ic = config.micro;
    ic.seed = derive_seed(level_seed, {stream::continuation});
    ic.workers = config.workers;
    ic.mixing_window = std::max(ic.mixing_window, static_cast<long>(std::ceil(4.0 * scale)) + std::abs(q0));
    auto e = market_impact_at(model, MetaorderSchedule{m.metaorder(f), {}}, config.t * m.T, ic);
    e.t = config.t;
    e.value /= scale;
    e.stderr_value /= scale;
    e.doubled /= scale;
    e.tail_bound /= scale;
    out.impact = std::move(e);
    report.levels.push_back(std::move(out));
  }
  return report;
}

}  // namespace lobimpact
