#include "lobimpact/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lobimpact {

std::string_view to_string(Process p) noexcept {
  switch (p) {
    case Process::market: return "market";
    case Process::limit: return "limit";
    case Process::cancel: return "cancel";
    case Process::metaorder: return "metaorder";
  }
  return "?";
}

std::string_view to_string(Side s) noexcept { return s == Side::ask ? "ask" : "bid"; }

Baseline Baseline::constant(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("Baseline::constant: mu must be finite and >= 0");
  Baseline b;
  b.kind_ = Kind::constant;
  b.mu_ = mu;
  return b;
}

Baseline Baseline::decaying(double amplitude, double rate) {
  if (!(amplitude >= 0.0) || !(rate > 0.0)) throw std::invalid_argument("Baseline::decaying: need amplitude >= 0, rate > 0");
  Baseline b;
  b.kind_ = Kind::decaying;
  b.amplitude_ = amplitude;
  b.decay_ = rate;
  return b;
}

Baseline Baseline::piecewise(std::vector<double> breaks, std::vector<double> values) {
  if (breaks.empty() || breaks.size() != values.size()) throw std::invalid_argument("Baseline::piecewise: breaks/values size mismatch");
  if (breaks.front() != 0.0) throw std::invalid_argument("Baseline::piecewise: first break must be 0");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1])) throw std::invalid_argument("Baseline::piecewise: breaks must increase");
  for (double v : values)
    if (!(v >= 0.0)) throw std::invalid_argument("Baseline::piecewise: values must be >= 0");
  Baseline b;
  b.kind_ = Kind::piecewise;
  b.breaks_ = std::move(breaks);
  b.values_ = std::move(values);
  return b;
}

Baseline Baseline::continuation(const Kernel& kernel, std::span<const double> history, double t) {
  if (const auto* e = kernel.exponential()) {
    double amp = 0.0;
    for (double u : history)
      if (u <= t) amp += e->a * std::exp(-e->b * (t - u));
    return decaying(amp, e->b);
  }
  Baseline b;
  b.kind_ = Kind::continuation;
  b.kernel_ = std::make_shared<const Kernel>(kernel);
  for (double u : history)
    if (u <= t) b.ages_.push_back(t - u);
  return b;
}

Baseline Baseline::shifted(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("Baseline::shifted: t must be >= 0");
  Baseline b = *this;
  switch (kind_) {
    case Kind::constant: break;
    case Kind::decaying: b.amplitude_ *= std::exp(-decay_ * t); break;
    case Kind::piecewise: {
      // keep a break at 0 carrying the value in force at t
      b.breaks_ = {0.0};
      b.values_ = {rate(t)};
      for (std::size_t i = 0; i < breaks_.size(); ++i) {
        if (breaks_[i] > t) {
          b.breaks_.push_back(breaks_[i] - t);
          b.values_.push_back(values_[i]);
        }
      }
      break;
    }
    case Kind::continuation:
      for (double& a : b.ages_) a += t;
      break;
  }
  return b;
}

double Baseline::rate(double s) const {
  switch (kind_) {
    case Kind::constant: return mu_;
    case Kind::decaying: return amplitude_ * std::exp(-decay_ * s);
    case Kind::piecewise: {
      auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
      if (it == breaks_.begin()) return 0.0;
      return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
    }
    case Kind::continuation: {
      double sum = 0.0;
      for (double a : ages_) sum += (*kernel_)(s + a);
      return sum;
    }
  }
  return 0.0;
}

double Baseline::sup(double s0, double s1) const {
  switch (kind_) {
    case Kind::constant: return mu_;
    case Kind::decaying: return rate(s0);
    case Kind::piecewise: {
      double m = rate(s0);
      for (std::size_t i = 0; i < breaks_.size(); ++i)
        if (breaks_[i] > s0 && breaks_[i] <= s1) m = std::max(m, values_[i]);
      return m;
    }
    case Kind::continuation: {
      double sum = 0.0;
      for (double a : ages_) sum += kernel_->envelope(s0 + a);
      return sum;
    }
  }
  return 0.0;
}

double Baseline::integral(double s0, double s1) const {
  if (s1 <= s0) return 0.0;
  switch (kind_) {
    case Kind::constant: return mu_ * (s1 - s0);
    case Kind::decaying: return amplitude_ / decay_ * (std::exp(-decay_ * s0) - std::exp(-decay_ * s1));
    case Kind::piecewise: {
      double total = 0.0;
      for (std::size_t i = 0; i < breaks_.size(); ++i) {
        double lo = std::max(s0, breaks_[i]);
        double hi = i + 1 < breaks_.size() ? std::min(s1, breaks_[i + 1]) : s1;
        if (hi > lo) total += values_[i] * (hi - lo);
      }
      return total;
    }
    case Kind::continuation: {
      double total = 0.0;
      for (double a : ages_) total += kernel_->cumulative(s1 + a) - kernel_->cumulative(s0 + a);
      return total;
    }
  }
  return 0.0;
}

double Baseline::tail_mass(double s) const {
  switch (kind_) {
    case Kind::constant: return mu_ > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    case Kind::decaying: return amplitude_ / decay_ * std::exp(-decay_ * s);
    case Kind::piecewise:
      if (values_.back() > 0.0) return std::numeric_limits<double>::infinity();
      return integral(s, breaks_.back());
    case Kind::continuation: {
      double total = 0.0;
      for (double a : ages_) total += kernel_->tail(s + a);
      return total;
    }
  }
  return 0.0;
}

HawkesSampler::HawkesSampler(HawkesParams params, double horizon, std::uint64_t seed, double tick, std::size_t event_cap)
    : params_(std::move(params)), horizon_(horizon), tick_(tick), cap_(event_cap), rng_(seed) {
  if (!(horizon >= 0.0)) throw std::invalid_argument("HawkesSampler: horizon must be >= 0");
  if (!(tick > 0.0)) throw std::invalid_argument("HawkesSampler: tick must be positive");
  if (const auto* e = params_.kernel.exponential()) exp_ = *e;
}

double HawkesSampler::excitation(double s) const {
  if (exp_) return markov_level_ * std::exp(-exp_->b * (s - markov_time_));
  double sum = 0.0;
  for (double u : events_) sum += params_.kernel(s - u);
  return sum;
}

double HawkesSampler::excitation_bound(double s) const {
  if (exp_) return excitation(s);
  double sum = 0.0;
  for (double u : events_) sum += params_.kernel.envelope(s - u);
  return sum;
}

double HawkesSampler::intensity(double s) const { return params_.baseline.rate(s) + excitation(s); }

double HawkesSampler::expected_remaining(double s) const {
  double direct = params_.baseline.tail_mass(s);
  if (exp_) {
    direct += excitation(s) / exp_->b;
  } else {
    for (double u : events_) direct += params_.kernel.tail(s - u);
  }
  return direct * (1.0 + psi_l1_exact(params_.kernel));
}

double HawkesSampler::next() {
  for (;;) {
    if (now_ >= horizon_) return std::numeric_limits<double>::infinity();
    double window_end = std::min((std::floor(now_ / tick_) + 1.0) * tick_, horizon_);
    double bound = params_.baseline.sup(now_, window_end) + excitation_bound(now_);
    if (!(bound > 0.0)) {
      now_ = window_end;
      continue;
    }
    double candidate = now_ + rng_.exponential(bound);
    if (candidate >= window_end) {
      now_ = window_end;
      continue;
    }
    now_ = candidate;
    double lambda = intensity(now_);
    if (rng_.uniform() * bound <= lambda) {
      if (events_.size() >= cap_)
        throw HawkesExplosion("Hawkes simulation exceeded the event cap of " + std::to_string(cap_) + " events");
      if (exp_) {
        markov_level_ = excitation(now_) + exp_->a;
        markov_time_ = now_;
      }
      events_.push_back(now_);
      return now_;
    }
  }
}

std::vector<double> simulate_hawkes(const HawkesParams& params, double horizon, std::uint64_t seed, std::size_t event_cap) {
  HawkesSampler sampler(params, horizon, seed, 1.0, event_cap);
  while (std::isfinite(sampler.next())) {
  }
  return sampler.history();
}

double hawkes_compensator(const HawkesParams& params, std::span<const double> events, double s) {
  double total = params.baseline.integral(0.0, s);
  for (double u : events) {
    if (u >= s) break;
    total += params.kernel.cumulative(s - u);
  }
  return total;
}

std::vector<double> time_rescaled_gaps(const HawkesParams& params, std::span<const double> events) {
  std::vector<double> gaps;
  gaps.reserve(events.size());
  if (const auto* e = params.kernel.exponential()) {
    // Markov recursion: between events the excitation integrates to level/b * (1 - exp(-b dt)).
    double level = 0.0;
    double prev = 0.0;
    for (double u : events) {
      double dt = u - prev;
      double base = params.baseline.integral(prev, u);
      gaps.push_back(base - level / e->b * std::expm1(-e->b * dt));
      level = level * std::exp(-e->b * dt) + e->a;
      prev = u;
    }
    return gaps;
  }
  double prev = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    double cur = hawkes_compensator(params, events.first(i), events[i]);
    gaps.push_back(cur - prev);
    prev = hawkes_compensator(params, events.first(i + 1), events[i]);
  }
  return gaps;
}

HawkesMoments hawkes_moments(const Baseline& baseline, const PropagatorTable& psi, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("hawkes_moments: t must be positive");
  if (t > psi.horizon() + 1e-12) throw std::invalid_argument("hawkes_moments: t exceeds the propagator horizon");
  const auto n = static_cast<std::size_t>(std::ceil(t / psi.dt - 1e-9));
  const double h = t / static_cast<double>(n);

  std::vector<double> grid(n + 1), mu(n + 1), ps(n + 1), psi_int(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    grid[i] = h * static_cast<double>(i);
    mu[i] = baseline.rate(grid[i]);
    ps[i] = psi(grid[i]);
    psi_int[i] = psi.integral(grid[i]);
  }

  // m1[i] = E[lambda_{s_i}], trapezoid in the convolution variable.
  std::vector<double> m1(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    double conv = 0.0;
    if (i > 0) {
      conv = 0.5 * (ps[i] * mu[0] + ps[0] * mu[i]);
      for (std::size_t j = 1; j < i; ++j) conv += ps[i - j] * mu[j];
      conv *= h;
    }
    m1[i] = mu[i] + conv;
  }
  std::vector<double> count(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) count[i] = count[i - 1] + 0.5 * h * (m1[i - 1] + m1[i]);

  auto trap = [&](auto&& f) {
    double s = 0.5 * (f(0) + f(n));
    for (std::size_t j = 1; j < n; ++j) s += f(j);
    return s * h;
  };

  HawkesMoments m;
  m.mean_intensity = m1[n];
  m.mean_count = count[n];
  m.second_intensity = m1[n] * m1[n] + trap([&](std::size_t j) { return ps[n - j] * ps[n - j] * m1[j]; });
  m.second_compensator =
      count[n] * count[n] + 2.0 * trap([&](std::size_t j) { return ps[n - j] * psi_int[n - j] * count[j]; });
  return m;
}

double hawkes_mean_intensity(const Baseline& baseline, const PropagatorTable& psi, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("hawkes_mean_intensity: t must be positive");
  if (t > psi.horizon() + 1e-12) throw std::invalid_argument("hawkes_mean_intensity: t exceeds the propagator horizon");
  // Same grid and rule as hawkes_moments, last node only.
  const auto n = static_cast<std::size_t>(std::ceil(t / psi.dt - 1e-9));
  const double h = t / static_cast<double>(n);
  double conv = 0.5 * (psi(t) * baseline.rate(0.0) + psi(0.0) * baseline.rate(t));
  for (std::size_t j = 1; j < n; ++j) {
    const double s = h * static_cast<double>(j);
    conv += psi(t - s) * baseline.rate(s);
  }
  return baseline.rate(t) + h * conv;
}

double hawkes_mean_count(const Baseline& baseline, const PropagatorTable& psi, double t) {
  return hawkes_moments(baseline, psi, t).mean_count;
}

}  // namespace lobimpact
