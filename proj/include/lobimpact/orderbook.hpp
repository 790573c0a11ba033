#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lobimpact/hawkes.hpp"
#include "lobimpact/kernels.hpp"
#include "lobimpact/rng.hpp"

namespace lobimpact {

// Limit and cancel rates whose difference is affine, D(q) = d + c q with c < 0:
//   lambda^L(q) = floor + max(d + c q, 0),  lambda^C(q) = floor + max(-(d + c q), 0).
struct AffineDifferenceRates {
  double c_lambda = -1.0;
  double d_lambda = 1.0;
  double floor = 0.5;
};

// Rates at integer queue sizes q_min, q_min + 1, ...; constant extrapolation outside.
struct TabulatedRates {
  long q_min = 0;
  std::vector<double> limit;
  std::vector<double> cancel;
};

struct MixingReport {
  std::vector<double> margin;  // margin[k-1] = inf_q {L(q) - L(q+k) + C(q+k) - C(q)}
  double min_margin = 0.0;
  bool mixing = false;
};

class QueueModel {
 public:
  explicit QueueModel(AffineDifferenceRates rates);
  explicit QueueModel(TabulatedRates rates);

  [[nodiscard]] double limit_rate(long q) const;
  [[nodiscard]] double cancel_rate(long q) const;
  // Drift D(x) = lambda^L - lambda^C extended to real x (used by the scaling limit).
  [[nodiscard]] double difference(double x) const;
  [[nodiscard]] std::optional<AffineDifferenceRates> affine() const;
  // Lower bound of (D(q) - D(q + x)) / x: the mean-reversion constant.
  [[nodiscard]] double mean_reversion(long q_lo, long q_hi) const;
  [[nodiscard]] MixingReport mixing_margin(long q_lo, long q_hi, int k_max) const;
  // Same shape with rates multiplied by `rate_scale` and queue axis stretched by `size_scale`:
  // lambda'(q) = rate_scale * lambda(q / size_scale). Only the affine family is closed under this.
  [[nodiscard]] QueueModel rescaled(double rate_scale, double size_scale) const;

 private:
  std::variant<AffineDifferenceRates, TabulatedRates> rates_;
};

struct ConstantKappa {
  double value = 0.01;
};
// kappa(q) = c q + d
struct AffineKappa {
  double c = -0.01;
  double d = 0.1;
};
// kappa(q) = c1 sqrt(log(exp(-c2 q) + 1))
struct SqrtLogKappa {
  double c1 = 0.01;
  double c2 = 1000.0;
};
// Values at integer q_min, q_min + 1, ...; linear in between, constant outside.
struct TabulatedKappa {
  long q_min = 0;
  std::vector<double> values;
};

using KappaSpec = std::variant<ConstantKappa, AffineKappa, SqrtLogKappa, TabulatedKappa>;

class Kappa {
 public:
  explicit Kappa(KappaSpec spec);
  [[nodiscard]] double operator()(double q) const;
  [[nodiscard]] bool is_constant() const noexcept { return std::holds_alternative<ConstantKappa>(spec_); }
  [[nodiscard]] std::optional<double> affine_slope() const;
  [[nodiscard]] const KappaSpec& spec() const noexcept { return spec_; }
  // kappa'(x) = kappa(x / size_scale)
  [[nodiscard]] Kappa rescaled(double size_scale) const;

 private:
  KappaSpec spec_;
};

// Every violated assumption of the impact theorem on the queue window [q_lo, q_hi].
[[nodiscard]] std::vector<std::string> validate_model(const QueueModel& queues, const Kappa& kappa, const Kernel& kernel,
                                                      long q_lo, long q_hi, int k_max);

// Piecewise-constant rate: rates[i] on [breaks[i], breaks[i+1]), zero outside [breaks.front(), breaks.back()).
class StrategyProfile {
 public:
  StrategyProfile() = default;
  StrategyProfile(std::vector<double> breaks, std::vector<double> rates);
  static StrategyProfile constant(double rate, double start, double end);

  [[nodiscard]] double operator()(double s) const;
  [[nodiscard]] double integral(double a, double b) const;
  [[nodiscard]] double sup(double a, double b) const;
  [[nodiscard]] double start() const noexcept { return breaks_.empty() ? 0.0 : breaks_.front(); }
  [[nodiscard]] double end() const noexcept { return breaks_.empty() ? 0.0 : breaks_.back(); }
  [[nodiscard]] bool is_zero() const noexcept;
  // int_0^{min(s, t)} exp(c (s - u)) f(u) du in closed form.
  [[nodiscard]] double exp_convolution(double c, double s, double t) const;
  [[nodiscard]] StrategyProfile rescaled(double rate_scale, double time_scale) const;
  [[nodiscard]] const std::vector<double>& breaks() const noexcept { return breaks_; }
  [[nodiscard]] const std::vector<double>& rates() const noexcept { return rates_; }

 private:
  std::vector<double> breaks_;
  std::vector<double> rates_;
};

// Metaorder arrivals: Poisson with the profile as intensity, plus deterministic unit orders.
struct MetaorderSchedule {
  StrategyProfile intensity;
  std::vector<double> fixed_times;
};

// Arrival times in [0, truncation]. Arrivals are drawn over the whole profile and
// then cut, so schedules truncated at different times share a prefix.
[[nodiscard]] std::vector<double> sample_metaorder(const MetaorderSchedule& schedule, double truncation, std::uint64_t seed);

struct QueuePath {
  std::vector<double> times;  // values[i] holds on [times[i], times[i+1])
  std::vector<long> values;
  [[nodiscard]] long value_at(double t) const;
};

struct BookSide {
  long q0 = 0;
  std::vector<double> market;  // market order times hitting this side
  std::vector<long> q_before_market;
  QueuePath queue;
  std::uint64_t queue_seed = 0;
};

struct BookConfig {
  QueueModel queues{AffineDifferenceRates{}};
  HawkesParams market;
  long q0_ask = 0;
  long q0_bid = 0;
  double horizon = 10.0;
  bool record_stream = true;
};

struct BookPath {
  BookSide ask;
  BookSide bid;
  EventStream stream;
  double horizon = 0.0;
  std::uint64_t seed = 0;
};

[[nodiscard]] BookPath simulate_book(const BookConfig& config, std::uint64_t seed);

// ---- coupled base / perturbed queue engine ----

enum class CoupledEventType : std::uint8_t {
  market,
  limit_common,
  limit_base,
  limit_meta,
  cancel_common,
  cancel_base,
  cancel_meta,
  metaorder,
  market_base_only,
  market_meta_only,
};

[[nodiscard]] std::string_view to_string(CoupledEventType t) noexcept;

struct ExoEvent {
  double time = 0.0;
  int d_base = 0;
  int d_meta = 0;
  CoupledEventType type = CoupledEventType::market;
};

struct CoupledState {
  double time = 0.0;
  long q_base = 0;
  long q_meta = 0;
};

struct VectorSource {
  std::span<const ExoEvent> events;
  std::size_t next = 0;
  [[nodiscard]] double peek_time() const {
    return next < events.size() ? events[next].time : std::numeric_limits<double>::infinity();
  }
  ExoEvent pop() { return events[next++]; }
};

// Joint Markov jump process of (q_base, q_meta) under synchronized thinning:
// each event type fires at the common rate min(l(q), l(q_meta)) on both
// coordinates and at the residual rate |l(q) - l(q_meta)| on the coordinate
// with the larger rate. Exogenous events (market orders, metaorder arrivals)
// come from `source`. When q_base == q_meta the random draws coincide with a
// single-queue simulation, so the base coordinate reproduces simulate_book.
// `observer(type, before, after)` returns false to stop early.
template <class Source, class Observer>
void evolve_coupled(const QueueModel& queues, Source& source, CoupledState& state, double horizon, Rng& rng,
                    Observer&& observer) {
  for (;;) {
    const double lb = queues.limit_rate(state.q_base);
    const double lm = queues.limit_rate(state.q_meta);
    const double cb = queues.cancel_rate(state.q_base);
    const double cm = queues.cancel_rate(state.q_meta);
    const double l_hi = std::max(lb, lm);
    const double c_hi = std::max(cb, cm);
    const double total = l_hi + c_hi;
    const double next_exo = source.peek_time();
    const double stop = std::min(next_exo, horizon);
    const double candidate = total > 0.0 ? state.time + rng.exponential(total) : std::numeric_limits<double>::infinity();

    const CoupledState before = state;
    CoupledEventType type;
    if (candidate >= stop) {
      if (!(next_exo <= horizon)) {
        state.time = horizon;
        return;
      }
      ExoEvent e = source.pop();
      state.time = e.time;
      state.q_base += e.d_base;
      state.q_meta += e.d_meta;
      type = e.type;
    } else {
      state.time = candidate;
      double u = rng.uniform() * total;
      if (u <= l_hi) {
        if (u <= std::min(lb, lm)) {
          ++state.q_base;
          ++state.q_meta;
          type = CoupledEventType::limit_common;
        } else if (lb > lm) {
          ++state.q_base;
          type = CoupledEventType::limit_base;
        } else {
          ++state.q_meta;
          type = CoupledEventType::limit_meta;
        }
      } else {
        u -= l_hi;
        if (u <= std::min(cb, cm)) {
          --state.q_base;
          --state.q_meta;
          type = CoupledEventType::cancel_common;
        } else if (cb > cm) {
          --state.q_base;
          type = CoupledEventType::cancel_base;
        } else {
          --state.q_meta;
          type = CoupledEventType::cancel_meta;
        }
      }
    }
    if (!observer(type, before, static_cast<const CoupledState&>(state))) return;
  }
}

struct CoupledRecord {
  double time = 0.0;
  long q_base = 0;
  long q_meta = 0;
  CoupledEventType type = CoupledEventType::market;
};

struct CoupledBookPath {
  long q0 = 0;
  double truncation = 0.0;
  std::vector<double> metaorder_times;
  std::vector<CoupledRecord> records;  // state after each event
};

// Re-runs the ask side of `base` jointly with a perturbed queue receiving the
// metaorder's limit orders up to `truncation`, reusing the base path's random streams.
[[nodiscard]] CoupledBookPath overlay_metaorder(const BookPath& base, const QueueModel& queues,
                                                const MetaorderSchedule& schedule, double truncation);

enum class GapJump : std::uint8_t { none, injection, decay };

struct GapAudit {
  std::vector<double> times;
  std::vector<long> gaps;  // q_meta - q_base after each event
  std::vector<GapJump> kinds;
};

struct CouplingAuditError : std::logic_error {
  using std::logic_error::logic_error;
};

// Classifies every change of q_meta - q_base and checks that the gap never goes
// negative and only grows at metaorder arrivals (by one unit each).
[[nodiscard]] GapAudit coupled_difference_jumps(const CoupledBookPath& path);

}  // namespace lobimpact
