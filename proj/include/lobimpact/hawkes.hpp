#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "lobimpact/kernels.hpp"
#include "lobimpact/rng.hpp"

namespace lobimpact {

enum class Process : std::uint8_t { market, limit, cancel, metaorder };
enum class Side : std::uint8_t { ask, bid };

[[nodiscard]] std::string_view to_string(Process p) noexcept;
[[nodiscard]] std::string_view to_string(Side s) noexcept;

struct Event {
  double time = 0.0;
  Process process = Process::market;
  Side side = Side::ask;
};

// Time-ordered stream of book events on [0, horizon].
struct EventStream {
  std::vector<Event> events;
  double horizon = 0.0;
};

class HawkesExplosion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultEventCap = 10'000'000;

// Exogenous intensity mu_s of a Hawkes process.
class Baseline {
 public:
  static Baseline constant(double mu);
  // amplitude * exp(-rate * s)
  static Baseline decaying(double amplitude, double rate);
  // values[i] on [breaks[i], breaks[i+1]); the last value holds on [breaks.back(), inf).
  static Baseline piecewise(std::vector<double> breaks, std::vector<double> values);
  // mu_hat_s = sum_{u <= t} phi(t + s - u): the excitation a history on [0, t] leaves after t.
  static Baseline continuation(const Kernel& kernel, std::span<const double> history, double t);

  // s -> rate(s + t)
  [[nodiscard]] Baseline shifted(double t) const;

  [[nodiscard]] double rate(double s) const;
  // Upper bound of rate on [s0, s1].
  [[nodiscard]] double sup(double s0, double s1) const;
  [[nodiscard]] double integral(double s0, double s1) const;
  // Integral over [s, infinity); infinite unless the baseline is integrable.
  [[nodiscard]] double tail_mass(double s) const;
  [[nodiscard]] bool is_constant() const noexcept { return kind_ == Kind::constant; }
  [[nodiscard]] double constant_rate() const noexcept { return mu_; }

 private:
  enum class Kind { constant, decaying, piecewise, continuation };
  Kind kind_ = Kind::constant;
  double mu_ = 0.0;
  double amplitude_ = 0.0;
  double decay_ = 0.0;
  std::vector<double> breaks_;
  std::vector<double> values_;
  std::shared_ptr<const Kernel> kernel_;
  std::vector<double> ages_;
};

struct HawkesParams {
  Baseline baseline = Baseline::constant(1.0);
  Kernel kernel{ExponentialKernel{}};
};

// Ogata thinning with a piecewise-constant dominating rate refreshed at every
// event and every `tick` time units (ticks aligned to multiples of `tick`, so
// the path on [0, h] does not depend on the horizon when h < horizon).
// Exponential kernels keep a Markov excitation state; other kernels sum over history.
class HawkesSampler {
 public:
  HawkesSampler(HawkesParams params, double horizon, std::uint64_t seed, double tick = 1.0,
                std::size_t event_cap = kDefaultEventCap);

  // Next event time, or +infinity once the horizon is reached.
  double next();
  // Excitation-plus-baseline intensity at s (left limit), for s >= last event.
  [[nodiscard]] double intensity(double s) const;
  // Expected number of events after s (integrable baselines only).
  [[nodiscard]] double expected_remaining(double s) const;
  [[nodiscard]] const std::vector<double>& history() const noexcept { return events_; }

 private:
  [[nodiscard]] double excitation(double s) const;
  [[nodiscard]] double excitation_bound(double s) const;

  HawkesParams params_;
  double horizon_;
  double tick_;
  std::size_t cap_;
  Rng rng_;
  double now_ = 0.0;
  std::optional<ExponentialKernel> exp_;
  double markov_level_ = 0.0;  // excitation at markov_time_
  double markov_time_ = 0.0;
  std::vector<double> events_;
};

[[nodiscard]] std::vector<double> simulate_hawkes(const HawkesParams& params, double horizon, std::uint64_t seed,
                                                  std::size_t event_cap = kDefaultEventCap);

// Compensator Lambda(s) = int_0^s mu + sum_{u_i < s} Phi(s - u_i).
[[nodiscard]] double hawkes_compensator(const HawkesParams& params, std::span<const double> events, double s);
// Compensator increments between consecutive events; i.i.d. Exp(1) under the model.
[[nodiscard]] std::vector<double> time_rescaled_gaps(const HawkesParams& params, std::span<const double> events);

// Moment oracles from the propagator psi:
//   E[lambda_t]   = mu_t + int_0^t psi(t-s) mu_s ds
//   E[N_t]        = int_0^t mu + int_0^t psi(t-s) int_0^s mu du ds
//   E[lambda_t^2] = E[lambda_t]^2 + int_0^t psi(t-s)^2 E[lambda_s] ds
//   E[Lambda_t^2] = E[N_t]^2 + int int psi(t-u) psi(t-v) E[N_{u ^ v}] du dv
struct HawkesMoments {
  double mean_intensity = 0.0;
  double mean_count = 0.0;
  double second_intensity = 0.0;
  double second_compensator = 0.0;
};
[[nodiscard]] HawkesMoments hawkes_moments(const Baseline& baseline, const PropagatorTable& psi, double t);
[[nodiscard]] double hawkes_mean_intensity(const Baseline& baseline, const PropagatorTable& psi, double t);
[[nodiscard]] double hawkes_mean_count(const Baseline& baseline, const PropagatorTable& psi, double t);

}  // namespace lobimpact
