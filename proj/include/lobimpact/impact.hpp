#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lobimpact/hawkes.hpp"
#include "lobimpact/orderbook.hpp"

namespace lobimpact {

// Ask and bid market flows are independent Hawkes processes with the same parameters.
struct ImpactModel {
  QueueModel queues{AffineDifferenceRates{}};
  Kappa kappa{SqrtLogKappa{}};
  HawkesParams market;
  long q0_ask = 0;
  long q0_bid = 0;
};

struct ImpactConfig {
  std::size_t n_histories = 1000;
  std::size_t continuations = 1;  // per history
  // Absolute end of the continuation window; <= 0 picks t + horizon_mixing_times / m.
  double t_max = 0.0;
  double horizon_mixing_times = 50.0;
  // price_at stops a continuation once the queues are coupled and the expected
  // number of history-driven orders still to come is below this.
  double continuation_mass_tol = 1e-3;
  long mixing_window = 200;  // |q| range used for the mixing margin and kappa bounds
  unsigned workers = 1;
  std::uint64_t seed = 0;
};

struct ImpactEstimate {
  double t = 0.0;
  double value = 0.0;
  double stderr_value = 0.0;
  std::size_t n_paths = 0;
  double horizon = 0.0;      // T_max actually used
  double doubled = 0.0;      // same estimate with the window doubled
  double tail_bound = 0.0;   // estimated contribution beyond T_max
  std::size_t unfinished = 0;  // continuations still uncoupled at T_max
  Side side = Side::ask;
  std::vector<std::string> warnings;
};

// E[MI_t] for an ask-side metaorder truncated at t: mean over coupled paths of
// int_0^inf (kappa(qbar_s-) - kappa(q_s-)) dN^a_s. Continuations after t come from
// the lift N = N_t + fresh + continuation-baseline Hawkes and stop at coupling.
[[nodiscard]] ImpactEstimate market_impact_at(const ImpactModel& model, const MetaorderSchedule& schedule, double t,
                                              const ImpactConfig& config);

struct ImpactTrajectory {
  std::vector<ImpactEstimate> points;
  // increments[k] estimates points[k+1] - points[k] with paired histories
  std::vector<ImpactEstimate> increments;
};

// market_impact_at along an increasing grid; every grid point reuses the same
// history, metaorder sample and queue randomness up to its truncation time.
[[nodiscard]] ImpactTrajectory impact_trajectory(const ImpactModel& model, const MetaorderSchedule& schedule,
                                                 std::span<const double> grid, const ImpactConfig& config);

// P_t - P_0 given the observed book on [0, t]: realized kappa-weighted flow plus
// the conditional expectation of the remaining ask-minus-bid flow.
struct PriceEstimate {
  double realized = 0.0;
  ImpactEstimate correction;
  [[nodiscard]] double value() const noexcept { return realized + correction.value; }
};

[[nodiscard]] PriceEstimate price_at(const ImpactModel& model, const BookPath& observed, double t,
                                     const ImpactConfig& config);

// Same quantity as market_impact_at on a fixed window [0, t_max], estimated once
// with coupled paths and once as the difference of independent runs.
struct VarianceComparison {
  double coupled_variance = 0.0;
  double independent_variance = 0.0;
  double coupled_mean = 0.0;
  double independent_mean = 0.0;
  std::size_t n_paths = 0;
  [[nodiscard]] double ratio() const noexcept { return independent_variance / coupled_variance; }
};

[[nodiscard]] VarianceComparison crn_variance_benchmark(const ImpactModel& model, const MetaorderSchedule& schedule,
                                                        double t, double t_max, std::size_t n_paths,
                                                        std::uint64_t seed);

}  // namespace lobimpact
