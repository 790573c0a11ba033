#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "lobimpact/hawkes.hpp"
#include "lobimpact/orderbook.hpp"

namespace lobimpact {

// P_t = sum_{ask trades u <= t} kappa(q^a_u) xi(t - u) - sum_{bid trades} kappa(q^b_u) xi(t - u)
// + noise_sigma * W_t, sampled every `delta` on [0, horizon].
struct SimplifiedPriceModel {
  QueueModel queues{AffineDifferenceRates{}};
  Kappa kappa{ConstantKappa{0.5}};
  HawkesParams market;
  long q0_ask = 0;
  long q0_bid = 0;
  double horizon = 1000.0;
  double delta = 0.0;        // <= 0: ten mean inter-trade times at stationarity
  double noise_sigma = 0.0;
};

struct Trade {
  double time = 0.0;
  Side side = Side::ask;
  long queue = 0;     // queue on the traded side just before the trade
  double kappa = 0.0;
};

struct SampledPrice {
  double delta = 0.0;
  double horizon = 0.0;
  double xi0 = 1.0;               // xi(0) of the generating kernel
  std::vector<double> prices;     // X_{k delta}, k = 0..floor(horizon / delta)
  std::vector<Trade> trades;      // both sides, time ordered
};

[[nodiscard]] double default_sampling_step(const SimplifiedPriceModel& model);

[[nodiscard]] SampledPrice simulate_simplified_price(const SimplifiedPriceModel& model, std::uint64_t seed);

// Direct evaluation of the propagator sum at t (O(trades)); for tests and small data.
[[nodiscard]] double simplified_price_at(const Kernel& kernel, std::span<const Trade> trades, double t);

// Every m-th sample of sp.
[[nodiscard]] SampledPrice subsample(const SampledPrice& sp, std::size_t m);

[[nodiscard]] double realized_variance(const SampledPrice& sp);
// xi(0)^2 sum over trades of kappa^2 at the trade: the quadratic variation without noise.
[[nodiscard]] double trade_quadratic_variation(const SampledPrice& sp);

class NoTradesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class CollinearityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// (RV / (xi0^2 (N^a + N^b)))^{1/2}
[[nodiscard]] double estimate_kappa_const(const SampledPrice& sp, double xi0);

// Non-overlapping equal-length windows of the sampled grid.
struct WindowStats {
  double length = 0.0;
  double rv = 0.0;
  double trades = 0.0;     // N^a + N^b in the window
  double queue_sum = 0.0;  // sum of queue marks over the window's trades
};

[[nodiscard]] std::vector<WindowStats> window_stats(const SampledPrice& sp, std::size_t windows);

// RV_w ~ slope (N^a + N^b)_w + intercept T_w
struct NoiseFit {
  double slope = 0.0;  // kappa^2 xi0^2
  double intercept = 0.0;  // noise variance rate
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  [[nodiscard]] double kappa(double xi0) const;
};

[[nodiscard]] NoiseFit estimate_kappa_noise(std::span<const WindowStats> windows);

// RV_w ~ a xi0^2 N_w + b xi0^2 sum_w q
struct AffineKappaFit {
  double a = 0.0;
  double b = 0.0;
  double a_stderr = 0.0;
  double b_stderr = 0.0;
};

[[nodiscard]] AffineKappaFit estimate_kappa_affine(std::span<const WindowStats> windows, double xi0);

struct DeltaLadderRow {
  double delta = 0.0;
  double rv = 0.0;
  double kappa = 0.0;
};

// Constant-kappa estimate at delta * m for each multiplier m.
[[nodiscard]] std::vector<DeltaLadderRow> delta_ladder(const SampledPrice& sp, double xi0,
                                                       std::span<const std::size_t> multipliers);

// CSV round trip: prices.csv (t,price) and trades.csv (t,side,queue,kappa).
void write_sampled_price(const SampledPrice& sp, const std::filesystem::path& prices,
                         const std::filesystem::path& trades);
[[nodiscard]] SampledPrice read_sampled_price(const std::filesystem::path& prices, const std::filesystem::path& trades,
                                              double xi0);

}  // namespace lobimpact
