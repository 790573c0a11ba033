#pragma once

#include <cstdint>
#include <vector>

#include "lobimpact/impact.hpp"
#include "lobimpact/scaling.hpp"

namespace lobimpact {

// How lambda is tied to 1 - a^T. With tail t^alpha int_t^inf phi -> K the rescaled
// renewal kernel converges to f^{alpha, lambda} exactly when 1 - a^T = lambda K Gamma(1 - alpha) T^-alpha
// (laplace). The literal normalization 1 - a^T = lambda K T^-alpha / (1 - alpha) converges
// to f^{alpha, lambda / ((1 - alpha) Gamma(1 - alpha))} instead.
enum class LambdaNormalization : std::uint8_t { laplace, literal };

// Micro model at scale T whose rescaled queues, flows and impact approach the
// limit objects of RoughVolParams: phi^T = a^T phi with phi a unit-mass power law
// (cutoff 1, so K = 1) and mu^T = mu* T^(alpha-1).
struct RescalingMap {
  double T = 0.0;
  RoughVolParams rough;
  double a = 0.0;
  double mu = 0.0;
  double beta = 0.0;  // mu^T / (1 - a^T), long-run trade rate
  LambdaNormalization normalization = LambdaNormalization::laplace;

  [[nodiscard]] double size_scale() const noexcept { return T * beta; }
  [[nodiscard]] HawkesParams market() const;
  [[nodiscard]] QueueModel queues(const QueueModel& limit) const { return limit.rescaled(beta, size_scale()); }
  [[nodiscard]] Kappa kappa(const Kappa& limit) const { return limit.rescaled(size_scale()); }
  [[nodiscard]] StrategyProfile metaorder(const StrategyProfile& f) const { return f.rescaled(beta, T); }
};

// Throws std::invalid_argument when T is too small for a^T to lie in (0, 1).
[[nodiscard]] RescalingMap rescaling_map(const RoughVolParams& p, double T,
                                         LambdaNormalization normalization = LambdaNormalization::laplace);

struct RescalingConfig {
  std::vector<double> ladder{50.0, 200.0, 800.0};
  double t = 1.0;                    // metaorder truncation, limit time units
  std::size_t queue_paths = 400;     // micro books per T for the queue means
  std::size_t queue_points = 16;     // grid on (0, t] for the sup distances
  std::size_t limit_paths = 2000;
  LambdaNormalization normalization = LambdaNormalization::laplace;
  double renewal_dt = 0.05;          // micro time step of the renewal-equation means
  ImpactConfig micro;                // micro impact ensemble; n_histories = 0 skips it
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct RescalingLevel {
  RescalingMap map;
  ImpactEstimate impact;             // E[MI^T_{tT}] / (T beta^T), n_paths = 0 when skipped
  std::vector<double> queue_mean;    // E[q^T_{sT}] / (T beta^T) on the grid
  std::vector<double> queue_stderr;
  std::vector<double> count_mean;    // E[N^T_{sT}] / (T beta^T)
  std::vector<double> count_stderr;
  // Exact micro expectations from the renewal equation (the affine mean ODE for the queue).
  std::vector<double> queue_exact;
  std::vector<double> count_exact;
  double queue_sup_distance = 0.0;   // sup over the grid of |queue_mean - limit|
  double count_sup_distance = 0.0;
  double exact_queue_distance = 0.0; // same for the exact micro expectations
  double exact_count_distance = 0.0;
};

struct RescalingReport {
  double t = 0.0;
  std::vector<double> grid;
  std::vector<double> queue_limit;   // E[q_s], ODE on the noise-free Y path (exact for affine D)
  std::vector<double> count_limit;   // E[X_s] = int_0^s F
  ImpactEstimate limit_impact;
  std::vector<RescalingLevel> levels;
};

// Needs affine-difference queue rates (the only ones QueueModel::rescaled supports).
[[nodiscard]] RescalingReport rescaling_consistency(const LimitImpactSpec& limit, const StrategyProfile& f,
                                                    const RescalingConfig& config);

}  // namespace lobimpact
