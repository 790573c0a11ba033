#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "lobimpact/impact.hpp"
#include "lobimpact/orderbook.hpp"

namespace lobimpact {

struct RoughVolParams {
  double alpha = 0.6;
  double lambda = 1.0;
  double mu_star = 1.0;
};

void validate(const RoughVolParams& p);

// f(t) = lambda t^{alpha-1} E_{alpha,alpha}(-lambda t^alpha) and its primitive F(t) = 1 - E_alpha(-lambda t^alpha).
[[nodiscard]] double rough_kernel(const RoughVolParams& p, double t);
[[nodiscard]] double rough_kernel_primitive(const RoughVolParams& p, double t);

class GridTooCoarse : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// F at the nodes m h and the exact cell averages K_m = (F((m+1)h) - F(m h)) / h.
class KernelCells {
 public:
  KernelCells(const RoughVolParams& p, double h, std::size_t n_cells);
  [[nodiscard]] double h() const noexcept { return h_; }
  [[nodiscard]] std::size_t size() const noexcept { return cells_.size(); }
  [[nodiscard]] double cell(std::size_t m) const { return cells_.at(m); }
  [[nodiscard]] double primitive(std::size_t n) const { return nodes_.at(n); }
  [[nodiscard]] const RoughVolParams& params() const noexcept { return params_; }
  [[nodiscard]] const std::vector<double>& cells() const noexcept { return cells_; }

 private:
  RoughVolParams params_;
  double h_;
  std::vector<double> nodes_;
  std::vector<double> cells_;
};

// Y on the uniform grid t_n = n h. Values are the raw scheme output
//   Y_n = F(t_n) + (mu* lambda)^{-1/2} sum_{j<n} K_{n-1-j} sqrt(max(Y_j, 0)) dB_j,
// so they can dip below zero; only the square root sees the truncation.
struct RoughVolPath {
  std::shared_ptr<const KernelCells> cells;
  std::vector<double> y;   // n + 1 nodes
  std::vector<double> dB;  // n increments, variance h
  [[nodiscard]] double h() const noexcept { return cells->h(); }
  [[nodiscard]] std::size_t steps() const noexcept { return dB.size(); }
  [[nodiscard]] double horizon() const noexcept { return h() * static_cast<double>(steps()); }
  [[nodiscard]] double at(double t) const;  // piecewise linear
  [[nodiscard]] double negative_fraction() const;
};

// Cells for a grid of `steps` steps plus `extra` cells for forward curves past the horizon.
[[nodiscard]] std::shared_ptr<const KernelCells> make_cells(const RoughVolParams& p, double h, std::size_t steps,
                                                            std::size_t extra = 0);
[[nodiscard]] RoughVolPath simulate_Y(std::shared_ptr<const KernelCells> cells, std::size_t steps, std::uint64_t seed);
[[nodiscard]] RoughVolPath simulate_Y(std::shared_ptr<const KernelCells> cells, std::vector<double> dB);
[[nodiscard]] RoughVolPath simulate_Y(const RoughVolParams& p, double h, double horizon, std::uint64_t seed);

// E[Y_s | F_t] under the discrete scheme. t is floored to the grid; s >= t may lie
// anywhere (off-grid and past-horizon values use F differences directly).
[[nodiscard]] double forward_variance(const RoughVolPath& path, double t, double s);
// Same at nodes s = (i + k stride) h for k = 0..count-1, from node i; uses the cell table.
[[nodiscard]] std::vector<double> forward_curve(const RoughVolPath& path, std::size_t i, std::size_t stride,
                                                std::size_t count);

class OdeStepRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LimitQueuePath {
  double h = 0.0;
  double truncation = 0.0;
  std::vector<double> q;     // base, at the Y nodes
  std::vector<double> qbar;  // with the metaorder truncated at `truncation`
};

// RK4 on the Y grid for q' = D(q) - Y and qbar' = D(qbar) - Y + f 1_{s <= truncation},
// Y piecewise linear. Each step is checked against two half steps; a step whose
// error estimate exceeds `tol` is split (up to 64 pieces) before giving up.
[[nodiscard]] LimitQueuePath solve_queue_ode(const QueueModel& queues, const RoughVolPath& y,
                                             const StrategyProfile& f, double q0, double truncation,
                                             double tol = 1e-8);

struct LimitImpactSpec {
  RoughVolParams rough;
  QueueModel queues{AffineDifferenceRates{-1.0, 0.025, 0.5}};
  Kappa kappa{SqrtLogKappa{}};
  double q0 = 0.0;
  double h = 1.0 / 512.0;
  double horizon = 4.0;           // A
  double tail_tolerance = 0.05;   // bound on exp(-c (A - t))
  long reversion_window = 50;     // |q| range used for the mean-reversion constant
};

class TailToleranceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mean-reversion constant c used for the tail check, inf of D(q) - D(q+1).
[[nodiscard]] double limit_mean_reversion(const LimitImpactSpec& spec);

// Realized path value int_0^A (kappa(qbar_s) - kappa(q_s)) Y_s ds (trapezoid on the Y nodes).
[[nodiscard]] double limit_mi_path(const LimitImpactSpec& spec, const RoughVolPath& y, const LimitQueuePath& qp);

// E[MI_t] over n_paths Y paths, one estimate per profile; profiles share the Y paths.
[[nodiscard]] std::vector<ImpactEstimate> limit_market_impact(const LimitImpactSpec& spec,
                                                              std::span<const StrategyProfile> profiles, double t,
                                                              std::size_t n_paths, std::uint64_t seed,
                                                              unsigned workers = 1);
[[nodiscard]] ImpactEstimate limit_market_impact(const LimitImpactSpec& spec, const StrategyProfile& f, double t,
                                                 std::size_t n_paths, std::uint64_t seed, unsigned workers = 1);

// Pathwise MI_t = c_k int_0^t G(s) Y_s ds + c_k int_t^inf G(s) xi_t(s) ds with
// G(s) = int_0^{min(s,t)} exp(c_l (s - u)) f(u) du in closed form. Both integrals use
// the trapezoid on the Y nodes; past the horizon xi_t is taken on a coarse grid
// and the last stretch is closed analytically.
struct LinearMiOptions {
  bool include_tail = true;
  std::size_t tail_stride = 64;  // coarse step in Y cells
  double tail_cutoff = 1e-12;    // stop once exp(c_l (s - t)) G(t) falls below this
};

[[nodiscard]] double linear_limit_mi(const RoughVolPath& path, double t, const StrategyProfile& f, double c_kappa,
                                     double c_lambda, const LinearMiOptions& options = {});

// Same quadrature with kappa(qbar_s) - kappa(q_s) taken from the ODE solutions
// instead of the closed form; past the horizon the last difference is carried
// forward with exp(c (s - A)).
[[nodiscard]] double conditional_limit_mi(const LimitImpactSpec& spec, const RoughVolPath& path,
                                          const LimitQueuePath& qp, double t, const LinearMiOptions& options = {});

// Cells needed past the horizon by linear_limit_mi for these options.
[[nodiscard]] std::size_t tail_cells(double c_lambda, double h, const LinearMiOptions& options = {});

// Post-end increment MI_{t+d} - MI_t for t >= end of f, compared with
//   literal:   I int_t^{t+d} e^{c s} (Y_s - xi_t(s)) ds
//   corrected: c_k I [int_t^{t+d} e^{c s} (Y_s - xi_t(s)) ds + int_{t+d}^inf e^{c s} (xi_{t+d}(s) - xi_t(s)) ds]
// where I = int_0^end e^{-c u} f(u) du, all with the quadrature of linear_limit_mi.
struct IncrementIdentity {
  double increment = 0.0;
  double literal = 0.0;
  double corrected = 0.0;
};

[[nodiscard]] IncrementIdentity post_end_increment(const RoughVolPath& path, double t, double delta,
                                                   const StrategyProfile& f, double c_kappa, double c_lambda,
                                                   const LinearMiOptions& options = {});

// E[MI_t] at h, h/2, h/4, ... with the Brownian increments of the finest level
// summed for the coarser ones. bound[k] = |value[k] - value[k-1]|.
struct RefinementLevel {
  double h = 0.0;
  double value = 0.0;
  double stderr_value = 0.0;
  double bound = 0.0;
  double change_stderr = 0.0;  // stderr of value[k] - value[k-1] over paired paths
};

[[nodiscard]] std::vector<RefinementLevel> limit_mi_refinement(const LimitImpactSpec& spec, const StrategyProfile& f,
                                                               double t, std::size_t n_paths, int levels,
                                                               std::uint64_t seed, unsigned workers = 1);

}  // namespace lobimpact
