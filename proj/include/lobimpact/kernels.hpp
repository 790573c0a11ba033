#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lobimpact {

class UnstableKernel : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// phi(t) = a exp(-b t)
struct ExponentialKernel {
  double a = 0.5;
  double b = 1.0;
};

// phi(t) = norm * alpha * c^alpha / (c + t)^(1 + alpha); integrates to `norm`
// and has tail integral norm * c^alpha * t^-alpha asymptotically.
struct PowerLawKernel {
  double norm = 0.5;
  double alpha = 0.6;
  double cutoff = 1.0;
};

// Piecewise-linear through values[i] at t = i * dt, zero past the last node.
struct TabulatedKernel {
  double dt = 0.01;
  std::vector<double> values;
};

using KernelSpec = std::variant<ExponentialKernel, PowerLawKernel, TabulatedKernel>;

class Kernel {
 public:
  explicit Kernel(KernelSpec spec);

  [[nodiscard]] double operator()(double t) const;
  // Integral of phi over [0, t].
  [[nodiscard]] double cumulative(double t) const;
  // Integral of phi over [t, infinity).
  [[nodiscard]] double tail(double t) const;
  // sup_{s >= t} phi(s); a nonincreasing majorant used for thinning bounds.
  [[nodiscard]] double envelope(double t) const;
  [[nodiscard]] double l1_norm() const noexcept { return l1_; }
  [[nodiscard]] const KernelSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const ExponentialKernel* exponential() const noexcept { return std::get_if<ExponentialKernel>(&spec_); }
  // Same shape scaled by `factor`.
  [[nodiscard]] Kernel scaled(double factor) const;

 private:
  KernelSpec spec_;
  double l1_ = 0.0;
  std::vector<double> cumulative_nodes_;
  std::vector<double> suffix_max_;
};

// psi = sum_k phi^{*k} on a uniform grid, from the renewal equation psi = phi + phi * psi.
struct PropagatorTable {
  double dt = 0.0;
  std::vector<double> psi;         // psi at t = i * dt
  std::vector<double> psi_cumul;   // integral of psi over [0, i * dt]
  double phi_l1 = 0.0;
  double psi_l1 = 0.0;             // on the truncated horizon
  double residual = 0.0;           // sup-norm of psi - phi - phi * psi on the grid
  std::vector<std::string> warnings;

  [[nodiscard]] double horizon() const noexcept { return dt * static_cast<double>(psi.size() - 1); }
  // Linear interpolation; zero outside [0, horizon].
  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] double integral(double t) const;
};

// Trapezoid discretisation of the renewal equation. Throws UnstableKernel when ||phi|| >= 1.
[[nodiscard]] PropagatorTable solve_psi(const Kernel& kernel, double dt, double horizon);

// xi(t) = 1 + (1 + ||psi||) * int_t^infinity phi.
[[nodiscard]] double xi_of(const Kernel& kernel, double psi_l1, double t);

// ||psi|| = ||phi|| / (1 - ||phi||) for a stable kernel.
[[nodiscard]] double psi_l1_exact(const Kernel& kernel);

}  // namespace lobimpact
