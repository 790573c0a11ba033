#include "lobimpact/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace lobimpact {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const KernelSpec& spec) {
  std::visit(overloaded{
                 [](const ExponentialKernel& k) {
                   if (!(k.a >= 0.0) || !(k.b > 0.0)) throw std::invalid_argument("exponential kernel: need a >= 0, b > 0");
                 },
                 [](const PowerLawKernel& k) {
                   if (!(k.norm >= 0.0)) throw std::invalid_argument("power-law kernel: normalization must be >= 0");
                   if (!(k.alpha > 0.0 && k.alpha < 1.0)) throw std::invalid_argument("power-law kernel: alpha must lie in (0, 1)");
                   if (!(k.cutoff > 0.0)) throw std::invalid_argument("power-law kernel: cutoff must be positive");
                 },
                 [](const TabulatedKernel& k) {
                   if (!(k.dt > 0.0)) throw std::invalid_argument("tabulated kernel: dt must be positive");
                   if (k.values.size() < 2) throw std::invalid_argument("tabulated kernel: need at least two nodes");
                   for (double v : k.values)
                     if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("tabulated kernel: values must be finite and >= 0");
                 },
             },
             spec);
}

}  // namespace

Kernel::Kernel(KernelSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  if (auto* e = std::get_if<ExponentialKernel>(&spec_)) {
    l1_ = e->a / e->b;
  } else if (auto* p = std::get_if<PowerLawKernel>(&spec_)) {
    l1_ = p->norm;
  } else {
    const auto& t = std::get<TabulatedKernel>(spec_);
    const std::size_t n = t.values.size();
    cumulative_nodes_.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
      cumulative_nodes_[i] = cumulative_nodes_[i - 1] + 0.5 * t.dt * (t.values[i - 1] + t.values[i]);
    l1_ = cumulative_nodes_.back();
    suffix_max_.assign(n, 0.0);
    suffix_max_[n - 1] = t.values[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) suffix_max_[i] = std::max(suffix_max_[i + 1], t.values[i]);
  }
}

double Kernel::operator()(double t) const {
  if (t < 0.0) return 0.0;
  return std::visit(overloaded{
                        [t](const ExponentialKernel& k) { return k.a * std::exp(-k.b * t); },
                        [t](const PowerLawKernel& k) {
                          return k.norm * k.alpha * std::pow(k.cutoff, k.alpha) / std::pow(k.cutoff + t, 1.0 + k.alpha);
                        },
                        [t](const TabulatedKernel& k) {
                          double x = t / k.dt;
                          auto i = static_cast<std::size_t>(x);
                          if (i + 1 >= k.values.size()) return i + 1 == k.values.size() && x == static_cast<double>(i) ? k.values[i] : 0.0;
                          double w = x - static_cast<double>(i);
                          return (1.0 - w) * k.values[i] + w * k.values[i + 1];
                        },
                    },
                    spec_);
}

double Kernel::cumulative(double t) const {
  if (t <= 0.0) return 0.0;
  return std::visit(overloaded{
                        [t](const ExponentialKernel& k) { return -k.a / k.b * std::expm1(-k.b * t); },
                        [t](const PowerLawKernel& k) { return -k.norm * std::expm1(k.alpha * std::log(k.cutoff / (k.cutoff + t))); },
                        [this, t](const TabulatedKernel& k) {
                          double x = t / k.dt;
                          auto i = static_cast<std::size_t>(x);
                          if (i + 1 >= k.values.size()) return l1_;
                          double w = x - static_cast<double>(i);
                          double v = (1.0 - w) * k.values[i] + w * k.values[i + 1];
                          return cumulative_nodes_[i] + 0.5 * w * k.dt * (k.values[i] + v);
                        },
                    },
                    spec_);
}

double Kernel::tail(double t) const {
  if (t <= 0.0) return l1_;
  return std::visit(overloaded{
                        [t](const ExponentialKernel& k) { return k.a / k.b * std::exp(-k.b * t); },
                        [t](const PowerLawKernel& k) { return k.norm * std::pow(k.cutoff / (k.cutoff + t), k.alpha); },
                        [this, t](const TabulatedKernel&) { return std::max(l1_ - cumulative(t), 0.0); },
                    },
                    spec_);
}

double Kernel::envelope(double t) const {
  if (const auto* k = std::get_if<TabulatedKernel>(&spec_)) {
    double x = std::max(t, 0.0) / k->dt;
    auto i = static_cast<std::size_t>(x);
    if (i + 1 >= k->values.size()) return (*this)(t);
    return std::max((*this)(t), suffix_max_[i + 1]);
  }
  return (*this)(std::max(t, 0.0));
}

Kernel Kernel::scaled(double factor) const {
  if (!(factor >= 0.0)) throw std::invalid_argument("Kernel::scaled: factor must be >= 0");
  return Kernel(std::visit(overloaded{
                               [factor](ExponentialKernel k) -> KernelSpec { k.a *= factor; return k; },
                               [factor](PowerLawKernel k) -> KernelSpec { k.norm *= factor; return k; },
                               [factor](TabulatedKernel k) -> KernelSpec {
                                 for (double& v : k.values) v *= factor;
                                 return k;
                               },
                           },
                           spec_));
}

double PropagatorTable::operator()(double t) const {
  if (t < 0.0 || psi.empty()) return 0.0;
  double x = t / dt;
  auto i = static_cast<std::size_t>(x);
  if (i + 1 >= psi.size()) return i + 1 == psi.size() ? psi.back() : 0.0;
  double w = x - static_cast<double>(i);
  return (1.0 - w) * psi[i] + w * psi[i + 1];
}

double PropagatorTable::integral(double t) const {
  if (t <= 0.0 || psi.empty()) return 0.0;
  double x = t / dt;
  auto i = static_cast<std::size_t>(x);
  if (i + 1 >= psi.size()) return psi_cumul.back();
  double w = x - static_cast<double>(i);
  double v = (1.0 - w) * psi[i] + w * psi[i + 1];
  return psi_cumul[i] + 0.5 * w * dt * (psi[i] + v);
}

PropagatorTable solve_psi(const Kernel& kernel, double dt, double horizon) {
  if (!(dt > 0.0) || !(horizon > dt)) throw std::invalid_argument("solve_psi: need 0 < dt < horizon");
  if (kernel.l1_norm() >= 1.0)
    throw UnstableKernel("solve_psi: ||phi|| = " + std::to_string(kernel.l1_norm()) + " >= 1 violates the stability condition");

  const auto n = static_cast<std::size_t>(std::ceil(horizon / dt)) + 1;
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) phi[i] = kernel(static_cast<double>(i) * dt);

  PropagatorTable table;
  table.dt = dt;
  table.phi_l1 = kernel.l1_norm();
  table.psi.assign(n, 0.0);
  table.psi[0] = phi[0];
  const double diag = 1.0 - 0.5 * dt * phi[0];
  if (diag <= 0.0) throw std::invalid_argument("solve_psi: dt too coarse for phi(0)");
  for (std::size_t m = 1; m < n; ++m) {
    double acc = 0.5 * phi[m] * table.psi[0];
    for (std::size_t j = 1; j < m; ++j) acc += phi[m - j] * table.psi[j];
    table.psi[m] = (phi[m] + dt * acc) / diag;
  }

  double residual = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    double conv = 0.5 * (phi[m] * table.psi[0] + phi[0] * table.psi[m]);
    for (std::size_t j = 1; j < m; ++j) conv += phi[m - j] * table.psi[j];
    residual = std::max(residual, std::abs(table.psi[m] - phi[m] - dt * conv));
  }
  table.residual = residual;

  table.psi_cumul.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    table.psi_cumul[i] = table.psi_cumul[i - 1] + 0.5 * dt * (table.psi[i - 1] + table.psi[i]);
  table.psi_l1 = table.psi_cumul.back();

  if (std::holds_alternative<TabulatedKernel>(kernel.spec()))
    table.warnings.emplace_back("tabulated kernel: tail beyond the last node is taken as zero");
  double exact = psi_l1_exact(kernel);
  if (exact > 0.0 && std::abs(table.psi_l1 - exact) > 0.01 * exact)
    table.warnings.emplace_back("solve_psi: horizon truncates more than 1% of ||psi||; increase the horizon");
  return table;
}

double xi_of(const Kernel& kernel, double psi_l1, double t) {
  return 1.0 + (1.0 + psi_l1) * kernel.tail(t);
}

double psi_l1_exact(const Kernel& kernel) {
  double n = kernel.l1_norm();
  if (n >= 1.0) throw UnstableKernel("psi_l1_exact: ||phi|| >= 1");
  return n / (1.0 - n);
}

}  // namespace lobimpact
