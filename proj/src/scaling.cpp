#include "lobimpact/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lobimpact/rng.hpp"
#include "lobimpact/specialfn.hpp"
#include "lobimpact/stats.hpp"

namespace lobimpact {

void validate(const RoughVolParams& p) {
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw std::invalid_argument("RoughVolParams: alpha must lie in (0, 1]");
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) throw std::invalid_argument("RoughVolParams: lambda must be > 0");
  if (!(p.mu_star > 0.0) || !std::isfinite(p.mu_star)) throw std::invalid_argument("RoughVolParams: mu_star must be > 0");
}

double rough_kernel(const RoughVolParams& p, double t) { return specialfn::ml_density(p.alpha, p.lambda, t); }

double rough_kernel_primitive(const RoughVolParams& p, double t) {
  return t <= 0.0 ? 0.0 : specialfn::ml_cdf(p.alpha, p.lambda, t);
}

KernelCells::KernelCells(const RoughVolParams& p, double h, std::size_t n_cells) : params_(p), h_(h) {
  validate(p);
  if (!(h > 0.0)) throw std::invalid_argument("KernelCells: h must be positive");
  if (n_cells == 0) throw std::invalid_argument("KernelCells: need at least one cell");
  const double first = rough_kernel_primitive(p, h);
  if (!(first < 0.5)) {
    std::ostringstream msg;
    msg << "grid too coarse: F(h) = " << first << " >= 0.5 at h = " << h;
    throw GridTooCoarse(msg.str());
  }
  nodes_.resize(n_cells + 1);
  nodes_[0] = 0.0;
  for (std::size_t m = 1; m <= n_cells; ++m) nodes_[m] = rough_kernel_primitive(p, h * static_cast<double>(m));
  cells_.resize(n_cells);
  for (std::size_t m = 0; m < n_cells; ++m) cells_[m] = (nodes_[m + 1] - nodes_[m]) / h;
}

std::shared_ptr<const KernelCells> make_cells(const RoughVolParams& p, double h, std::size_t steps, std::size_t extra) {
  return std::make_shared<const KernelCells>(p, h, steps + extra);
}

double RoughVolPath::at(double t) const {
  if (steps() == 0) return y.front();
  const double x = std::clamp(t / h(), 0.0, static_cast<double>(steps()));
  const auto n = std::min(static_cast<std::size_t>(x), steps() - 1);
  const double w = x - static_cast<double>(n);
  return y[n] + w * (y[n + 1] - y[n]);
}

double RoughVolPath::negative_fraction() const {
  const auto neg = std::count_if(y.begin(), y.end(), [](double v) { return v < 0.0; });
  return static_cast<double>(neg) / static_cast<double>(y.size());
}

namespace {

double noise_scale(const RoughVolParams& p) { return 1.0 / std::sqrt(p.mu_star * p.lambda); }

// x_j = sqrt(max(Y_j, 0)) dB_j
std::vector<double> driving_terms(const RoughVolPath& path, std::size_t upto) {
  std::vector<double> x(upto);
  for (std::size_t j = 0; j < upto; ++j) x[j] = std::sqrt(std::max(path.y[j], 0.0)) * path.dB[j];
  return x;
}

std::size_t node_index(double t, double h, const char* who) {
  const double x = t / h;
  const double r = std::round(x);
  if (!(std::abs(x - r) <= 1e-7 * std::max(1.0, r)) || r < 0.0) {
    std::ostringstream msg;
    msg << who << ": t = " << t << " is not a grid node";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<std::size_t>(r);
}

}  // namespace

RoughVolPath simulate_Y(std::shared_ptr<const KernelCells> cells, std::vector<double> dB) {
  if (!cells) throw std::invalid_argument("simulate_Y: missing kernel cells");
  if (dB.size() > cells->size()) throw std::invalid_argument("simulate_Y: more steps than kernel cells");
  RoughVolPath path;
  path.cells = std::move(cells);
  path.dB = std::move(dB);
  const std::size_t n = path.dB.size();
  const double scale = noise_scale(path.cells->params());
  const double* k = path.cells->cells().data();
  path.y.assign(n + 1, 0.0);
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    x[i - 1] = std::sqrt(std::max(path.y[i - 1], 0.0)) * path.dB[i - 1];
    double conv = 0.0;
    // sum_{j < i} K_{i-1-j} x_j
    const double* kr = k + (i - 1);
    for (std::size_t j = 0; j < i; ++j) conv += kr[-static_cast<std::ptrdiff_t>(j)] * x[j];
    path.y[i] = path.cells->primitive(i) + scale * conv;
  }
  return path;
}

RoughVolPath simulate_Y(std::shared_ptr<const KernelCells> cells, std::size_t steps, std::uint64_t seed) {
  if (!cells) throw std::invalid_argument("simulate_Y: missing kernel cells");
  Rng rng(seed);
  const double sd = std::sqrt(cells->h());
  std::vector<double> dB(steps);
  for (double& b : dB) b = sd * rng.normal();
  return simulate_Y(std::move(cells), std::move(dB));
}

RoughVolPath simulate_Y(const RoughVolParams& p, double h, double horizon, std::uint64_t seed) {
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate_Y: horizon must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / h));
  return simulate_Y(make_cells(p, h, steps), steps, seed);
}

double forward_variance(const RoughVolPath& path, double t, double s) {
  if (!(s >= t)) throw std::domain_error("forward_variance: s must be >= t");
  if (t < 0.0) throw std::domain_error("forward_variance: t must be >= 0");
  const double h = path.h();
  const auto i = std::min(static_cast<std::size_t>(std::floor(t / h + 1e-9)), path.steps());
  const auto& p = path.cells->params();
  const double scale = noise_scale(p);
  const auto x = driving_terms(path, i);

  const double xs = s / h;
  const double rs = std::round(xs);
  if (std::abs(xs - rs) <= 1e-9 * std::max(1.0, rs) && static_cast<std::size_t>(rs) <= path.cells->size()) {
    const auto n = static_cast<std::size_t>(rs);
    double conv = 0.0;
    for (std::size_t j = 0; j < i; ++j) conv += path.cells->cell(n - 1 - j) * x[j];
    return path.cells->primitive(n) + scale * conv;
  }
  double conv = 0.0;
  double upper = rough_kernel_primitive(p, s);
  for (std::size_t j = 0; j < i; ++j) {
    const double lower = rough_kernel_primitive(p, s - h * static_cast<double>(j + 1));
    conv += (upper - lower) / h * x[j];
    upper = lower;
  }
  return rough_kernel_primitive(p, s) + scale * conv;
}

std::vector<double> forward_curve(const RoughVolPath& path, std::size_t i, std::size_t stride, std::size_t count) {
  if (i > path.steps()) throw std::invalid_argument("forward_curve: start node past the path");
  if (stride == 0) throw std::invalid_argument("forward_curve: stride must be positive");
  if (count > 0 && i + (count - 1) * stride > path.cells->size())
    throw std::invalid_argument("forward_curve: not enough kernel cells for the requested nodes");
  const double scale = noise_scale(path.cells->params());
  const auto x = driving_terms(path, i);
  const double* k = path.cells->cells().data();
  std::vector<double> out(count);
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t n = i + c * stride;
    if (n == i) {
      out[c] = path.y[i];
      continue;
    }
    double conv = 0.0;
    const double* kr = k + (n - 1);
    for (std::size_t j = 0; j < i; ++j) conv += kr[-static_cast<std::ptrdiff_t>(j)] * x[j];
    out[c] = path.cells->primitive(n) + scale * conv;
  }
  return out;
}

namespace {

// One scalar ODE y' = D(y) - Y(s) + g on [a, b] with Y linear between (a, ya) and (b, yb).
struct Segment {
  double a, b, ya, yb, g;
  [[nodiscard]] double forcing(double s) const { return -(ya + (yb - ya) * (s - a) / (b - a)) + g; }
};

double rk4(const QueueModel& queues, const Segment& seg, double a, double b, double y) {
  const double H = b - a;
  const double k1 = queues.difference(y) + seg.forcing(a);
  const double k2 = queues.difference(y + 0.5 * H * k1) + seg.forcing(a + 0.5 * H);
  const double k3 = queues.difference(y + 0.5 * H * k2) + seg.forcing(a + 0.5 * H);
  const double k4 = queues.difference(y + H * k3) + seg.forcing(b);
  return y + H / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double checked_step(const QueueModel& queues, const Segment& seg, double a, double b, double y, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double full = rk4(queues, seg, a, b, y);
  const double half = rk4(queues, seg, m, b, rk4(queues, seg, a, m, y));
  if (std::abs(full - half) / 15.0 <= tol) return half;
  if (depth >= 6) {
    std::ostringstream msg;
    msg << "queue ODE: local error " << std::abs(full - half) / 15.0 << " above " << tol << " on [" << a << ", " << b
        << "] after " << depth << " splits";
    throw OdeStepRejected(msg.str());
  }
  return checked_step(queues, seg, m, b, checked_step(queues, seg, a, m, y, tol, depth + 1), tol, depth + 1);
}

// Points where f 1_{s <= truncation} jumps.
std::vector<double> forcing_breaks(const StrategyProfile& f, double truncation) {
  std::vector<double> out = f.breaks();
  out.push_back(truncation);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> solve_one(const QueueModel& queues, const RoughVolPath& y, const StrategyProfile* f,
                              double truncation, double q0, double tol) {
  const double h = y.h();
  const std::size_t n = y.steps();
  std::vector<double> q(n + 1);
  q[0] = q0;
  std::vector<double> breaks;
  if (f) breaks = forcing_breaks(*f, truncation);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = h * static_cast<double>(k);
    const double b = h * static_cast<double>(k + 1);
    double v = q[k];
    if (!f) {
      v = checked_step(queues, Segment{a, b, y.y[k], y.y[k + 1], 0.0}, a, b, v, tol, 0);
    } else {
      double lo = a;
      auto it = std::upper_bound(breaks.begin(), breaks.end(), a);
      for (;;) {
        const double hi = (it != breaks.end() && *it < b) ? *it : b;
        const double mid = 0.5 * (lo + hi);
        const double g = mid <= truncation ? (*f)(mid) : 0.0;
        v = checked_step(queues, Segment{a, b, y.y[k], y.y[k + 1], g}, lo, hi, v, tol, 0);
        if (hi >= b) break;
        lo = hi;
        ++it;
      }
    }
    q[k + 1] = v;
  }
  return q;
}

}  // namespace

LimitQueuePath solve_queue_ode(const QueueModel& queues, const RoughVolPath& y, const StrategyProfile& f, double q0,
                               double truncation, double tol) {
  LimitQueuePath out;
  out.h = y.h();
  out.truncation = truncation;
  out.q = solve_one(queues, y, nullptr, truncation, q0, tol);
  out.qbar = f.is_zero() ? out.q : solve_one(queues, y, &f, truncation, q0, tol);
  return out;
}

double limit_mean_reversion(const LimitImpactSpec& spec) {
  const double c = spec.queues.mean_reversion(-spec.reversion_window, spec.reversion_window);
  if (!(c > 0.0)) throw std::invalid_argument("limit impact: D is not mean reverting on the configured window");
  return c;
}

double limit_mi_path(const LimitImpactSpec& spec, const RoughVolPath& y, const LimitQueuePath& qp) {
  const std::size_t n = y.steps();
  double sum = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    const double dk = spec.kappa(qp.qbar[k]) - spec.kappa(qp.q[k]);
    if (dk != 0.0) sum += w * dk * y.y[k];
  }
  return sum * y.h();
}

std::vector<ImpactEstimate> limit_market_impact(const LimitImpactSpec& spec, std::span<const StrategyProfile> profiles,
                                                double t, std::size_t n_paths, std::uint64_t seed, unsigned workers) {
  if (profiles.empty()) throw std::invalid_argument("limit_market_impact: no profiles");
  if (n_paths < 2) throw std::invalid_argument("limit_market_impact: need at least two paths");
  if (!(t >= 0.0) || !(spec.horizon > t)) throw std::invalid_argument("limit_market_impact: need 0 <= t < horizon");
  const double c = limit_mean_reversion(spec);
  const double tail = std::exp(-c * (spec.horizon - t));
  if (tail > spec.tail_tolerance) {
    std::ostringstream msg;
    msg << "limit_market_impact: tail exp(-c (A - t)) = " << tail << " exceeds tolerance " << spec.tail_tolerance
        << " (c = " << c << ", A = " << spec.horizon << ", t = " << t << ")";
    throw TailToleranceError(msg.str());
  }
  const auto steps = static_cast<std::size_t>(std::llround(spec.horizon / spec.h));
  const auto cells = make_cells(spec.rough, spec.h, steps);
  const std::size_t m = profiles.size();

  struct PathResult {
    std::vector<double> value, tail;
  };
  auto runs = parallel_map<PathResult>(n_paths, workers, [&](std::size_t p) {
    const auto y = simulate_Y(cells, steps, derive_seed(seed, {p, stream::brownian}));
    PathResult r;
    r.value.resize(m);
    r.tail.resize(m);
    const auto base = solve_one(spec.queues, y, nullptr, t, spec.q0, 1e-8);
    for (std::size_t k = 0; k < m; ++k) {
      LimitQueuePath qp;
      qp.h = y.h();
      qp.truncation = t;
      qp.q = base;
      qp.qbar = profiles[k].is_zero() ? base : solve_one(spec.queues, y, &profiles[k], t, spec.q0, 1e-8);
      r.value[k] = limit_mi_path(spec, y, qp);
      const double dk = std::abs(spec.kappa(qp.qbar.back()) - spec.kappa(qp.q.back()));
      r.tail[k] = dk * std::max(y.y.back(), cells->primitive(steps)) / c;
    }
    return r;
  });

  std::vector<ImpactEstimate> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    RunningStats v;
    double tail_sum = 0.0;
    for (const auto& r : runs) {
      v.add(r.value[k]);
      tail_sum += r.tail[k];
    }
    auto& e = out[k];
    e.t = t;
    e.value = v.mean();
    e.stderr_value = v.stderr_mean();
    e.doubled = e.value;
    e.n_paths = v.count();
    e.horizon = spec.horizon;
    e.tail_bound = tail_sum / static_cast<double>(runs.size());
  }
  return out;
}

ImpactEstimate limit_market_impact(const LimitImpactSpec& spec, const StrategyProfile& f, double t, std::size_t n_paths,
                                   std::uint64_t seed, unsigned workers) {
  return limit_market_impact(spec, std::span<const StrategyProfile>(&f, 1), t, n_paths, seed, workers).front();
}

namespace {

// The fixed quadrature behind linear_limit_mi: trapezoid on the Y nodes, then a
// coarse trapezoid on nodes N + k stride past the horizon, then an exponential
// closure beyond the last coarse node. `kernel(s)` is the deterministic weight
// (c_kappa G(s) or the ODE difference), `decay` its exponential rate past the horizon.
struct TailPlan {
  std::size_t stride = 0;
  std::size_t count = 0;  // coarse intervals past the horizon
};

TailPlan plan_tail(const RoughVolPath& path, const LinearMiOptions& options) {
  TailPlan plan;
  if (!options.include_tail) return plan;
  plan.stride = options.tail_stride;
  const std::size_t extra = path.cells->size() - path.steps();
  plan.count = extra / plan.stride;
  if (plan.count == 0)
    throw std::invalid_argument("linear_limit_mi: path has no kernel cells past the horizon; build it with tail_cells()");
  return plan;
}

template <class Weight>
double conditional_quadrature(const RoughVolPath& path, std::size_t i, Weight&& weight, double weight_at_horizon,
                              double decay, const TailPlan& plan) {
  const std::size_t n = path.steps();
  const double h = path.h();
  double sum = 0.0;
  for (std::size_t k = 0; k <= i; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    sum += w * weight(k) * path.y[k];
  }
  if (i < n) {
    const auto xi = forward_curve(path, i, 1, n - i + 1);
    for (std::size_t k = i + 1; k <= n; ++k) {
      const double w = k == n ? 0.5 : 1.0;
      sum += w * weight(k) * xi[k - i];
    }
  }
  sum *= h;
  if (plan.count == 0) return sum;
  // past the horizon the weight is weight_at_horizon * exp(decay (s - A))
  const double H = h * static_cast<double>(plan.stride);
  std::vector<double> tail_xi(plan.count + 1);
  {
    const double scale = 1.0 / std::sqrt(path.cells->params().mu_star * path.cells->params().lambda);
    const auto x = driving_terms(path, i);
    for (std::size_t c = 0; c <= plan.count; ++c) {
      const std::size_t node = n + c * plan.stride;
      if (node == i) {
        tail_xi[c] = path.y[i];
        continue;
      }
      double conv = 0.0;
      for (std::size_t j = 0; j < i; ++j) conv += path.cells->cell(node - 1 - j) * x[j];
      tail_xi[c] = path.cells->primitive(node) + scale * conv;
    }
  }
  double tail = 0.0;
  for (std::size_t c = 0; c <= plan.count; ++c) {
    const double w = (c == 0 || c == plan.count) ? 0.5 : 1.0;
    tail += w * std::exp(decay * H * static_cast<double>(c)) * tail_xi[c];
  }
  tail *= H;
  tail += std::exp(decay * H * static_cast<double>(plan.count)) * tail_xi.back() / (-decay);
  return sum + weight_at_horizon * tail;
}

}  // namespace

std::size_t tail_cells(double c_lambda, double h, const LinearMiOptions& options) {
  if (!(c_lambda < 0.0)) throw std::invalid_argument("tail_cells: c_lambda must be negative");
  if (!options.include_tail) return 0;
  const double length = std::log(1.0 / options.tail_cutoff) / (-c_lambda);
  const auto coarse = static_cast<std::size_t>(std::ceil(length / (h * static_cast<double>(options.tail_stride))));
  return std::max<std::size_t>(coarse, 1) * options.tail_stride;
}

double linear_limit_mi(const RoughVolPath& path, double t, const StrategyProfile& f, double c_kappa, double c_lambda,
                       const LinearMiOptions& options) {
  if (!(c_lambda < 0.0)) throw std::invalid_argument("linear_limit_mi: c_lambda must be negative");
  const std::size_t i = node_index(t, path.h(), "linear_limit_mi");
  if (i > path.steps()) throw std::invalid_argument("linear_limit_mi: t past the path horizon");
  if (f.is_zero()) return 0.0;
  const TailPlan plan = plan_tail(path, options);
  const double h = path.h();
  auto weight = [&](std::size_t k) { return c_kappa * f.exp_convolution(c_lambda, h * static_cast<double>(k), t); };
  return conditional_quadrature(path, i, weight, weight(path.steps()), c_lambda, plan);
}

double conditional_limit_mi(const LimitImpactSpec& spec, const RoughVolPath& path, const LimitQueuePath& qp, double t,
                            const LinearMiOptions& options) {
  const std::size_t i = node_index(t, path.h(), "conditional_limit_mi");
  if (i > path.steps()) throw std::invalid_argument("conditional_limit_mi: t past the path horizon");
  if (qp.q.size() != path.y.size()) throw std::invalid_argument("conditional_limit_mi: queue path does not match Y");
  const TailPlan plan = plan_tail(path, options);
  auto weight = [&](std::size_t k) { return spec.kappa(qp.qbar[k]) - spec.kappa(qp.q[k]); };
  const double decay = -limit_mean_reversion(spec);
  return conditional_quadrature(path, i, weight, weight(path.steps()), decay, plan);
}

IncrementIdentity post_end_increment(const RoughVolPath& path, double t, double delta, const StrategyProfile& f,
                                     double c_kappa, double c_lambda, const LinearMiOptions& options) {
  if (!(t >= f.end())) throw std::invalid_argument("post_end_increment: t must be after the end of f");
  if (!(delta > 0.0)) throw std::invalid_argument("post_end_increment: delta must be positive");
  const double h = path.h();
  const std::size_t i = node_index(t, h, "post_end_increment");
  const std::size_t j = node_index(t + delta, h, "post_end_increment");
  const std::size_t n = path.steps();
  if (j > n) throw std::invalid_argument("post_end_increment: t + delta past the path horizon");

  IncrementIdentity out;
  out.increment = linear_limit_mi(path, t + delta, f, c_kappa, c_lambda, options) -
                  linear_limit_mi(path, t, f, c_kappa, c_lambda, options);
  const double end = f.end();
  const double I = std::exp(-c_lambda * end) * f.exp_convolution(c_lambda, end, end);

  const auto xi_t = forward_curve(path, i, 1, n - i + 1);
  const auto xi_d = forward_curve(path, j, 1, n - j + 1);
  auto e = [&](std::size_t k) { return std::exp(c_lambda * h * static_cast<double>(k)); };

  // literal form: trapezoid on [t, t + delta]
  double lit = 0.0;
  for (std::size_t k = i; k <= j; ++k) {
    const double w = (k == i || k == j) ? 0.5 : 1.0;
    lit += w * e(k) * (path.y[k] - xi_t[k - i]);
  }
  out.literal = I * lit * h;

  // corrected form with the global weights of linear_limit_mi
  auto global_w = [&](std::size_t k) { return (k == 0 || k == n) ? 0.5 : 1.0; };
  double realized = 0.0, revision = 0.0;
  for (std::size_t k = i + 1; k <= j; ++k) realized += global_w(k) * e(k) * (path.y[k] - xi_t[k - i]);
  for (std::size_t k = j + 1; k <= n; ++k) revision += global_w(k) * e(k) * (xi_d[k - j] - xi_t[k - i]);
  double corrected = (realized + revision) * h;

  const TailPlan plan = plan_tail(path, options);
  if (plan.count > 0) {
    // forward revision past the horizon, same coarse rule as linear_limit_mi
    const double scale = 1.0 / std::sqrt(path.cells->params().mu_star * path.cells->params().lambda);
    const auto xd = driving_terms(path, j);
    const double H = h * static_cast<double>(plan.stride);
    const double eA = e(n);
    double tail = 0.0, last = 0.0;
    for (std::size_t c = 0; c <= plan.count; ++c) {
      const std::size_t node = n + c * plan.stride;
      double diff = 0.0;
      for (std::size_t q = i; q < j; ++q) diff += path.cells->cell(node - 1 - q) * xd[q];
      diff *= scale;
      const double w = (c == 0 || c == plan.count) ? 0.5 : 1.0;
      tail += w * std::exp(c_lambda * H * static_cast<double>(c)) * diff;
      last = diff;
    }
    tail *= H;
    tail += std::exp(c_lambda * H * static_cast<double>(plan.count)) * last / (-c_lambda);
    corrected += eA * tail;
  }
  out.corrected = c_kappa * I * corrected;
  return out;
}

std::vector<RefinementLevel> limit_mi_refinement(const LimitImpactSpec& spec, const StrategyProfile& f, double t,
                                                 std::size_t n_paths, int levels, std::uint64_t seed,
                                                 unsigned workers) {
  if (levels < 2) throw std::invalid_argument("limit_mi_refinement: need at least two levels");
  if (n_paths < 2) throw std::invalid_argument("limit_mi_refinement: need at least two paths");
  const auto coarse_steps = static_cast<std::size_t>(std::llround(spec.horizon / spec.h));
  const std::size_t factor = std::size_t{1} << (levels - 1);
  const std::size_t fine_steps = coarse_steps * factor;
  std::vector<std::shared_ptr<const KernelCells>> cells;
  for (int l = 0; l < levels; ++l) {
    const std::size_t k = std::size_t{1} << l;
    cells.push_back(make_cells(spec.rough, spec.h / static_cast<double>(k), coarse_steps * k));
  }
  auto runs = parallel_map<std::vector<double>>(n_paths, workers, [&](std::size_t p) {
    Rng rng(derive_seed(seed, {p, stream::brownian}));
    const double sd = std::sqrt(spec.h / static_cast<double>(factor));
    std::vector<double> fine(fine_steps);
    for (double& b : fine) b = sd * rng.normal();
    std::vector<double> values(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l) {
      const std::size_t group = factor >> l;
      std::vector<double> dB(coarse_steps << l, 0.0);
      for (std::size_t k = 0; k < fine_steps; ++k) dB[k / group] += fine[k];
      const auto y = simulate_Y(cells[static_cast<std::size_t>(l)], std::move(dB));
      const auto qp = solve_queue_ode(spec.queues, y, f, spec.q0, t);
      values[static_cast<std::size_t>(l)] = limit_mi_path(spec, y, qp);
    }
    return values;
  });
  std::vector<RefinementLevel> out(static_cast<std::size_t>(levels));
  for (int l = 0; l < levels; ++l) {
    const auto li = static_cast<std::size_t>(l);
    RunningStats v, d;
    for (const auto& r : runs) {
      v.add(r[li]);
      if (l > 0) d.add(r[li] - r[li - 1]);
    }
    out[li].h = spec.h / static_cast<double>(std::size_t{1} << l);
    out[li].value = v.mean();
    out[li].stderr_value = v.stderr_mean();
    if (l > 0) {
      out[li].bound = std::abs(out[li].value - out[li - 1].value);
      out[li].change_stderr = d.stderr_mean();
    }
  }
  return out;
}

}  // namespace lobimpact
