// Acceptance runner: one PASS/FAIL line per criterion, sub-checks indented below it.
// Exit status is 0 only if every selected criterion passes.

#include <CLI11.hpp>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lobimpact/analytics.hpp"
#include "lobimpact/cli.hpp"
#include "lobimpact/estimation.hpp"
#include "lobimpact/hawkes.hpp"
#include "lobimpact/impact.hpp"
#include "lobimpact/rng.hpp"
#include "lobimpact/scaling.hpp"
#include "lobimpact/specialfn.hpp"
#include "lobimpact/stats.hpp"

using namespace lobimpact;

namespace {

struct Check {
  bool pass = false;
  std::string text;
};

struct Outcome {
  std::string title;
  std::vector<Check> checks;
  [[nodiscard]] bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
  void add(bool pass, const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    checks.push_back({pass, buf});
  }
  // reported, never fails the criterion
  void info(const char* fmt, auto... args) {
    add(true, fmt, args...);
    checks.back().text.insert(0, "(info) ");
  }
};

// |x - y| <= 3 se, reported as a z-score
void within_3se(Outcome& o, const char* what, double x, double y, double se) {
  const double z = se > 0.0 ? std::abs(x - y) / se : (x == y ? 0.0 : INFINITY);
  o.add(std::abs(x - y) <= 3.0 * se, "%s: mc %.6g, oracle %.6g, stderr %.3g, |z| %.2f", what, x, y, se, z);
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / (n - 1)));
  return v;
}

// ---------------------------------------------------------------------------

Outcome power_law_reproduction() {
  Outcome o{"power-law exponent of the limit impact, SqrtLog(0.01, 1000), D = 0.025 - q, 10000 paths", {}};
  LimitImpactSpec spec;  // defaults: SqrtLog(0.01, 1000), D = 0.025 - q, h = 1/512, A = 4
  const auto gammas = logspace(-2.0, 1.5, 15);
  std::vector<StrategyProfile> profiles;
  for (double g : gammas) profiles.push_back(StrategyProfile::constant(g, 0.0, 1.0));
  const auto t0 = std::chrono::steady_clock::now();
  const auto est = limit_market_impact(spec, profiles, 1.0, 10000, 2024);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto fit_on = [&](double lo, double hi) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < gammas.size(); ++i)
      if (gammas[i] >= lo * (1 - 1e-9) && gammas[i] <= hi * (1 + 1e-9)) {
        x.push_back(gammas[i]);
        y.push_back(std::abs(est[i].value));
      }
    return fit_power_law(x, y);
  };
  for (std::size_t i = 0; i < gammas.size(); ++i)
    o.info("gamma %.4g: E[MI_1] %.6g (stderr %.2g)", gammas[i], est[i].value, est[i].stderr_value);
  const auto main = fit_on(std::pow(10.0, -0.5), 10.0);
  o.add(main.exponent >= 0.44 && main.exponent <= 0.64, "fit on gamma in [10^-0.5, 10] (1.5 decades): exponent %.4f, r2 %.4f",
        main.exponent, main.r2);
  for (auto [lo, hi] : {std::pair{0.01, 1.0}, std::pair{0.1, 3.1623}, std::pair{1.0, 31.623}}) {
    const auto f = fit_on(lo, hi);
    o.info("fit on gamma in [%.3g, %.3g]: exponent %.4f, r2 %.4f", lo, hi, f.exponent, f.r2);
  }
  o.add(secs <= 600.0, "runtime %.1f s (target <= 600 s)", secs);
  return o;
}

ImpactModel affine_micro_model() {
  ImpactModel m;
  m.queues = QueueModel(AffineDifferenceRates{-1.0, 5.0, 0.5});
  m.kappa = Kappa(AffineKappa{-0.02, 0.2});
  m.market = HawkesParams{Baseline::constant(1.0), Kernel(ExponentialKernel{0.5, 1.0})};
  m.q0_ask = 3;
  m.q0_bid = 3;
  return m;
}

Outcome instantaneous_impact_formula() {
  Outcome o{"instantaneous impact of one order after burn-in vs -(c_k/c_l) mu/(1 - ||phi||)", {}};
  ImpactConfig cfg;
  cfg.n_histories = 10000;
  cfg.seed = 77;
  const double t0 = 20.0;  // burn-in: 20 queue mixing times, 20 kernel decay times
  const auto start = std::chrono::steady_clock::now();
  const auto e = market_impact_at(affine_micro_model(), MetaorderSchedule{StrategyProfile{}, {t0}}, t0, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double target = instantaneous_impact(-0.02, -1.0, 1.0, 0.5);
  o.add(std::abs(e.value - target) <= 0.1 * std::abs(target),
        "E[MI] %.6g (stderr %.2g, %zu coupled paths) vs %.6g: relative error %.3f (tolerance 0.10)", e.value,
        e.stderr_value, e.n_paths, target, std::abs(e.value / target - 1.0));
  o.add(secs <= 300.0, "runtime %.1f s (target <= 300 s)", secs);
  return o;
}

Outcome no_impact_null() {
  Outcome o{"no-impact null: constant kappa and f = 0", {}};
  auto m = affine_micro_model();
  m.kappa = Kappa(ConstantKappa{0.15});
  ImpactConfig cfg;
  cfg.n_histories = 2000;
  cfg.seed = 78;
  const MetaorderSchedule sch{StrategyProfile::constant(2.0, 0.0, 2.0), {}};
  const auto micro = market_impact_at(m, sch, 2.0, cfg);
  o.add(std::abs(micro.value) <= 3.0 * micro.stderr_value, "micro, constant kappa: %.3g (stderr %.3g)", micro.value,
        micro.stderr_value);
  const auto micro0 = market_impact_at(affine_micro_model(), MetaorderSchedule{}, 2.0, cfg);
  o.add(micro0.value == 0.0, "micro, f = 0: %.3g", micro0.value);

  LimitImpactSpec spec;
  spec.kappa = Kappa(ConstantKappa{0.7});
  const auto lim = limit_market_impact(spec, StrategyProfile::constant(0.5, 0.0, 1.0), 1.0, 500, 79);
  o.add(lim.value == 0.0, "limit, constant kappa: %.3g", lim.value);
  const auto lim0 = limit_market_impact(LimitImpactSpec{}, StrategyProfile{}, 1.0, 500, 80);
  o.add(lim0.value == 0.0, "limit, f = 0: %.3g", lim0.value);
  return o;
}

Outcome coupling_invariants() {
  Outcome o{"coupled queues over 1000 paths: ordering, contraction, mean gap decay", {}};
  BookConfig c;
  c.queues = QueueModel(AffineDifferenceRates{-1.0, 6.0, 1.0});
  c.market = HawkesParams{Baseline::constant(1.0), Kernel(ExponentialKernel{0.5, 1.0})};
  c.q0_ask = 4;
  c.q0_bid = 4;
  c.horizon = 12.0;
  c.record_stream = false;
  const double c_lambda = -1.0, t = 6.0;
  const MetaorderSchedule sch{StrategyProfile::constant(2.0, 2.0, 12.0), {}};
  const std::vector<double> later{6.25, 6.5, 7.0, 8.0, 10.0};
  std::size_t order_violations = 0, contraction_violations = 0, audit_errors = 0, records = 0;
  std::vector<RunningStats> resid(later.size());
  RunningStats gap_t;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto p = overlay_metaorder(simulate_book(c, derive_seed(404, {i})), c.queues, sch, t);
    try {
      (void)coupled_difference_jumps(p);
    } catch (const CouplingAuditError&) {
      ++audit_errors;
    }
    long prev = 0;
    auto gap_at = [&](double s) {
      long g = 0;
      for (const auto& r : p.records) {
        if (r.time > s) break;
        g = r.q_meta - r.q_base;
      }
      return static_cast<double>(g);
    };
    for (const auto& r : p.records) {
      ++records;
      const long g = r.q_meta - r.q_base;
      order_violations += g < 0;
      contraction_violations += r.type != CoupledEventType::metaorder && g > prev;
      prev = g;
    }
    const double u = gap_at(t);
    gap_t.add(u);
    for (std::size_t k = 0; k < later.size(); ++k) resid[k].add(gap_at(later[k]) - u * std::exp(c_lambda * (later[k] - t)));
  }
  o.add(order_violations == 0, "qbar >= q: %zu violations over %zu events", order_violations, records);
  o.add(contraction_violations == 0, "|qbar - q| nonincreasing between metaorder orders: %zu violations",
        contraction_violations);
  o.add(audit_errors == 0, "gap jump audit (+1 at orders, -1 otherwise): %zu failing paths", audit_errors);
  for (std::size_t k = 0; k < later.size(); ++k) {
    char what[96];
    std::snprintf(what, sizeof what, "E[U_s] at s = %.2f (U_t mean %.3f, t = 6)", later[k], gap_t.mean());
    within_3se(o, what, gap_t.mean() * std::exp(c_lambda * (later[k] - t)) + resid[k].mean(),
               gap_t.mean() * std::exp(c_lambda * (later[k] - t)), resid[k].stderr_mean());
  }
  return o;
}

Outcome hawkes_moments_vs_oracles() {
  Outcome o{"Hawkes moments at t = 5 vs propagator quadratures, 1e5 paths per kernel", {}};
  const double mu = 1.0, b = 1.0, t = 5.0;
  for (double n : {0.3, 0.5, 0.9}) {
    HawkesParams p{Baseline::constant(mu), Kernel(ExponentialKernel{n * b, b})};
    const auto oracle = hawkes_moments(p.baseline, solve_psi(p.kernel, 1e-3, t), t);
    RunningStats lam, lam2, cnt, comp2;
    for (std::uint64_t i = 0; i < 100000; ++i) {
      const auto ev = simulate_hawkes(p, t, derive_seed(505, {static_cast<std::uint64_t>(n * 10), i}));
      double l = mu;
      for (double u : ev) l += p.kernel(t - u);
      const double comp = hawkes_compensator(p, ev, t);
      lam.add(l);
      lam2.add(l * l);
      cnt.add(static_cast<double>(ev.size()));
      comp2.add(comp * comp);
    }
    char what[64];
    std::snprintf(what, sizeof what, "||phi|| %.1f E[lambda_t]", n);
    within_3se(o, what, lam.mean(), oracle.mean_intensity, lam.stderr_mean());
    std::snprintf(what, sizeof what, "||phi|| %.1f E[lambda_t^2]", n);
    within_3se(o, what, lam2.mean(), oracle.second_intensity, lam2.stderr_mean());
    std::snprintf(what, sizeof what, "||phi|| %.1f E[N_t]", n);
    within_3se(o, what, cnt.mean(), oracle.mean_count, cnt.stderr_mean());
    std::snprintf(what, sizeof what, "||phi|| %.1f E[Lambda_t^2]", n);
    within_3se(o, what, comp2.mean(), oracle.second_compensator, comp2.stderr_mean());
  }
  return o;
}

Outcome continuation_decomposition() {
  Outcome o{"N_{t+s} vs N_t + Ntilde_s + Nhat_s at (t, s) = (2, 3), 1e4 paths", {}};
  const double t = 2.0, s = 3.0;
  HawkesParams p{Baseline::constant(1.0), Kernel(ExponentialKernel{0.5, 1.0})};
  RunningStats direct, lifted;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    direct.add(static_cast<double>(simulate_hawkes(p, t + s, derive_seed(606, {0, i})).size()));
    const auto hist = simulate_hawkes(p, t, derive_seed(606, {1, i}));
    const auto fresh = simulate_hawkes(p, s, derive_seed(606, {2, i}));
    HawkesParams hat{Baseline::continuation(p.kernel, hist, t), p.kernel};
    const auto induced = simulate_hawkes(hat, s, derive_seed(606, {3, i}));
    lifted.add(static_cast<double>(hist.size() + fresh.size() + induced.size()));
  }
  within_3se(o, "mean count, lifted vs direct", lifted.mean(), direct.mean(),
             std::hypot(direct.stderr_mean(), lifted.stderr_mean()));
  return o;
}

Outcome special_functions() {
  Outcome o{"Mittag-Leffler, F^{alpha,lambda} and E[Y_t]", {}};
  double err = 0.0;
  for (double x = -20.0; x <= 5.0; x += 1.0 / 64.0)
    err = std::max(err, std::abs(specialfn::mittag_leffler(1.0, 1.0, x) - std::exp(x)));
  o.add(err <= 1e-10, "E_{1,1}(x) vs exp(x) on [-20, 5], step 1/64: sup error %.2e (tolerance 1e-10)", err);

  // F(t) = int_0^t f; with u = s^alpha the integrand lambda E_{a,a}(-lambda u) / alpha is smooth.
  using boost::math::quadrature::gauss_kronrod;
  double ferr = 0.0;
  for (RoughVolParams p : {RoughVolParams{0.6, 1.0, 1.0}, RoughVolParams{0.55, 2.0, 1.0}, RoughVolParams{0.8, 0.5, 1.0}})
    for (double t : {0.01, 0.3, 1.0, 2.5, 6.0}) {
      const double quad = gauss_kronrod<double, 61>::integrate(
          [&](double u) { return p.lambda * specialfn::mittag_leffler(p.alpha, p.alpha, -p.lambda * u) / p.alpha; },
          0.0, std::pow(t, p.alpha), 15, 1e-14);
      ferr = std::max(ferr, std::abs(rough_kernel_primitive(p, t) - quad));
    }
  o.add(ferr <= 1e-8, "F = 1 - E_alpha(-lambda t^alpha) vs quadrature of f: sup error %.2e (tolerance 1e-8)", ferr);

  const RoughVolParams p{0.6, 1.0, 1.0};
  const double h = 1.0 / 256.0;
  auto cells = make_cells(p, h, 512);
  std::vector<RunningStats> at(3);
  const std::vector<std::size_t> nodes{64, 256, 512};
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto y = simulate_Y(cells, 512, derive_seed(707, {i}));
    for (std::size_t k = 0; k < nodes.size(); ++k) at[k].add(y.y[nodes[k]]);
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    char what[48];
    const double tk = h * static_cast<double>(nodes[k]);
    std::snprintf(what, sizeof what, "E[Y_t] at t = %.2f", tk);
    within_3se(o, what, at[k].mean(), rough_kernel_primitive(p, tk), at[k].stderr_mean());
  }
  return o;
}

// q0 e^{c t} + int_0^t e^{c (t - s)} (d - Y(s) + f(s) 1_{s <= trunc}) ds, Gauss-Legendre per smooth piece.
double affine_closed_form(double c, double d, double q0, const RoughVolPath& y, const StrategyProfile* f,
                          double truncation, double t) {
  using boost::math::quadrature::gauss;
  std::vector<double> cuts;
  for (std::size_t k = 0; k <= y.steps(); ++k) cuts.push_back(y.h() * static_cast<double>(k));
  if (f) {
    for (double b : f->breaks()) cuts.push_back(b);
    cuts.push_back(truncation);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = q0 * std::exp(c * t);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = std::min(cuts[k + 1], t);
    if (b <= a) continue;
    total += gauss<double, 10>::integrate(
        [&](double s) {
          const double g = (f && s <= truncation) ? (*f)(s) : 0.0;
          return std::exp(c * (t - s)) * (d - y.at(s) + g);
        },
        a, b);
  }
  return total;
}

Outcome affine_closed_forms() {
  Outcome o{"affine queues and kappa: RK4 and limit MI vs closed forms", {}};
  const double h = 1.0 / 256.0;
  const QueueModel qm(AffineDifferenceRates{-1.3, 0.4, 0.5});
  const StrategyProfile f({0.0, 0.3, 1.0}, {0.8, 0.2});
  double qerr = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto y = simulate_Y(RoughVolParams{}, h, 2.0, derive_seed(808, {s}));
    for (double trunc : {0.77, 1.0}) {
      const auto sol = solve_queue_ode(qm, y, f, 0.3, trunc);
      for (std::size_t n = 0; n <= y.steps(); n += 2) {
        const double t = h * static_cast<double>(n);
        qerr = std::max(qerr, std::abs(sol.q[n] - affine_closed_form(-1.3, 0.4, 0.3, y, nullptr, 0.0, t)));
        qerr = std::max(qerr, std::abs(sol.qbar[n] - affine_closed_form(-1.3, 0.4, 0.3, y, &f, trunc, t)));
      }
    }
  }
  o.add(qerr <= 1e-6, "RK4 q and qbar vs variation-of-constants quadrature: sup error %.2e (tolerance 1e-6)", qerr);

  LimitImpactSpec spec;
  spec.queues = QueueModel(AffineDifferenceRates{-1.0, 0.6, 0.5});
  spec.kappa = Kappa(AffineKappa{-0.5, 1.0});
  spec.h = h;
  spec.horizon = 4.0;
  const StrategyProfile g = StrategyProfile::constant(0.5, 0.0, 1.0);
  const std::size_t steps = 1024;
  auto cells = make_cells(spec.rough, h, steps, tail_cells(-1.0, h));
  double path_err = 0.0, cond_err = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto y = simulate_Y(cells, steps, derive_seed(809, {s}));
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
      const auto qp = solve_queue_ode(spec.queues, y, g, spec.q0, t);
      double closed = 0.0;
      for (std::size_t n = 0; n <= steps; ++n) {
        const double w = (n == 0 || n == steps) ? 0.5 : 1.0;
        closed += w * -0.5 * g.exp_convolution(-1.0, h * static_cast<double>(n), t) * y.y[n];
      }
      closed *= h;
      path_err = std::max(path_err, std::abs(limit_mi_path(spec, y, qp) - closed));
      cond_err = std::max(cond_err, std::abs(conditional_limit_mi(spec, y, qp, t) - linear_limit_mi(y, t, g, -0.5, -1.0)));
    }
  }
  o.add(path_err <= 1e-6, "realized limit MI vs c_k int G Y, 200 path-times: sup error %.2e (tolerance 1e-6)", path_err);
  o.add(cond_err <= 1e-6, "conditional limit MI vs closed form with forward variance: sup error %.2e (tolerance 1e-6)",
        cond_err);
  return o;
}

Outcome post_end_flatness() {
  Outcome o{"limit MI after the metaorder ends: flat in mean, per-path increment identity", {}};
  const double h = 1.0 / 256.0, c_kappa = -0.5, c_lambda = -1.0;
  const std::size_t steps = 1024;
  auto cells = make_cells(RoughVolParams{}, h, steps, tail_cells(c_lambda, h));
  const StrategyProfile f = StrategyProfile::constant(0.5, 0.0, 1.0);
  RunningStats d1, d2;
  double lit_err = 0.0, cor_err = 0.0, scale = 0.0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto y = simulate_Y(cells, steps, derive_seed(909, {s}));
    const double m1 = linear_limit_mi(y, 1.0, f, c_kappa, c_lambda);
    const double m2 = linear_limit_mi(y, 2.0, f, c_kappa, c_lambda);
    const double m3 = linear_limit_mi(y, 3.0, f, c_kappa, c_lambda);
    d1.add(m2 - m1);
    d2.add(m3 - m2);
    if (s < 100)
      for (double t : {1.0, 1.5, 2.5})
        for (double d : {h, 0.25, 1.0}) {
          const auto id = post_end_increment(y, t, d, f, c_kappa, c_lambda);
          lit_err = std::max(lit_err, std::abs(id.increment - id.literal));
          cor_err = std::max(cor_err, std::abs(id.increment - id.corrected));
          scale = std::max(scale, std::abs(id.increment));
        }
  }
  within_3se(o, "E[MI_2 - MI_1] (1e4 paths)", d1.mean(), 0.0, d1.stderr_mean());
  within_3se(o, "E[MI_3 - MI_2] (1e4 paths)", d2.mean(), 0.0, d2.stderr_mean());
  o.add(lit_err <= 1e-8,
        "identity as stated, int_0^1 e^{-c u} f du * int_t^{t+d} e^{c s}(Y_s - xi_t(s)) ds: sup error %.2e over 900 "
        "path-increments (largest |increment| %.2e, tolerance 1e-8)",
        lit_err, scale);
  o.info("with the c_kappa factor and the forward-revision term int_{t+d}^inf e^{c s}(xi_{t+d} - xi_t) ds added: "
         "sup error %.2e (%s 1e-8)",
         cor_err, cor_err <= 1e-8 ? "holds to" : "fails");
  return o;
}

Outcome estimator_recovery() {
  Outcome o{"kappa estimators on simulated prices", {}};
  {
    SimplifiedPriceModel m;
    m.queues = QueueModel(AffineDifferenceRates{-1.0, 3.0, 0.5});
    m.kappa = Kappa(ConstantKappa{0.5});
    m.market = HawkesParams{Baseline::constant(1.0), Kernel(ExponentialKernel{0.5, 1.0})};
    m.horizon = 1e5;
    const auto sp = simulate_simplified_price(m, 1001);
    const double k = estimate_kappa_const(sp, sp.xi0);
    o.add(std::abs(k / 0.5 - 1.0) <= 0.05, "constant kappa 0.5 from %zu trades: %.5f (relative error %.4f, tolerance 0.05)",
          sp.trades.size(), k, std::abs(k / 0.5 - 1.0));
  }
  {
    // kappa^2(q) = 0.01 - 0.002 q on the visited range
    TabulatedKappa tab;
    tab.q_min = -400;
    for (long q = tab.q_min; q <= 5; ++q) tab.values.push_back(std::sqrt(std::max(0.01 - 0.002 * static_cast<double>(q), 0.0)));
    SimplifiedPriceModel m;
    m.queues = QueueModel(AffineDifferenceRates{-0.3, -0.1, 0.5});
    m.kappa = Kappa(tab);
    m.market = HawkesParams{Baseline::constant(1.0), Kernel(ExponentialKernel{0.05, 0.1})};
    m.horizon = 2.5e5;
    m.delta = 0.02;
    const auto sp = simulate_simplified_price(m, 1002);
    long qmax = -1000;
    for (const auto& tr : sp.trades) qmax = std::max(qmax, tr.queue);
    const auto fit = estimate_kappa_affine(window_stats(sp, 5000), sp.xi0);
    o.add(sp.trades.size() >= 1000000 * 9 / 10, "affine design: %zu trades, largest queue mark %ld (table ends at 5)",
          sp.trades.size(), qmax);
    o.add(std::abs(fit.a / 0.01 - 1.0) <= 0.05, "a = 0.01: %.6g (relative error %.4f, tolerance 0.05)", fit.a,
          std::abs(fit.a / 0.01 - 1.0));
    o.add(std::abs(fit.b / -0.002 - 1.0) <= 0.05, "b = -0.002: %.6g (relative error %.4f, tolerance 0.05)", fit.b,
          std::abs(fit.b / -0.002 - 1.0));
  }
  {
    SimplifiedPriceModel m;
    m.queues = QueueModel(AffineDifferenceRates{-1.0, 1.0, 0.5});
    m.kappa = Kappa(ConstantKappa{0.5});
    m.market = HawkesParams{Baseline::constant(0.1), Kernel(ExponentialKernel{0.05, 0.1})};
    m.horizon = 1e5;
    m.delta = 0.05;
    m.noise_sigma = 0.3;
    const auto sp = simulate_simplified_price(m, 1003);
    const auto fit = estimate_kappa_noise(window_stats(sp, 1000));
    o.add(std::abs(fit.intercept / 0.09 - 1.0) <= 0.10,
          "noise variance 0.09 per unit time: %.5f (relative error %.4f, tolerance 0.10)", fit.intercept,
          std::abs(fit.intercept / 0.09 - 1.0));
  }
  return o;
}

Outcome determinism() {
  Outcome o{"CLI output digests at 1 and 4 workers", {}};
  using cli::json;
  const std::vector<std::string> docs{
      R"({"scenario": "simulate-book", "seed": 1, "horizon": 30, "paths": 6})",
      R"({"scenario": "micro-impact", "seed": 2,
          "queues": {"type": "affine", "c_lambda": -1.0, "d_lambda": 5.0, "floor": 0.5},
          "kappa": {"type": "affine", "c": -0.02, "d": 0.2},
          "market": {"mu": 1.0, "kernel": {"type": "exponential", "a": 0.5, "b": 1.0}},
          "grid": [0.5, 1.0, 2.0], "ensemble": {"n_histories": 60}})",
      R"({"scenario": "scaling-mi", "seed": 3, "n_paths": 40, "gammas": [0.1, 0.3, 1.0]})",
      R"({"scenario": "shape-fit", "seed": 4})",
      R"({"scenario": "broker-eval", "seed": 5, "n_paths": 40, "grid": [0.5, 1.0, 2.0]})",
      R"({"scenario": "estimate-kappa", "seed": 6, "simulation": {"horizon": 2000}, "windows": 20})",
      R"({"scenario": "rescaling-ladder", "seed": 7, "ladder": [50], "queue_paths": 20, "queue_points": 2,
          "limit_paths": 20})"};
  const auto root = std::filesystem::temp_directory_path() / "lobimpact_acceptance";
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::map<std::string, std::string> digests[2];
    std::string kind;
    try {
      for (int w = 0; w < 2; ++w) {
        auto doc = json::parse(docs[i]);
        doc["workers"] = w == 0 ? 1 : 4;
        const auto out = root / (std::to_string(i) + "_w" + std::to_string(w));
        std::filesystem::remove_all(out);
        doc["output_dir"] = out.string();
        const auto cfg = cli::parse_config(doc);
        kind = cfg.kind;
        const auto manifest = cli::run_scenario(cfg, out);
        for (const auto& e : manifest["outputs"])
          digests[w][e["file"].get<std::string>()] = e["sha256"].get<std::string>();
      }
    } catch (const std::exception& e) {
      o.add(false, "%s: %s", docs[i].substr(14, 20).c_str(), e.what());
      continue;
    }
    o.add(!digests[0].empty() && digests[0] == digests[1], "%s: %zu outputs, digests %s", kind.c_str(),
          digests[0].size(), digests[0] == digests[1] ? "identical" : "differ");
  }
  return o;
}

const std::map<int, std::function<Outcome()>>& criteria() {
  static const std::map<int, std::function<Outcome()>> all{
      {1, power_law_reproduction},     {2, instantaneous_impact_formula}, {3, no_impact_null},
      {4, coupling_invariants},        {5, hawkes_moments_vs_oracles},    {6, continuation_decomposition},
      {7, special_functions},          {8, affine_closed_forms},          {9, post_end_flatness},
      {10, estimator_recovery},        {11, determinism}};
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lobimpact acceptance criteria"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "criterion numbers to run (default: all)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (const auto& [k, _] : criteria()) selected.push_back(k);

  bool all_pass = true;
  for (int k : selected) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria().at(k)();
    } catch (const std::exception& e) {
      o.add(false, "exception: %s", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s  %s  [%.1f s]\n", k, o.pass() ? "PASS" : "FAIL", o.title.c_str(), secs);
    for (const auto& c : o.checks) std::printf("    %s %s\n", c.pass ? "ok  " : "FAIL", c.text.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass();
  }
  return all_pass ? 0 : 1;
}
