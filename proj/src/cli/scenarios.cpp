#include <cmath>

#include "lobimpact/stats.hpp"
#include "output.hpp"

namespace lobimpact::cli {

namespace {

const char* kTime = "model time units";
const char* kPrice = "price units";
const char* kCount = "count";
const char* kQueue = "queue size (orders)";
const char* kLabel = "label";
const char* kRate = "orders per model time unit";

json fit_json(const PowerLawFit& fit, std::size_t n, double lo, double hi) {
  return {{"exponent", fit.exponent}, {"prefactor", fit.prefactor}, {"r2", fit.r2},
          {"n_points", n},            {"x_min", lo},                {"x_max", hi}};
}

const std::vector<Column> kFitFields{{"exponent", "dimensionless"}, {"prefactor", kPrice}, {"r2", "dimensionless"},
                                     {"n_points", kCount},          {"x_min", kRate},      {"x_max", kRate}};

}  // namespace

void run_simulate_book(const ScenarioConfig& cfg, const SimulateBookScenario& s, Artifacts& a) {
  std::vector<std::uint64_t> seeds(s.paths);
  for (std::size_t p = 0; p < s.paths; ++p) {
    seeds[p] = derive_seed(cfg.seed, {p});
    a.seed("path/" + std::to_string(p), seeds[p]);
  }
  const auto paths = parallel_map<BookPath>(s.paths, cfg.workers, [&](std::size_t p) { return simulate_book(s.book, seeds[p]); });
  auto events = a.csv("events.csv", {{"path", kCount}, {"time", kTime}, {"process", kLabel}, {"side", kLabel},
                                     {"queue_after", kQueue}});
  auto summary = a.csv("summary.csv", {{"path", kCount},
                                       {"seed", "uint64"},
                                       {"market_ask", kCount},
                                       {"market_bid", kCount},
                                       {"events", kCount},
                                       {"final_queue_ask", kQueue},
                                       {"final_queue_bid", kQueue}});
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& b = paths[p];
    for (const auto& e : b.stream.events) {
      const auto& side = e.side == Side::ask ? b.ask : b.bid;
      events.row(p, e.time, to_string(e.process), to_string(e.side), side.queue.value_at(e.time));
    }
    summary.row(p, seeds[p], b.ask.market.size(), b.bid.market.size(), b.stream.events.size(),
                b.ask.queue.value_at(b.horizon), b.bid.queue.value_at(b.horizon));
  }
  events.close();
  summary.close();
}

void run_micro_impact(const ScenarioConfig& cfg, const MicroImpactScenario& s, Artifacts& a) {
  ImpactConfig ic = s.impact;
  ic.seed = cfg.seed;
  ic.workers = cfg.workers;
  a.seed("impact_trajectory", ic.seed);
  const auto traj = impact_trajectory(s.model, s.schedule, s.grid, ic);
  auto out = a.csv("impact.csv", {{"t", kTime},
                                  {"mi_estimate", kPrice},
                                  {"stderr", kPrice},
                                  {"n_paths", kCount},
                                  {"t_max", kTime},
                                  {"doubled_window_estimate", kPrice},
                                  {"tail_bound", kPrice},
                                  {"unfinished", kCount}});
  json warnings = json::array();
  for (const auto& e : traj.points) {
    out.row(e.t, e.value, e.stderr_value, e.n_paths, e.horizon, e.doubled, e.tail_bound, e.unfinished);
    for (const auto& w : e.warnings) warnings.push_back({{"t", e.t}, {"warning", w}});
  }
  out.close();
  auto inc = a.csv("increments.csv", {{"t_from", kTime}, {"t_to", kTime}, {"increment", kPrice}, {"stderr", kPrice}});
  for (std::size_t k = 0; k < traj.increments.size(); ++k)
    inc.row(traj.points[k].t, traj.points[k + 1].t, traj.increments[k].value, traj.increments[k].stderr_value);
  inc.close();
  a.json_file("diagnostics.json", {{"warnings", warnings}}, {{"warnings", "text"}});
}

void run_scaling_mi(const ScenarioConfig& cfg, const ScalingMiScenario& s, Artifacts& a) {
  std::vector<StrategyProfile> profiles;
  for (double g : s.gammas) profiles.push_back(StrategyProfile::constant(g, s.start, s.end));
  a.seed("limit_market_impact", cfg.seed);
  const auto est = limit_market_impact(s.spec, profiles, s.t, s.n_paths, cfg.seed, cfg.workers);
  auto out = a.csv("limit_mi.csv", {{"gamma", kRate},
                                    {"t", "limit time units"},
                                    {"mi_estimate", kPrice},
                                    {"stderr", kPrice},
                                    {"n_paths", kCount},
                                    {"horizon", "limit time units"},
                                    {"tail_bound", kPrice}});
  std::vector<double> x, y;
  for (std::size_t i = 0; i < est.size(); ++i) {
    out.row(s.gammas[i], s.t, est[i].value, est[i].stderr_value, est[i].n_paths, est[i].horizon, est[i].tail_bound);
    if (est[i].value != 0.0) {
      x.push_back(s.gammas[i]);
      y.push_back(std::abs(est[i].value));
    }
  }
  out.close();
  json fit;
  if (x.size() >= 2 && x.size() == s.gammas.size())
    fit = fit_json(fit_power_law(x, y), x.size(), *std::min_element(x.begin(), x.end()), *std::max_element(x.begin(), x.end()));
  else
    fit = {{"exponent", nullptr}, {"reason", "needs at least two gammas with nonzero impact"}};
  a.json_file("fit.json", fit, kFitFields);
}

void run_shape_fit(const ScenarioConfig&, const ShapeFitScenario& s, Artifacts& a) {
  const auto shape = asymptotic_shape(s.shape);
  auto out = a.csv("shape.csv", {{"gamma", kRate}, {"shape", kPrice}, {"in_fit", "0/1"}});
  std::vector<double> x, y;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const double g = s.shape.gammas[i];
    const bool in = g >= s.fit_lo && g <= s.fit_hi && shape[i] != 0.0;
    out.row(g, shape[i], in ? 1 : 0);
    if (in) {
      x.push_back(g);
      y.push_back(std::abs(shape[i]));
    }
  }
  out.close();
  json fit;
  if (x.size() >= 2)
    fit = fit_json(fit_power_law(x, y), x.size(), x.front(), x.back());
  else
    fit = {{"exponent", nullptr}, {"reason", "fewer than two nonzero shape values in the fit range"}};
  a.json_file("fit.json", fit, kFitFields);
}

void run_broker_eval(const ScenarioConfig& cfg, const BrokerEvalScenario& s, Artifacts& a) {
  BrokerStrategy sp;
  sp.f = s.f;
  sp.g = [g = s.g](double u) { return g(u); };
  sp.g_breaks = s.g.breaks();
  sp.g_end = s.g.end();
  sp.c_kappa = s.c_kappa;
  sp.c_lambda = s.c_lambda;
  sp.kappa_star = s.kappa_star;
  sp.alpha = s.rough.alpha;
  sp.lambda = s.rough.lambda;
  const auto steps = static_cast<std::size_t>(std::llround(s.grid.back() / s.h));
  const auto cells = make_cells(s.rough, s.h, steps, tail_cells(s.c_lambda, s.h));
  std::vector<double> market;
  for (double t : s.grid) market.push_back(market_order_impact(sp, t));
  a.seed("y_paths", cfg.seed);
  // MI^m is deterministic; only MI^l needs the Y ensemble
  const auto limits = parallel_map<std::vector<double>>(s.n_paths, cfg.workers, [&](std::size_t i) {
    const auto y = simulate_Y(cells, steps, derive_seed(cfg.seed, {i}));
    std::vector<double> v;
    for (double t : s.grid) v.push_back(linear_limit_mi(y, t, sp.f, sp.c_kappa, sp.c_lambda));
    return v;
  });
  auto out = a.csv("broker.csv", {{"t", "limit time units"},
                                  {"limit_mean", kPrice},
                                  {"limit_stderr", kPrice},
                                  {"market", kPrice},
                                  {"total", kPrice}});
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    RunningStats st;
    for (const auto& v : limits) st.add(v[k]);
    out.row(s.grid[k], st.mean(), st.stderr_mean(), market[k], st.mean() + market[k]);
  }
  out.close();
  a.json_file("summary.json",
              {{"approximation", BrokerReport{}.approximation}, {"n_paths", s.n_paths}, {"kappa_star", s.kappa_star}},
              {{"approximation", "text"}, {"n_paths", kCount}, {"kappa_star", kPrice}});
}

void run_estimate_kappa(const ScenarioConfig& cfg, const EstimateKappaScenario& s, Artifacts& a) {
  SampledPrice sp;
  if (s.model) {
    a.seed("simulation", cfg.seed);
    sp = simulate_simplified_price(*s.model, cfg.seed);
    if (s.export_data)
      write_sampled_price(sp, a.external("prices.csv", {{"t", kTime}, {"price", kPrice}}),
                          a.external("trades.csv", {{"t", kTime}, {"side", kLabel}, {"queue", kQueue}, {"kappa", kPrice}}));
  } else {
    sp = read_sampled_price(s.prices, s.trades, s.xi0);
  }
  const double xi0 = sp.xi0;
  json est;
  est["xi0"] = xi0;
  est["delta"] = sp.delta;
  est["samples"] = sp.prices.size();
  est["trades"] = sp.trades.size();
  est["realized_variance"] = realized_variance(sp);
  est["trade_quadratic_variation"] = trade_quadratic_variation(sp);
  est["kappa_const"] = estimate_kappa_const(sp, xi0);
  est["windows"] = s.windows;
  const auto windows = window_stats(sp, s.windows);
  try {
    const auto f = estimate_kappa_noise(windows);
    est["noise_regression"] = {{"slope", f.slope},
                               {"slope_stderr", f.slope_stderr},
                               {"intercept", f.intercept},
                               {"intercept_stderr", f.intercept_stderr},
                               {"kappa", f.kappa(xi0)}};
  } catch (const CollinearityError& e) {
    est["noise_regression"] = {{"error", e.what()}};
  }
  try {
    const auto f = estimate_kappa_affine(windows, xi0);
    est["affine_regression"] = {{"a", f.a}, {"a_stderr", f.a_stderr}, {"b", f.b}, {"b_stderr", f.b_stderr}};
  } catch (const CollinearityError& e) {
    est["affine_regression"] = {{"error", e.what()}};
  }
  a.json_file("estimates.json", est,
              {{"xi0", "dimensionless"},
               {"delta", kTime},
               {"realized_variance", "price units^2"},
               {"trade_quadratic_variation", "price units^2"},
               {"kappa_const", kPrice},
               {"noise_regression.slope", "price units^2 per trade"},
               {"noise_regression.intercept", "price units^2 per model time unit"},
               {"affine_regression.a", "price units^2"},
               {"affine_regression.b", "price units^2 per queue unit"}});
  auto w = a.csv("windows.csv", {{"window", kCount},
                                 {"length", kTime},
                                 {"rv", "price units^2"},
                                 {"trades", kCount},
                                 {"queue_sum", kQueue}});
  for (std::size_t i = 0; i < windows.size(); ++i)
    w.row(i, windows[i].length, windows[i].rv, windows[i].trades, windows[i].queue_sum);
  w.close();
  std::vector<std::size_t> ladder;
  for (std::size_t m : s.ladder)
    if (m < sp.prices.size() - 1) ladder.push_back(m);
  const auto rows = delta_ladder(sp, xi0, ladder);
  auto d = a.csv("delta_ladder.csv", {{"multiplier", kCount}, {"delta", kTime}, {"rv", "price units^2"}, {"kappa", kPrice}});
  for (std::size_t i = 0; i < rows.size(); ++i) d.row(ladder[i], rows[i].delta, rows[i].rv, rows[i].kappa);
  d.close();
}

void run_rescaling_ladder(const ScenarioConfig& cfg, const RescalingLadderScenario& s, Artifacts& a) {
  RescalingConfig c = s.config;
  c.seed = cfg.seed;
  c.workers = cfg.workers;
  a.seed("limit", derive_seed(cfg.seed, {0}));
  for (std::size_t i = 0; i < c.ladder.size(); ++i)
    a.seed("level/" + std::to_string(i), derive_seed(cfg.seed, {1, i}));
  const auto r = rescaling_consistency(s.limit, s.f, c);
  auto q = a.csv("rescaling_queue.csv", {{"T", "micro time units per limit time unit"},
                                         {"s", "limit time units"},
                                         {"queue_mean", "limit queue units"},
                                         {"queue_stderr", "limit queue units"},
                                         {"queue_exact", "limit queue units"},
                                         {"queue_limit", "limit queue units"},
                                         {"count_mean", "limit count units"},
                                         {"count_stderr", "limit count units"},
                                         {"count_exact", "limit count units"},
                                         {"count_limit", "limit count units"}});
  for (const auto& lvl : r.levels)
    for (std::size_t k = 0; k < r.grid.size(); ++k)
      q.row(lvl.map.T, r.grid[k], lvl.queue_mean[k], lvl.queue_stderr[k], lvl.queue_exact[k], r.queue_limit[k],
            lvl.count_mean[k], lvl.count_stderr[k], lvl.count_exact[k], r.count_limit[k]);
  q.close();
  auto l = a.csv("rescaling_levels.csv", {{"T", "micro time units per limit time unit"},
                                          {"a", "dimensionless"},
                                          {"mu", kRate},
                                          {"beta", kRate},
                                          {"mi_estimate", kPrice},
                                          {"mi_stderr", kPrice},
                                          {"mi_paths", kCount},
                                          {"limit_mi", kPrice},
                                          {"limit_mi_stderr", kPrice},
                                          {"queue_sup_distance", "limit queue units"},
                                          {"count_sup_distance", "limit count units"},
                                          {"exact_queue_distance", "limit queue units"},
                                          {"exact_count_distance", "limit count units"}});
  for (const auto& lvl : r.levels)
    l.row(lvl.map.T, lvl.map.a, lvl.map.mu, lvl.map.beta, lvl.impact.value, lvl.impact.stderr_value,
          lvl.impact.n_paths, r.limit_impact.value, r.limit_impact.stderr_value, lvl.queue_sup_distance,
          lvl.count_sup_distance, lvl.exact_queue_distance, lvl.exact_count_distance);
  l.close();
}

}  // namespace lobimpact::cli
