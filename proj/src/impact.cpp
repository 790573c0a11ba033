#include "lobimpact/impact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lobimpact/rng.hpp"
#include "lobimpact/stats.hpp"

namespace lobimpact {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bounds used for horizon selection and tail estimates, computed once per call.
struct ModelScales {
  double mixing = 0.0;      // inf_k m_k on the window
  double kappa_sup = 0.0;   // sup kappa on the window
  double kappa_lip = 0.0;   // sup |kappa(q+1) - kappa(q)|
  double amplification = 1.0;  // 1 + ||psi||
};

ModelScales scales_of(const ImpactModel& model, const ImpactConfig& config) {
  ModelScales s;
  const long w = config.mixing_window;
  s.mixing = model.queues.mixing_margin(-w, w, 10).min_margin;
  if (!(s.mixing > 0.0)) throw std::invalid_argument("impact: queue model is not mixing on the configured window");
  for (long q = -w; q <= w; ++q) {
    const double k = model.kappa(static_cast<double>(q));
    s.kappa_sup = std::max(s.kappa_sup, k);
    s.kappa_lip = std::max(s.kappa_lip, std::abs(model.kappa(static_cast<double>(q + 1)) - k));
  }
  s.amplification = 1.0 + psi_l1_exact(model.market.kernel);
  return s;
}

void check_model(const ImpactModel& model) {
  if (model.market.kernel.l1_norm() >= 1.0) throw UnstableKernel("impact: ||phi|| >= 1 violates stability");
}

double window_of(const ImpactConfig& config, const ModelScales& sc, double t) {
  if (config.t_max > 0.0) {
    if (!(config.t_max > t)) throw std::invalid_argument("impact: t_max must exceed t");
    return config.t_max - t;
  }
  return config.horizon_mixing_times / sc.mixing;
}

// Lazily merged Hawkes streams feeding the coupled queue engine.
struct StreamSlot {
  HawkesSampler sampler;
  int d_base;
  int d_meta;
  CoupledEventType type;
  double next_time = 0.0;
};

class MergedSource {
 public:
  explicit MergedSource(std::vector<StreamSlot> slots) : slots_(std::move(slots)) {
    for (auto& s : slots_) s.next_time = s.sampler.next();
  }
  [[nodiscard]] double peek_time() const {
    double t = kInf;
    for (const auto& s : slots_) t = std::min(t, s.next_time);
    return t;
  }
  ExoEvent pop() {
    std::size_t best = 0;
    for (std::size_t i = 1; i < slots_.size(); ++i)
      if (slots_[i].next_time < slots_[best].next_time) best = i;
    auto& s = slots_[best];
    ExoEvent e{s.next_time, s.d_base, s.d_meta, s.type};
    s.next_time = s.sampler.next();
    return e;
  }
  [[nodiscard]] const HawkesSampler& sampler(std::size_t i) const { return slots_[i].sampler; }

 private:
  std::vector<StreamSlot> slots_;
};

struct ContinuationResult {
  double by_window = 0.0;   // accrued on (t, t + W]
  double by_doubled = 0.0;  // accrued on (t, t + 2W]
  bool unfinished = false;  // still running at t + W
  double tail = 0.0;        // tail estimate beyond t + W
};

// Ask-side continuation of a coupled pair after truncation time t.
ContinuationResult mi_continuation(const ImpactModel& model, const ModelScales& sc, std::span<const double> history,
                                   double t, CoupledState start, double window, std::uint64_t seed) {
  ContinuationResult out;
  if (start.q_base == start.q_meta) return out;
  const Baseline fresh_base = model.market.baseline.shifted(t);
  const Baseline lifted = Baseline::continuation(model.market.kernel, history, t);
  std::vector<StreamSlot> slots;
  slots.push_back({HawkesSampler({fresh_base, model.market.kernel}, 2.0 * window, derive_seed(seed, {0})), -1, -1,
                   CoupledEventType::market});
  slots.push_back({HawkesSampler({lifted, model.market.kernel}, 2.0 * window, derive_seed(seed, {1})), -1, -1,
                   CoupledEventType::market});
  MergedSource source(std::move(slots));
  Rng rng(derive_seed(seed, {stream::queue_ask}));
  CoupledState state{0.0, start.q_base, start.q_meta};
  CoupledState at_window = state;
  double acc = 0.0;
  evolve_coupled(model.queues, source, state, 2.0 * window, rng,
                 [&](CoupledEventType type, const CoupledState& before, const CoupledState& after) {
                   if (type == CoupledEventType::market)
                     acc += model.kappa(static_cast<double>(before.q_meta)) - model.kappa(static_cast<double>(before.q_base));
                   if (after.time <= window) {
                     out.by_window = acc;
                     at_window = after;
                   }
                   return after.q_base != after.q_meta;
                 });
  out.by_doubled = acc;
  if (at_window.q_base != at_window.q_meta) {
    out.unfinished = true;
    const double gap = static_cast<double>(at_window.q_meta - at_window.q_base);
    const double rate =
        (fresh_base.rate(window) + lifted.rate(window)) * sc.amplification;
    out.tail = std::abs(model.kappa(static_cast<double>(at_window.q_meta)) -
                        model.kappa(static_cast<double>(at_window.q_base))) *
               gap / sc.mixing * rate;
  }
  return out;
}

struct HistoryOutcome {
  std::vector<double> value;    // per grid point, window W
  std::vector<double> doubled;  // per grid point, window 2W
  std::vector<double> tail;
  std::vector<std::size_t> unfinished;
};

HistoryOutcome run_history(const ImpactModel& model, const ModelScales& sc, const MetaorderSchedule& schedule,
                           std::span<const double> grid, std::span<const double> windows, std::size_t continuations,
                           std::uint64_t seed) {
  const double t_last = grid.back();
  HistoryOutcome out;
  const std::size_t n = grid.size();
  out.value.assign(n, 0.0);
  out.doubled.assign(n, 0.0);
  out.tail.assign(n, 0.0);
  out.unfinished.assign(n, 0);

  const auto market = t_last > 0.0 ? simulate_hawkes(model.market, t_last, derive_seed(seed, {stream::market_ask}))
                                   : std::vector<double>{};
  const auto orders = sample_metaorder(schedule, t_last, derive_seed(seed, {stream::metaorder}));
  std::vector<ExoEvent> exo;
  exo.reserve(market.size() + orders.size());
  for (double u : market) exo.push_back({u, -1, -1, CoupledEventType::market});
  for (double u : orders) exo.push_back({u, 0, +1, CoupledEventType::metaorder});
  std::stable_sort(exo.begin(), exo.end(), [](const ExoEvent& a, const ExoEvent& b) { return a.time < b.time; });

  VectorSource source{exo};
  Rng rng(derive_seed(seed, {stream::queue_ask}));
  CoupledState state{0.0, model.q0_ask, model.q0_ask};
  double realized = 0.0;
  auto observer = [&](CoupledEventType type, const CoupledState& before, const CoupledState&) {
    if (type == CoupledEventType::market)
      realized += model.kappa(static_cast<double>(before.q_meta)) - model.kappa(static_cast<double>(before.q_base));
    return true;
  };

  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid[k];
    evolve_coupled(model.queues, source, state, t, rng, observer);
    const auto hist_end = std::upper_bound(market.begin(), market.end(), t);
    std::span<const double> history(market.data(), static_cast<std::size_t>(hist_end - market.begin()));
    double sum_w = 0.0, sum_2w = 0.0;
    for (std::size_t c = 0; c < continuations; ++c) {
      auto r = mi_continuation(model, sc, history, t, state, windows[k], derive_seed(seed, {stream::continuation, k, c}));
      sum_w += r.by_window;
      sum_2w += r.by_doubled;
      out.tail[k] += r.tail;
      out.unfinished[k] += r.unfinished ? 1 : 0;
    }
    const double m = static_cast<double>(continuations);
    out.value[k] = realized + sum_w / m;
    out.doubled[k] = realized + sum_2w / m;
    out.tail[k] /= m;
  }
  return out;
}

void add_diagnostics(ImpactEstimate& e, double doubled_stderr) {
  const double band = 2.0 * std::max(e.stderr_value, doubled_stderr);
  if (std::abs(e.doubled - e.value) > band) {
    std::ostringstream msg;
    msg << "non-convergence: doubling T_max moves the estimate at t = " << e.t << " from " << e.value << " to "
        << e.doubled;
    e.warnings.push_back(msg.str());
  }
  if (e.tail_bound > 0.1 * e.stderr_value && e.tail_bound > 0.0) {
    std::ostringstream msg;
    msg << "tail: estimated contribution beyond T_max (" << e.tail_bound << ") exceeds 10% of the standard error";
    e.warnings.push_back(msg.str());
  }
}

}  // namespace

ImpactTrajectory impact_trajectory(const ImpactModel& model, const MetaorderSchedule& schedule,
                                   std::span<const double> grid, const ImpactConfig& config) {
  check_model(model);
  if (grid.empty()) throw std::invalid_argument("impact_trajectory: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw std::invalid_argument("impact_trajectory: grid times must be >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("impact_trajectory: grid must increase");
  }
  if (config.n_histories < 2 || config.continuations < 1)
    throw std::invalid_argument("impact: need n_histories >= 2 and continuations >= 1");

  const ModelScales sc = scales_of(model, config);
  std::vector<double> windows(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) windows[k] = window_of(config, sc, grid[k]);

  auto runs = parallel_map<HistoryOutcome>(config.n_histories, config.workers, [&](std::size_t h) {
    return run_history(model, sc, schedule, grid, windows, config.continuations, derive_seed(config.seed, {h}));
  });

  ImpactTrajectory out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    RunningStats v, d;
    double tail = 0.0;
    std::size_t unfinished = 0;
    for (const auto& r : runs) {
      v.add(r.value[k]);
      d.add(r.doubled[k]);
      tail += r.tail[k];
      unfinished += r.unfinished[k];
    }
    ImpactEstimate e;
    e.t = grid[k];
    e.value = v.mean();
    e.stderr_value = v.stderr_mean();
    e.doubled = d.mean();
    e.n_paths = v.count();
    e.horizon = grid[k] + windows[k];
    e.tail_bound = tail / static_cast<double>(runs.size());
    e.unfinished = unfinished;
    add_diagnostics(e, d.stderr_mean());
    out.points.push_back(std::move(e));
  }
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    RunningStats inc, inc2;
    for (const auto& r : runs) {
      inc.add(r.value[k + 1] - r.value[k]);
      inc2.add(r.doubled[k + 1] - r.doubled[k]);
    }
    ImpactEstimate e;
    e.t = grid[k + 1];
    e.value = inc.mean();
    e.stderr_value = inc.stderr_mean();
    e.doubled = inc2.mean();
    e.n_paths = inc.count();
    e.horizon = out.points[k + 1].horizon;
    e.tail_bound = out.points[k].tail_bound + out.points[k + 1].tail_bound;
    out.increments.push_back(std::move(e));
  }
  return out;
}

ImpactEstimate market_impact_at(const ImpactModel& model, const MetaorderSchedule& schedule, double t,
                                const ImpactConfig& config) {
  const double grid[] = {t};
  return std::move(impact_trajectory(model, schedule, grid, config).points.front());
}

PriceEstimate price_at(const ImpactModel& model, const BookPath& observed, double t, const ImpactConfig& config) {
  check_model(model);
  if (!(t >= 0.0) || t > observed.horizon) throw std::invalid_argument("price_at: t must lie in [0, observed horizon]");
  if (config.continuations < 2) throw std::invalid_argument("price_at: need at least two continuations");
  const ModelScales sc = scales_of(model, config);
  const double window = window_of(config, sc, t);

  PriceEstimate out;
  auto realized = [&](const BookSide& side) {
    double sum = 0.0;
    for (std::size_t i = 0; i < side.market.size() && side.market[i] <= t; ++i)
      sum += model.kappa(static_cast<double>(side.q_before_market[i]));
    return sum;
  };
  out.realized = realized(observed.ask) - realized(observed.bid);

  auto prefix = [t](const std::vector<double>& v) {
    return std::vector<double>(v.begin(), std::upper_bound(v.begin(), v.end(), t));
  };
  const auto hist_a = prefix(observed.ask.market);
  const auto hist_b = prefix(observed.bid.market);
  const long qa = observed.ask.queue.value_at(t);
  const long qb = observed.bid.queue.value_at(t);
  const Baseline fresh_base = model.market.baseline.shifted(t);
  const Baseline lifted_a = Baseline::continuation(model.market.kernel, hist_a, t);
  const Baseline lifted_b = Baseline::continuation(model.market.kernel, hist_b, t);

  // The ask queue is the engine's base coordinate and the bid queue its second
  // coordinate; fresh orders hit both sides, history-driven orders only their own.
  auto runs = parallel_map<ContinuationResult>(config.continuations, config.workers, [&](std::size_t c) {
    const std::uint64_t seed = derive_seed(config.seed, {stream::continuation, c});
    std::vector<StreamSlot> slots;
    slots.push_back({HawkesSampler({fresh_base, model.market.kernel}, 2.0 * window, derive_seed(seed, {0})), -1, -1,
                     CoupledEventType::market});
    slots.push_back({HawkesSampler({lifted_a, model.market.kernel}, 2.0 * window, derive_seed(seed, {1})), -1, 0,
                     CoupledEventType::market_base_only});
    slots.push_back({HawkesSampler({lifted_b, model.market.kernel}, 2.0 * window, derive_seed(seed, {2})), 0, -1,
                     CoupledEventType::market_meta_only});
    MergedSource source(std::move(slots));
    Rng rng(derive_seed(seed, {stream::queue_ask}));
    CoupledState state{0.0, qa, qb};
    ContinuationResult r;
    double acc = 0.0;
    bool window_done = false;
    auto remaining = [&](double s) {
      return source.sampler(1).expected_remaining(s) + source.sampler(2).expected_remaining(s);
    };
    auto tail_at = [&](const CoupledState& st) {
      const double rem = remaining(st.time);
      const double rate = fresh_base.rate(st.time) * sc.amplification;
      double tail = rem * (sc.kappa_sup + sc.kappa_lip * rate / sc.mixing);
      const double gap = std::abs(static_cast<double>(st.q_meta - st.q_base));
      tail += std::abs(model.kappa(static_cast<double>(st.q_base)) - model.kappa(static_cast<double>(st.q_meta))) *
              gap / sc.mixing * rate;
      return tail;
    };
    CoupledState last = state;
    bool stopped = false;
    if (qa == qb && remaining(0.0) < config.continuation_mass_tol) {
      stopped = true;
    } else {
      evolve_coupled(model.queues, source, state, 2.0 * window, rng,
                     [&](CoupledEventType type, const CoupledState& before, const CoupledState& after) {
                       if (!window_done && after.time > window) {
                         window_done = true;
                         r.by_window = acc;
                         r.unfinished = true;
                         r.tail = tail_at(last);
                       }
                       const double ka = model.kappa(static_cast<double>(before.q_base));
                       const double kb = model.kappa(static_cast<double>(before.q_meta));
                       if (type == CoupledEventType::market) acc += ka - kb;
                       if (type == CoupledEventType::market_base_only) acc += ka;
                       if (type == CoupledEventType::market_meta_only) acc -= kb;
                       last = after;
                       if (after.q_base == after.q_meta && remaining(after.time) < config.continuation_mass_tol) {
                         stopped = true;
                         return false;
                       }
                       return true;
                     });
    }
    if (!window_done) {
      r.by_window = acc;
      if (!stopped) {
        r.unfinished = true;
        r.tail = tail_at(last);
      }
    }
    r.by_doubled = acc;
    return r;
  });

  RunningStats v, d;
  double tail = 0.0;
  std::size_t unfinished = 0;
  for (const auto& r : runs) {
    v.add(r.by_window);
    d.add(r.by_doubled);
    tail += r.tail;
    unfinished += r.unfinished ? 1 : 0;
  }
  auto& e = out.correction;
  e.t = t;
  e.value = v.mean();
  e.stderr_value = v.stderr_mean();
  e.doubled = d.mean();
  e.n_paths = v.count();
  e.horizon = t + window;
  e.tail_bound = tail / static_cast<double>(runs.size());
  e.unfinished = unfinished;
  add_diagnostics(e, d.stderr_mean());
  return out;
}

VarianceComparison crn_variance_benchmark(const ImpactModel& model, const MetaorderSchedule& schedule, double t,
                                          double t_max, std::size_t n_paths, std::uint64_t seed) {
  check_model(model);
  if (!(t_max > t) || n_paths < 2) throw std::invalid_argument("crn_variance_benchmark: need t_max > t and n_paths >= 2");
  BookConfig book;
  book.queues = model.queues;
  book.market = model.market;
  book.q0_ask = model.q0_ask;
  book.q0_bid = model.q0_bid;
  book.horizon = t_max;
  book.record_stream = false;

  // kappa-weighted ask flow seen by one coordinate of an overlay, pre-trade queue values
  auto weighted = [&](const CoupledBookPath& p, bool meta) {
    double sum = 0.0;
    long q = p.q0, qm = p.q0;
    for (const auto& r : p.records) {
      if (r.type == CoupledEventType::market) sum += model.kappa(static_cast<double>(meta ? qm : q));
      q = r.q_base;
      qm = r.q_meta;
    }
    return sum;
  };

  RunningStats coupled, independent;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const auto s1 = derive_seed(seed, {i, 0});
    const auto s2 = derive_seed(seed, {i, 1});
    const auto base1 = simulate_book(book, s1);
    const auto base2 = simulate_book(book, s2);
    const auto p1 = overlay_metaorder(base1, model.queues, schedule, t);
    const auto p2 = overlay_metaorder(base2, model.queues, schedule, t);
    coupled.add(weighted(p1, true) - weighted(p1, false));
    independent.add(weighted(p1, true) - weighted(p2, false));
  }
  VarianceComparison out;
  out.coupled_variance = coupled.variance();
  out.independent_variance = independent.variance();
  out.coupled_mean = coupled.mean();
  out.independent_mean = independent.mean();
  out.n_paths = n_paths;
  return out;
}

}  // namespace lobimpact
