#include "lobimpact/orderbook.hpp"

#include <algorithm>
#include <stdexcept>

namespace lobimpact {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double table_at(long q_min, const std::vector<double>& v, long q) {
  long i = std::clamp(q - q_min, 0L, static_cast<long>(v.size()) - 1);
  return v[static_cast<std::size_t>(i)];
}

double table_interp(long q_min, const std::vector<double>& v, double x) {
  double pos = std::clamp(x - static_cast<double>(q_min), 0.0, static_cast<double>(v.size() - 1));
  auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  double w = pos - static_cast<double>(i);
  return (1.0 - w) * v[i] + w * v[i + 1];
}

}  // namespace

QueueModel::QueueModel(AffineDifferenceRates rates) : rates_(rates) {
  if (!(rates.c_lambda < 0.0)) throw std::invalid_argument("QueueModel: c_lambda must be negative for mean reversion");
  if (!(rates.floor > 0.0)) throw std::invalid_argument("QueueModel: floor rate must be positive");
  if (!std::isfinite(rates.d_lambda)) throw std::invalid_argument("QueueModel: d_lambda must be finite");
}

QueueModel::QueueModel(TabulatedRates rates) : rates_(std::move(rates)) {
  const auto& t = std::get<TabulatedRates>(rates_);
  if (t.limit.empty() || t.limit.size() != t.cancel.size())
    throw std::invalid_argument("QueueModel: tabulated limit/cancel rates must be non-empty and equally long");
  for (std::size_t i = 0; i < t.limit.size(); ++i)
    if (!(t.limit[i] >= 0.0) || !(t.cancel[i] >= 0.0)) throw std::invalid_argument("QueueModel: rates must be >= 0");
}

double QueueModel::limit_rate(long q) const {
  return std::visit(overloaded{
                        [q](const AffineDifferenceRates& r) {
                          return r.floor + std::max(r.d_lambda + r.c_lambda * static_cast<double>(q), 0.0);
                        },
                        [q](const TabulatedRates& r) { return table_at(r.q_min, r.limit, q); },
                    },
                    rates_);
}

double QueueModel::cancel_rate(long q) const {
  return std::visit(overloaded{
                        [q](const AffineDifferenceRates& r) {
                          return r.floor + std::max(-(r.d_lambda + r.c_lambda * static_cast<double>(q)), 0.0);
                        },
                        [q](const TabulatedRates& r) { return table_at(r.q_min, r.cancel, q); },
                    },
                    rates_);
}

double QueueModel::difference(double x) const {
  return std::visit(overloaded{
                        [x](const AffineDifferenceRates& r) { return r.d_lambda + r.c_lambda * x; },
                        [x](const TabulatedRates& r) {
                          return table_interp(r.q_min, r.limit, x) - table_interp(r.q_min, r.cancel, x);
                        },
                    },
                    rates_);
}

std::optional<AffineDifferenceRates> QueueModel::affine() const {
  if (const auto* a = std::get_if<AffineDifferenceRates>(&rates_)) return *a;
  return std::nullopt;
}

double QueueModel::mean_reversion(long q_lo, long q_hi) const {
  if (const auto* a = std::get_if<AffineDifferenceRates>(&rates_)) return -a->c_lambda;
  double c = std::numeric_limits<double>::infinity();
  for (long q = q_lo; q < q_hi; ++q)
    c = std::min(c, difference(static_cast<double>(q)) - difference(static_cast<double>(q + 1)));
  return c;
}

MixingReport QueueModel::mixing_margin(long q_lo, long q_hi, int k_max) const {
  if (q_hi < q_lo || k_max < 1) throw std::invalid_argument("mixing_margin: empty window");
  MixingReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    double m = std::numeric_limits<double>::infinity();
    for (long q = q_lo; q + k <= q_hi; ++q)
      m = std::min(m, limit_rate(q) - limit_rate(q + k) + cancel_rate(q + k) - cancel_rate(q));
    report.margin.push_back(m);
    report.min_margin = std::min(report.min_margin, m);
  }
  report.mixing = report.min_margin > 0.0;
  return report;
}

QueueModel QueueModel::rescaled(double rate_scale, double size_scale) const {
  const auto* a = std::get_if<AffineDifferenceRates>(&rates_);
  if (!a) throw std::invalid_argument("QueueModel::rescaled: only affine-difference rates can be rescaled");
  return QueueModel(AffineDifferenceRates{a->c_lambda * rate_scale / size_scale, a->d_lambda * rate_scale, a->floor * rate_scale});
}

Kappa::Kappa(KappaSpec spec) : spec_(std::move(spec)) {
  std::visit(overloaded{
                 [](const ConstantKappa& k) {
                   if (!(k.value >= 0.0)) throw std::invalid_argument("Kappa: constant value must be >= 0");
                 },
                 [](const AffineKappa& k) {
                   if (!std::isfinite(k.c) || !std::isfinite(k.d)) throw std::invalid_argument("Kappa: affine coefficients must be finite");
                 },
                 [](const SqrtLogKappa& k) {
                   if (!(k.c1 > 0.0) || !(k.c2 > 0.0)) throw std::invalid_argument("Kappa: sqrt-log needs c1 > 0, c2 > 0");
                 },
                 [](const TabulatedKappa& k) {
                   if (k.values.empty()) throw std::invalid_argument("Kappa: tabulated values are empty");
                   for (double v : k.values)
                     if (!(v >= 0.0)) throw std::invalid_argument("Kappa: tabulated values must be >= 0");
                 },
             },
             spec_);
}

double Kappa::operator()(double q) const {
  return std::visit(overloaded{
                        [](const ConstantKappa& k) { return k.value; },
                        [q](const AffineKappa& k) { return k.c * q + k.d; },
                        [q](const SqrtLogKappa& k) {
                          // log(exp(y) + 1) without overflow
                          double y = -k.c2 * q;
                          double softplus = y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
                          return k.c1 * std::sqrt(softplus);
                        },
                        [q](const TabulatedKappa& k) { return table_interp(k.q_min, k.values, q); },
                    },
                    spec_);
}

std::optional<double> Kappa::affine_slope() const {
  if (const auto* a = std::get_if<AffineKappa>(&spec_)) return a->c;
  if (std::holds_alternative<ConstantKappa>(spec_)) return 0.0;
  return std::nullopt;
}

Kappa Kappa::rescaled(double size_scale) const {
  return std::visit(overloaded{
                        [](const ConstantKappa& k) { return Kappa(k); },
                        [size_scale](AffineKappa k) {
                          k.c /= size_scale;
                          return Kappa(k);
                        },
                        [size_scale](SqrtLogKappa k) {
                          k.c2 /= size_scale;
                          return Kappa(k);
                        },
                        [](const TabulatedKappa&) -> Kappa {
                          throw std::invalid_argument("Kappa::rescaled: tabulated kappa cannot be rescaled");
                        },
                    },
                    spec_);
}

std::vector<std::string> validate_model(const QueueModel& queues, const Kappa& kappa, const Kernel& kernel, long q_lo,
                                        long q_hi, int k_max) {
  std::vector<std::string> violations;
  if (kernel.l1_norm() >= 1.0)
    violations.push_back("stability: ||phi|| = " + std::to_string(kernel.l1_norm()) + " must be < 1");
  for (long q = q_lo; q < q_hi; ++q) {
    if (queues.limit_rate(q + 1) > queues.limit_rate(q)) {
      violations.push_back("monotonicity: lambda^L increases at q = " + std::to_string(q));
      break;
    }
  }
  for (long q = q_lo; q < q_hi; ++q) {
    if (queues.cancel_rate(q + 1) < queues.cancel_rate(q)) {
      violations.push_back("monotonicity: lambda^C decreases at q = " + std::to_string(q));
      break;
    }
  }
  auto mix = queues.mixing_margin(q_lo, q_hi, k_max);
  if (!mix.mixing) violations.push_back("mixing: margin " + std::to_string(mix.min_margin) + " is not positive");
  for (long q = q_lo; q <= q_hi; ++q) {
    double k = kappa(static_cast<double>(q));
    if (!(k >= 0.0) || !std::isfinite(k)) {
      violations.push_back("kappa: must be finite and >= 0 on the queue window, fails at q = " + std::to_string(q));
      break;
    }
  }
  return violations;
}

StrategyProfile::StrategyProfile(std::vector<double> breaks, std::vector<double> rates)
    : breaks_(std::move(breaks)), rates_(std::move(rates)) {
  if (breaks_.size() != rates_.size() + 1) throw std::invalid_argument("StrategyProfile: need one more break than rates");
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i] > breaks_[i - 1])) throw std::invalid_argument("StrategyProfile: breaks must increase");
  if (!breaks_.empty() && breaks_.front() < 0.0) throw std::invalid_argument("StrategyProfile: profile must start at t >= 0");
  for (double r : rates_)
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("StrategyProfile: rates must be finite and >= 0");
}

StrategyProfile StrategyProfile::constant(double rate, double start, double end) { return {{start, end}, {rate}}; }

double StrategyProfile::operator()(double s) const {
  if (breaks_.empty() || s < breaks_.front() || s >= breaks_.back()) return 0.0;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
  return rates_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

double StrategyProfile::integral(double a, double b) const {
  double total = 0.0;
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    double lo = std::max(a, breaks_[i]);
    double hi = std::min(b, breaks_[i + 1]);
    if (hi > lo) total += rates_[i] * (hi - lo);
  }
  return total;
}

double StrategyProfile::sup(double a, double b) const {
  double m = 0.0;
  for (std::size_t i = 0; i < rates_.size(); ++i)
    if (breaks_[i] < b && breaks_[i + 1] > a) m = std::max(m, rates_[i]);
  return m;
}

bool StrategyProfile::is_zero() const noexcept {
  return std::all_of(rates_.begin(), rates_.end(), [](double r) { return r == 0.0; });
}

double StrategyProfile::exp_convolution(double c, double s, double t) const {
  const double upper = std::min(s, t);
  double total = 0.0;
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    double lo = std::max(0.0, breaks_[i]);
    double hi = std::min(upper, breaks_[i + 1]);
    if (!(hi > lo) || rates_[i] == 0.0) continue;
    // int_lo^hi exp(c (s - u)) du
    if (c == 0.0) {
      total += rates_[i] * (hi - lo);
    } else {
      total += rates_[i] * std::exp(c * (s - hi)) * std::expm1(c * (hi - lo)) / c;
    }
  }
  return total;
}

StrategyProfile StrategyProfile::rescaled(double rate_scale, double time_scale) const {
  std::vector<double> b = breaks_;
  std::vector<double> r = rates_;
  for (double& x : b) x *= time_scale;
  for (double& x : r) x *= rate_scale;
  return {std::move(b), std::move(r)};
}

std::vector<double> sample_metaorder(const MetaorderSchedule& schedule, double truncation, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  const auto& br = schedule.intensity.breaks();
  const auto& rt = schedule.intensity.rates();
  for (std::size_t i = 0; i < rt.size(); ++i) {
    if (rt[i] <= 0.0) continue;
    double s = br[i];
    for (;;) {
      s += rng.exponential(rt[i]);
      if (s >= br[i + 1]) break;
      out.push_back(s);
    }
  }
  for (double f : schedule.fixed_times) out.push_back(f);
  std::sort(out.begin(), out.end());
  out.erase(std::upper_bound(out.begin(), out.end(), truncation), out.end());
  return out;
}

long QueuePath::value_at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return values.front();
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

std::string_view to_string(CoupledEventType t) noexcept {
  switch (t) {
    case CoupledEventType::market: return "market";
    case CoupledEventType::limit_common: return "limit_common";
    case CoupledEventType::limit_base: return "limit_base";
    case CoupledEventType::limit_meta: return "limit_meta";
    case CoupledEventType::cancel_common: return "cancel_common";
    case CoupledEventType::cancel_base: return "cancel_base";
    case CoupledEventType::cancel_meta: return "cancel_meta";
    case CoupledEventType::metaorder: return "metaorder";
    case CoupledEventType::market_base_only: return "market_base_only";
    case CoupledEventType::market_meta_only: return "market_meta_only";
  }
  return "?";
}

namespace {

Process process_of(CoupledEventType t) {
  switch (t) {
    case CoupledEventType::limit_common:
    case CoupledEventType::limit_base:
    case CoupledEventType::limit_meta: return Process::limit;
    case CoupledEventType::cancel_common:
    case CoupledEventType::cancel_base:
    case CoupledEventType::cancel_meta: return Process::cancel;
    case CoupledEventType::metaorder: return Process::metaorder;
    default: return Process::market;
  }
}

BookSide simulate_side(const BookConfig& config, std::uint64_t seed, Side side, std::vector<Event>* stream) {
  BookSide out;
  out.q0 = side == Side::ask ? config.q0_ask : config.q0_bid;
  out.market = simulate_hawkes(config.market, config.horizon,
                               derive_seed(seed, {side == Side::ask ? stream::market_ask : stream::market_bid}));
  out.queue_seed = derive_seed(seed, {side == Side::ask ? stream::queue_ask : stream::queue_bid});

  std::vector<ExoEvent> exo;
  exo.reserve(out.market.size());
  for (double t : out.market) exo.push_back({t, -1, -1, CoupledEventType::market});
  VectorSource source{exo};
  CoupledState state{0.0, out.q0, out.q0};
  Rng rng(out.queue_seed);
  out.queue.times.push_back(0.0);
  out.queue.values.push_back(out.q0);
  out.q_before_market.reserve(out.market.size());
  evolve_coupled(config.queues, source, state, config.horizon, rng,
                 [&](CoupledEventType type, const CoupledState& before, const CoupledState& after) {
                   if (type == CoupledEventType::market) out.q_before_market.push_back(before.q_base);
                   out.queue.times.push_back(after.time);
                   out.queue.values.push_back(after.q_base);
                   if (stream) stream->push_back({after.time, process_of(type), side});
                   return true;
                 });
  return out;
}

}  // namespace

BookPath simulate_book(const BookConfig& config, std::uint64_t seed) {
  if (!(config.horizon > 0.0)) throw std::invalid_argument("simulate_book: horizon must be positive");
  if (config.market.kernel.l1_norm() >= 1.0) throw UnstableKernel("simulate_book: ||phi|| >= 1 violates stability");
  BookPath path;
  path.seed = seed;
  path.horizon = config.horizon;
  path.stream.horizon = config.horizon;
  std::vector<Event> ask_events, bid_events;
  path.ask = simulate_side(config, seed, Side::ask, config.record_stream ? &ask_events : nullptr);
  path.bid = simulate_side(config, seed, Side::bid, config.record_stream ? &bid_events : nullptr);
  if (config.record_stream) {
    path.stream.events.resize(ask_events.size() + bid_events.size());
    std::merge(ask_events.begin(), ask_events.end(), bid_events.begin(), bid_events.end(), path.stream.events.begin(),
               [](const Event& a, const Event& b) { return a.time < b.time; });
  }
  return path;
}

CoupledBookPath overlay_metaorder(const BookPath& base, const QueueModel& queues, const MetaorderSchedule& schedule,
                                  double truncation) {
  CoupledBookPath out;
  out.q0 = base.ask.q0;
  out.truncation = truncation;
  out.metaorder_times = sample_metaorder(schedule, truncation, derive_seed(base.seed, {stream::metaorder}));

  std::vector<ExoEvent> exo;
  exo.reserve(base.ask.market.size() + out.metaorder_times.size());
  for (double t : base.ask.market) exo.push_back({t, -1, -1, CoupledEventType::market});
  for (double t : out.metaorder_times) exo.push_back({t, 0, +1, CoupledEventType::metaorder});
  std::stable_sort(exo.begin(), exo.end(), [](const ExoEvent& a, const ExoEvent& b) { return a.time < b.time; });

  VectorSource source{exo};
  CoupledState state{0.0, out.q0, out.q0};
  Rng rng(base.ask.queue_seed);
  evolve_coupled(queues, source, state, base.horizon, rng,
                 [&](CoupledEventType type, const CoupledState&, const CoupledState& after) {
                   out.records.push_back({after.time, after.q_base, after.q_meta, type});
                   return true;
                 });
  return out;
}

GapAudit coupled_difference_jumps(const CoupledBookPath& path) {
  GapAudit audit;
  audit.times.reserve(path.records.size());
  audit.gaps.reserve(path.records.size());
  audit.kinds.reserve(path.records.size());
  long prev = 0;
  for (const auto& r : path.records) {
    const long gap = r.q_meta - r.q_base;
    if (gap < 0) throw CouplingAuditError("coupling audit: perturbed queue below base at t = " + std::to_string(r.time));
    GapJump kind = GapJump::none;
    if (gap > prev) {
      if (r.type != CoupledEventType::metaorder || gap != prev + 1)
        throw CouplingAuditError("coupling audit: gap grew outside a metaorder arrival at t = " + std::to_string(r.time));
      kind = GapJump::injection;
    } else if (gap < prev) {
      if (gap != prev - 1) throw CouplingAuditError("coupling audit: gap fell by more than one at t = " + std::to_string(r.time));
      kind = GapJump::decay;
    }
    audit.times.push_back(r.time);
    audit.gaps.push_back(gap);
    audit.kinds.push_back(kind);
    prev = gap;
  }
  return audit;
}

}  // namespace lobimpact
