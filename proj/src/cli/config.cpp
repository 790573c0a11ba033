#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "lobimpact/cli.hpp"
#include "lobimpact/kernels.hpp"

namespace lobimpact::cli {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out = std::to_string(v.size()) + " config violation" + (v.size() == 1 ? "" : "s") + ":";
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

std::string fmt_number(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

using Check = std::function<std::string(double)>;

Check positive() {
  return [](double x) { return x > 0.0 ? "" : "must be > 0"; };
}
Check nonnegative() {
  return [](double x) { return x >= 0.0 ? "" : "must be >= 0"; };
}
Check negative() {
  return [](double x) { return x < 0.0 ? "" : "must be < 0"; };
}
Check open_unit() {
  return [](double x) { return x > 0.0 && x < 1.0 ? "" : "must lie in (0, 1)"; };
}

// One JSON object being read. Every key it hands out is remembered so that
// finish() can flag the rest as unknown; the values actually used (defaults
// included) are collected into `out` for the manifest.
class Node {
 public:
  Node(const json* j, std::string path, std::vector<std::string>* issues, Node* parent = nullptr, std::string key = {})
      : j_(j), path_(std::move(path)), issues_(issues), parent_(parent), key_(std::move(key)), start_(issues->size()) {
    if (j_ && !j_->is_object()) {
      issue("", "must be an object");
      j_ = nullptr;
    }
  }
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;
  ~Node() { finish(); }

  [[nodiscard]] bool has(const std::string& key) const { return j_ && j_->contains(key); }

  double number(const std::string& key, double def, const Check& check = {}) {
    double v = def;
    if (const json* x = get(key)) {
      if (x->is_number())
        v = x->get<double>();
      else
        issue(key, "expected a number");
    }
    if (!std::isfinite(v)) issue(key, "must be finite");
    if (check) {
      const auto msg = check(v);
      if (!msg.empty()) issue(key, msg + " (got " + fmt_number(v) + ")");
    }
    out_[key] = v;
    return v;
  }

  long integer(const std::string& key, long def, long lo = std::numeric_limits<long>::min()) {
    long v = def;
    if (const json* x = get(key)) {
      if (x->is_number_integer())
        v = x->get<long>();
      else
        issue(key, "expected an integer");
    }
    if (v < lo) issue(key, "must be >= " + std::to_string(lo) + " (got " + std::to_string(v) + ")");
    out_[key] = v;
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def, std::uint64_t lo = 0) {
    std::uint64_t v = def;
    if (const json* x = get(key)) {
      if (x->is_number_unsigned() || (x->is_number_integer() && x->get<std::int64_t>() >= 0))
        v = x->get<std::uint64_t>();
      else
        issue(key, "expected a nonnegative integer");
    }
    if (v < lo) issue(key, "must be >= " + std::to_string(lo) + " (got " + std::to_string(v) + ")");
    out_[key] = v;
    return v;
  }

  bool boolean(const std::string& key, bool def) {
    bool v = def;
    if (const json* x = get(key)) {
      if (x->is_boolean())
        v = x->get<bool>();
      else
        issue(key, "expected true or false");
    }
    out_[key] = v;
    return v;
  }

  std::string string(const std::string& key, std::string def, const std::vector<std::string>& allowed = {}) {
    std::string v = std::move(def);
    if (const json* x = get(key)) {
      if (x->is_string())
        v = x->get<std::string>();
      else
        issue(key, "expected a string");
    }
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      issue(key, "unknown value \"" + v + "\" (expected one of: " + list + ")");
    }
    out_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def, const Check& check = {},
                              bool nonempty = true) {
    std::vector<double> v = std::move(def);
    if (const json* x = get(key)) {
      if (!x->is_array()) {
        issue(key, "expected an array of numbers");
      } else {
        v.clear();
        for (const auto& e : *x) {
          if (!e.is_number()) {
            issue(key, "expected an array of numbers");
            break;
          }
          v.push_back(e.get<double>());
        }
      }
    }
    if (nonempty && v.empty()) issue(key, "must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) issue(key + "[" + std::to_string(i) + "]", "must be finite");
      if (check) {
        const auto msg = check(v[i]);
        if (!msg.empty()) issue(key + "[" + std::to_string(i) + "]", msg + " (got " + fmt_number(v[i]) + ")");
      }
    }
    out_[key] = v;
    return v;
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> def) {
    std::vector<std::size_t> v = std::move(def);
    if (const json* x = get(key)) {
      bool ok = x->is_array() && !x->empty();
      if (ok) {
        v.clear();
        for (const auto& e : *x) {
          if (!e.is_number_integer() || e.get<std::int64_t>() <= 0) {
            ok = false;
            break;
          }
          v.push_back(e.get<std::size_t>());
        }
      }
      if (!ok) issue(key, "expected a nonempty array of positive integers");
    }
    out_[key] = v;
    return v;
  }

  // The child writes its resolved values back here when it finishes.
  [[nodiscard]] const json* child_json(const std::string& key) {
    used_.insert(key);
    return j_ && j_->contains(key) ? &j_->at(key) : nullptr;
  }
  [[nodiscard]] std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[nodiscard]] std::vector<std::string>* issues() const { return issues_; }

  void issue(const std::string& key, const std::string& msg) {
    const std::string where = key.empty() ? path_ : child_path(key);
    issues_->push_back((where.empty() ? std::string("config") : where) + ": " + msg);
  }

  void finish() {
    if (done_) return;
    done_ = true;
    if (j_ && check_unknown_)
      for (const auto& [k, v] : j_->items())
        if (!used_.count(k)) issue(k, "unknown key");
    if (parent_) parent_->out_[key_] = out_;
  }

  [[nodiscard]] const json& resolved() const { return out_; }
  void skip_unknown_check() { check_unknown_ = false; }
  [[nodiscard]] bool has_new_issues() const { return issues_->size() > start_; }

 private:
  const json* get(const std::string& key) {
    used_.insert(key);
    if (!j_) return nullptr;
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  const json* j_;
  std::string path_;
  std::vector<std::string>* issues_;
  Node* parent_;
  std::string key_;
  std::set<std::string> used_;
  json out_ = json::object();
  bool done_ = false;
  bool check_unknown_ = true;
  std::size_t start_ = 0;
};

Node child(Node& parent, const std::string& key) {
  return Node(parent.child_json(key), parent.child_path(key), parent.issues(), &parent, key);
}

// Constructors re-check their arguments; a rejection becomes a violation and
// parsing goes on with the fallback so later keys are still examined.
template <class F, class T>
T guarded(Node& n, F&& make, T fallback) {
  if (n.has_new_issues()) return fallback;  // already reported field by field
  try {
    return make();
  } catch (const std::exception& e) {
    n.issue("", e.what());
    return fallback;
  }
}

QueueModel parse_queues(Node&& n, AffineDifferenceRates def) {
  const auto type = n.string("type", "affine", {"affine", "tabulated"});
  if (type == "tabulated") {
    TabulatedRates r;
    r.q_min = n.integer("q_min", 0);
    r.limit = n.numbers("limit", {}, nonnegative());
    r.cancel = n.numbers("cancel", {}, nonnegative());
    if (r.limit.size() != r.cancel.size()) n.issue("cancel", "must have as many entries as limit");
    if (!r.limit.empty() && r.limit.size() == r.cancel.size()) return guarded(n, [&] { return QueueModel(r); }, QueueModel(def));
    return QueueModel(def);
  }
  AffineDifferenceRates r;
  r.c_lambda = n.number("c_lambda", def.c_lambda, negative());
  r.d_lambda = n.number("d_lambda", def.d_lambda);
  r.floor = n.number("floor", def.floor, positive());
  return guarded(n, [&] { return QueueModel(r); }, QueueModel(def));
}

Kappa parse_kappa(Node&& n, KappaSpec def) {
  static const char* names[] = {"constant", "affine", "sqrtlog", "tabulated"};
  const auto type = n.string("type", names[def.index()], {"constant", "affine", "sqrtlog", "tabulated"});
  if (type == "constant") {
    const auto d = std::holds_alternative<ConstantKappa>(def) ? std::get<ConstantKappa>(def) : ConstantKappa{};
    const ConstantKappa k{n.number("value", d.value, nonnegative())};
    return guarded(n, [&] { return Kappa(k); }, Kappa(ConstantKappa{}));
  }
  if (type == "affine") {
    const auto d = std::holds_alternative<AffineKappa>(def) ? std::get<AffineKappa>(def) : AffineKappa{};
    AffineKappa k;
    k.c = n.number("c", d.c);
    k.d = n.number("d", d.d);
    return guarded(n, [&] { return Kappa(k); }, Kappa(ConstantKappa{}));
  }
  if (type == "tabulated") {
    TabulatedKappa k;
    k.q_min = n.integer("q_min", 0);
    k.values = n.numbers("values", {}, nonnegative());
    if (!k.values.empty()) return guarded(n, [&] { return Kappa(k); }, Kappa(ConstantKappa{}));
    return Kappa(ConstantKappa{});
  }
  const auto d = std::holds_alternative<SqrtLogKappa>(def) ? std::get<SqrtLogKappa>(def) : SqrtLogKappa{};
  SqrtLogKappa k;
  k.c1 = n.number("c1", d.c1, positive());
  k.c2 = n.number("c2", d.c2, positive());
  return guarded(n, [&] { return Kappa(k); }, Kappa(ConstantKappa{}));
}

// Every scenario that simulates order flow needs a subcritical Hawkes process.
HawkesParams parse_market(Node&& n, double mu_def = 1.0) {
  HawkesParams p;
  p.baseline = Baseline::constant(n.number("mu", mu_def, positive()));
  Node k = child(n, "kernel");
  const auto type = k.string("type", "exponential", {"exponential", "power-law"});
  double norm = 0.0;
  if (type == "power-law") {
    PowerLawKernel pk;
    pk.norm = k.number("norm", 0.5, nonnegative());
    pk.alpha = k.number("alpha", 0.6, positive());
    pk.cutoff = k.number("cutoff", 1.0, positive());
    norm = pk.norm;
    if (norm < 1.0 && pk.alpha > 0.0 && pk.cutoff > 0.0) p.kernel = guarded(k, [&] { return Kernel(pk); }, p.kernel);
  } else {
    ExponentialKernel ek;
    ek.a = k.number("a", 0.5, nonnegative());
    ek.b = k.number("b", 1.0, positive());
    norm = ek.b > 0.0 ? ek.a / ek.b : 0.0;
    if (norm < 1.0 && ek.b > 0.0) p.kernel = guarded(k, [&] { return Kernel(ek); }, p.kernel);
  }
  if (!(norm < 1.0))
    k.issue("", "||phi|| = " + fmt_number(norm) +
                    " >= 1 violates the stability condition of the impact theorem (the market-order Hawkes "
                    "process must be subcritical, ||phi|| < 1)");
  return p;
}

StrategyProfile parse_profile(Node&& n, double rate, double start, double end) {
  if (n.has("breaks") || n.has("rates")) {
    auto breaks = n.numbers("breaks", {}, nonnegative());
    auto rates = n.numbers("rates", {}, nonnegative());
    try {
      return StrategyProfile(std::move(breaks), std::move(rates));
    } catch (const std::invalid_argument& e) {
      n.issue("", e.what());
      return {};
    }
  }
  const double r = n.number("rate", rate, nonnegative());
  const double s = n.number("start", start, nonnegative());
  const double e = n.number("end", end);
  if (!(e > s)) {
    n.issue("end", "must be > start");
    return {};
  }
  return StrategyProfile::constant(r, s, e);
}

RoughVolParams parse_rough(Node&& n) {
  RoughVolParams p;
  p.alpha = n.number("alpha", p.alpha, [](double a) { return a > 0.5 && a < 1.0 ? "" : "must lie in (1/2, 1)"; });
  p.lambda = n.number("lambda", p.lambda, positive());
  p.mu_star = n.number("mu_star", p.mu_star, positive());
  return p;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(std::pow(10.0, lo + (hi - lo) * i / (n - 1)));
  return v;
}

void check_increasing(Node& n, const std::string& key, const std::vector<double>& v, bool strict) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (strict ? !(v[i] > v[i - 1]) : !(v[i] >= v[i - 1])) {
      n.issue(key, strict ? "must be strictly increasing" : "must be nondecreasing");
      return;
    }
}

// The assumptions of the impact theorem on the validation window, reported as config violations.
void check_micro_model(Node& n, const QueueModel& queues, const Kappa& kappa, const Kernel& kernel, long window) {
  for (const auto& v : validate_model(queues, kappa, kernel, -window, window, 5))
    if (v.rfind("stability", 0) != 0) n.issue("", "model assumption violated: " + v);
}

LimitImpactSpec parse_limit_spec(Node& n, AffineDifferenceRates queues_def, KappaSpec kappa_def, double h_def) {
  LimitImpactSpec spec;
  spec.rough = parse_rough(child(n, "rough"));
  spec.queues = parse_queues(child(n, "queues"), queues_def);
  spec.kappa = parse_kappa(child(n, "kappa"), kappa_def);
  spec.q0 = n.number("q0", 0.0);
  spec.h = n.number("h", h_def, positive());
  spec.horizon = n.number("horizon", 4.0, positive());
  spec.tail_tolerance = n.number("tail_tolerance", 0.05, open_unit());
  spec.reversion_window = n.integer("reversion_window", 50, 1);
  return spec;
}

void check_tail(Node& n, const LimitImpactSpec& spec, double t) {
  if (t > spec.horizon) {
    n.issue("horizon", "must be >= t");
    return;
  }
  const double c = limit_mean_reversion(spec);
  if (!(c > 0.0)) {
    n.issue("queues", "lambda^L - lambda^C has no mean reversion on the window");
    return;
  }
  const double tail = std::exp(-c * (spec.horizon - t));
  if (tail > spec.tail_tolerance)
    n.issue("horizon", "tail factor exp(-c (A - t)) = " + fmt_number(tail) + " exceeds tail_tolerance " +
                           fmt_number(spec.tail_tolerance) + "; raise horizon");
}

ImpactConfig parse_impact_config(Node&& n, std::size_t histories_def) {
  ImpactConfig c;
  c.n_histories = n.unsigned_integer("n_histories", histories_def);
  c.continuations = n.unsigned_integer("continuations", 1, 1);
  c.t_max = n.number("t_max", 0.0, nonnegative());
  c.horizon_mixing_times = n.number("horizon_mixing_times", 50.0, positive());
  c.continuation_mass_tol = n.number("continuation_mass_tol", 1e-3, positive());
  c.mixing_window = n.integer("mixing_window", 200, 1);
  return c;
}

ScenarioParams parse_simulate_book(Node& n) {
  SimulateBookScenario s;
  s.book.queues = parse_queues(child(n, "queues"), AffineDifferenceRates{-1.0, 1.0, 0.5});
  s.book.market = parse_market(child(n, "market"));
  s.book.q0_ask = n.integer("q0_ask", 0);
  s.book.q0_bid = n.integer("q0_bid", 0);
  s.book.horizon = n.number("horizon", 100.0, positive());
  s.paths = n.unsigned_integer("paths", 1, 1);
  return s;
}

ScenarioParams parse_micro_impact(Node& n) {
  MicroImpactScenario s;
  s.model.queues = parse_queues(child(n, "queues"), AffineDifferenceRates{-1.0, 5.0, 0.5});
  s.model.kappa = parse_kappa(child(n, "kappa"), AffineKappa{-0.02, 0.2});
  s.model.market = parse_market(child(n, "market"));
  s.model.q0_ask = n.integer("q0_ask", 3);
  s.model.q0_bid = n.integer("q0_bid", 3);
  s.schedule.intensity = parse_profile(child(n, "profile"), 1.0, 0.0, 1.0);
  s.schedule.fixed_times = n.numbers("fixed_times", {}, nonnegative(), false);
  std::sort(s.schedule.fixed_times.begin(), s.schedule.fixed_times.end());
  s.grid = n.numbers("grid", {0.5, 1.0, 2.0, 4.0}, nonnegative());
  check_increasing(n, "grid", s.grid, true);
  s.impact = parse_impact_config(child(n, "ensemble"), 1000);
  if (s.impact.n_histories == 0) n.issue("ensemble.n_histories", "must be >= 1");
  // kappa >= 0, monotone rates and mixing are checked on [-validation_window, validation_window]
  const long window = n.integer("validation_window", 10, 1);
  check_micro_model(n, s.model.queues, s.model.kappa, s.model.market.kernel, window);
  return s;
}

ScenarioParams parse_scaling_mi(Node& n) {
  ScalingMiScenario s;
  s.spec = parse_limit_spec(n, AffineDifferenceRates{-1.0, 0.025, 0.5}, SqrtLogKappa{0.01, 1000.0}, 1.0 / 512.0);
  s.gammas = n.numbers("gammas", logspace(-2.0, 0.0, 9), positive());
  s.t = n.number("t", 1.0, positive());
  s.start = n.number("start", 0.0, nonnegative());
  s.end = n.number("end", 1.0);
  if (!(s.end > s.start)) n.issue("end", "must be > start");
  s.n_paths = n.unsigned_integer("n_paths", 10000, 2);
  check_tail(n, s.spec, s.t);
  return s;
}

ScenarioParams parse_shape_fit(Node& n) {
  ShapeFitScenario s;
  s.shape.queues = parse_queues(child(n, "queues"), AffineDifferenceRates{-1.0, 0.025, 0.5});
  s.shape.kappa = parse_kappa(child(n, "kappa"), SqrtLogKappa{0.01, 1000.0});
  s.shape.m = n.number("m", 1.0);
  s.shape.gammas = n.numbers("gammas", logspace(-4.0, 2.0, 25), positive());
  s.shape.q_lo = n.number("q_lo", -1e4);
  s.shape.q_hi = n.number("q_hi", 1e4);
  if (!(s.shape.q_hi > s.shape.q_lo)) n.issue("q_hi", "must be > q_lo");
  const auto [lo, hi] = std::minmax_element(s.shape.gammas.begin(), s.shape.gammas.end());
  s.fit_lo = n.number("fit_lo", s.shape.gammas.empty() ? 0.0 : *lo, positive());
  s.fit_hi = n.number("fit_hi", s.shape.gammas.empty() ? 0.0 : *hi, positive());
  if (!(s.fit_hi > s.fit_lo)) n.issue("fit_hi", "must be > fit_lo");
  std::size_t in_fit = 0;
  for (double g : s.shape.gammas) in_fit += g >= s.fit_lo && g <= s.fit_hi;
  if (in_fit < 2) n.issue("gammas", "need at least 2 gammas inside [fit_lo, fit_hi]");
  // D decreasing: its range on the window is [D(q_hi), D(q_lo)]
  const double d_hi = s.shape.queues.difference(s.shape.q_lo), d_lo = s.shape.queues.difference(s.shape.q_hi);
  auto in_range = [&](double y) { return y >= d_lo && y <= d_hi; };
  if (!in_range(s.shape.m)) n.issue("m", "outside the range of lambda^L - lambda^C on [q_lo, q_hi]");
  for (double g : s.shape.gammas)
    if (!in_range(s.shape.m - g)) {
      n.issue("gammas", "m - gamma = " + fmt_number(s.shape.m - g) +
                            " is outside the range of lambda^L - lambda^C on [q_lo, q_hi]");
      break;
    }
  return s;
}

ScenarioParams parse_broker_eval(Node& n) {
  BrokerEvalScenario s;
  s.rough = parse_rough(child(n, "rough"));
  s.f = parse_profile(child(n, "limit_profile"), 0.5, 0.0, 1.0);
  s.g = parse_profile(child(n, "market_profile"), 0.2, 0.0, 1.0);
  s.c_kappa = n.number("c_kappa", -1.0);
  s.c_lambda = n.number("c_lambda", -1.0, negative());
  s.kappa_star = n.number("kappa_star", 1.0, nonnegative());
  s.h = n.number("h", 1.0 / 256.0, positive());
  std::vector<double> grid_def;
  for (int k = 1; k <= 12; ++k) grid_def.push_back(0.25 * k);
  s.grid = n.numbers("grid", grid_def, positive());
  check_increasing(n, "grid", s.grid, true);
  if (s.h > 0.0)
    for (double t : s.grid)
      if (std::abs(t / s.h - std::round(t / s.h)) > 1e-9) {
        n.issue("grid", "every point must be a multiple of h (got " + fmt_number(t) + ")");
        break;
      }
  s.n_paths = n.unsigned_integer("n_paths", 1000, 2);
  return s;
}

ScenarioParams parse_estimate_kappa(Node& n) {
  EstimateKappaScenario s;
  if (n.has("input") && n.has("simulation")) n.issue("input", "give either input or simulation, not both");
  if (n.has("input")) {
    Node in = child(n, "input");
    s.prices = in.string("prices", "");
    s.trades = in.string("trades", "");
    s.xi0 = in.number("xi0", 1.0, positive());
    if (s.prices.empty()) in.issue("prices", "required");
    if (s.trades.empty()) in.issue("trades", "required");
  } else {
    Node sim = child(n, "simulation");
    SimplifiedPriceModel m;
    m.queues = parse_queues(child(sim, "queues"), AffineDifferenceRates{-1.0, 3.0, 0.5});
    m.kappa = parse_kappa(child(sim, "kappa"), ConstantKappa{0.5});
    m.market = parse_market(child(sim, "market"));
    m.q0_ask = sim.integer("q0_ask", 0);
    m.q0_bid = sim.integer("q0_bid", 0);
    m.horizon = sim.number("horizon", 1e4, positive());
    m.delta = sim.number("delta", 0.0, nonnegative());
    m.noise_sigma = sim.number("noise_sigma", 0.0, nonnegative());
    if (m.delta > m.horizon) sim.issue("delta", "must not exceed horizon");
    s.model = m;
  }
  s.windows = n.unsigned_integer("windows", 50, 3);
  s.ladder = n.counts("delta_multipliers", s.ladder);
  s.export_data = n.boolean("export_data", true);
  return s;
}

ScenarioParams parse_rescaling(Node& n) {
  RescalingLadderScenario s;
  s.limit = parse_limit_spec(n, AffineDifferenceRates{-1.0, 0.6, 0.5}, AffineKappa{-0.5, 1.0}, 1.0 / 256.0);
  if (!s.limit.queues.affine()) n.issue("queues.type", "rescaling needs affine queue rates");
  s.f = parse_profile(child(n, "profile"), 0.5, 0.0, 1.0);
  auto& c = s.config;
  c.ladder = n.numbers("ladder", c.ladder, positive());
  check_increasing(n, "ladder", c.ladder, true);
  c.t = n.number("t", 1.0, positive());
  c.queue_paths = n.unsigned_integer("queue_paths", c.queue_paths, 2);
  c.queue_points = n.unsigned_integer("queue_points", c.queue_points, 1);
  c.limit_paths = n.unsigned_integer("limit_paths", c.limit_paths, 2);
  c.normalization =
      n.string("normalization", "laplace", {"laplace", "literal"}) == "literal" ? LambdaNormalization::literal
                                                                                : LambdaNormalization::laplace;
  c.renewal_dt = n.number("renewal_dt", c.renewal_dt, positive());
  c.micro = parse_impact_config(child(n, "micro"), 0);
  for (double T : c.ladder) {
    try {
      (void)rescaling_map(s.limit.rough, T, c.normalization);
    } catch (const std::invalid_argument& e) {
      n.issue("ladder", "T = " + fmt_number(T) + ": " + e.what());
    }
  }
  check_tail(n, s.limit, c.t);
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds{"simulate-book", "micro-impact",   "scaling-mi",      "shape-fit",
                                              "broker-eval",   "estimate-kappa", "rescaling-ladder"};
  return kinds;
}

ScenarioConfig parse_config(const json& doc) {
  std::vector<std::string> issues;
  ScenarioConfig cfg;
  {
    Node root(&doc, "", &issues);
    if (!doc.is_object()) throw ConfigError(issues);
    if (!doc.contains("scenario")) root.issue("scenario", "required");
    cfg.kind = root.string("scenario", "", scenario_kinds());
    cfg.seed = root.unsigned_integer("seed", 0);
    cfg.workers = static_cast<unsigned>(root.unsigned_integer("workers", 1, 1));
    cfg.output_dir = root.string("output_dir", "out");
    try {
      if (cfg.kind == "simulate-book") cfg.params = parse_simulate_book(root);
      else if (cfg.kind == "micro-impact") cfg.params = parse_micro_impact(root);
      else if (cfg.kind == "scaling-mi") cfg.params = parse_scaling_mi(root);
      else if (cfg.kind == "shape-fit") cfg.params = parse_shape_fit(root);
      else if (cfg.kind == "broker-eval") cfg.params = parse_broker_eval(root);
      else if (cfg.kind == "estimate-kappa") cfg.params = parse_estimate_kappa(root);
      else if (cfg.kind == "rescaling-ladder") cfg.params = parse_rescaling(root);
    } catch (const std::exception& e) {
      // parsing stopped early, so unread keys are not necessarily unknown
      root.issue("", e.what());
      root.skip_unknown_check();
    }
    root.finish();
    cfg.resolved = root.resolved();
  }
  if (!issues.empty()) throw ConfigError(issues);
  return cfg;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config: cannot read " + path.string()});
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({"config: invalid JSON in " + path.string() + ": " + e.what()});
  }
}

}  // namespace lobimpact::cli
