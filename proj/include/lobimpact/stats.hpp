#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace lobimpact {

// Welford accumulator. Merging is order-sensitive in floating point, so callers
// always merge in task-index order.
class RunningStats {
 public:
  void add(double x) noexcept;
  [[nodiscard]] std::size_t count() const noexcept { return n_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double variance() const noexcept;
  [[nodiscard]] double stderr_mean() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct LinearFit {
  std::vector<double> coef;
  std::vector<double> stderr_coef;
  double r2 = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares y ~ X (no implicit intercept; add a ones column if needed).
// X is row-major with `cols` columns.
[[nodiscard]] LinearFit ols(std::span<const double> X, std::size_t cols, std::span<const double> y);

// One-sample Kolmogorov-Smirnov test against Exp(1). Returns the statistic and
// the asymptotic p-value.
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
[[nodiscard]] KsResult ks_test_exponential(std::vector<double> samples);

// Runs fn(i) for i in [0, n) on `workers` threads and returns results indexed by i.
// Output is independent of the worker count as long as fn(i) depends only on i.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t n, unsigned workers, Fn&& fn) {
  std::vector<R> out(n);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  unsigned count = workers < n ? workers : static_cast<unsigned>(n);
  pool.reserve(count);
  for (unsigned w = 0; w < count; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace lobimpact
