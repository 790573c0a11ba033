#include "lobimpact/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lobimpact {

void RunningStats::add(double x) noexcept {
  ++n_;
  double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningStats::variance() const noexcept {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::stderr_mean() const noexcept {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

LinearFit ols(std::span<const double> X, std::size_t cols, std::span<const double> y) {
  if (cols == 0 || X.size() != y.size() * cols) throw std::invalid_argument("ols: design matrix shape mismatch");
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto p = static_cast<Eigen::Index>(cols);
  if (n <= p) throw std::invalid_argument("ols: need more observations than regressors");

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(X.data(), n, p);
  Eigen::Map<const Eigen::VectorXd> b(y.data(), n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < p) throw std::invalid_argument("ols: design matrix is rank deficient");
  Eigen::VectorXd beta = qr.solve(b);
  Eigen::VectorXd resid = b - A * beta;

  double rss = resid.squaredNorm();
  double ybar = b.mean();
  double tss = (b.array() - ybar).square().sum();
  double sigma2 = rss / static_cast<double>(n - p);
  Eigen::MatrixXd cov = (A.transpose() * A).inverse() * sigma2;

  LinearFit fit;
  fit.n = y.size();
  fit.r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.coef.push_back(beta(j));
    fit.stderr_coef.push_back(std::sqrt(std::max(cov(j, j), 0.0)));
  }
  return fit;
}

namespace {

// Kolmogorov distribution tail P(K > x).
double kolmogorov_tail(double x) {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_test_exponential(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("ks_test_exponential: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double cdf = 1.0 - std::exp(-samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  double sq = std::sqrt(n);
  // Stephens' small-sample correction.
  return {d, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d)};
}

}  // namespace lobimpact
