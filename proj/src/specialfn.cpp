#include "lobimpact/specialfn.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>

namespace lobimpact::specialfn {

namespace {

constexpr double kPi = std::numbers::pi;

void check_parameters(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("mittag_leffler: alpha must lie in (0, 1]");
  if (!(beta > 0.0)) throw std::domain_error("mittag_leffler: beta must be positive");
}

double series(double alpha, double beta, double x) {
  if (x == 0.0) return 1.0 / std::tgamma(beta);
  const double log_abs = std::log(std::abs(x));
  const bool alternating = x < 0.0;
  double sum = 0.0;
  double peak = 0.0;
  for (int k = 0; k < 100000; ++k) {
    double arg = alpha * k + beta;
    double log_term = k * log_abs - std::lgamma(arg);
    if (log_term > 700.0) throw MittagLefflerOverflow("mittag_leffler: series overflows double range");
    double term = std::exp(log_term);
    if (alternating && (k % 2 == 1)) term = -term;
    sum += term;
    peak = std::max(peak, std::abs(term));
    // Terms decrease once alpha*k + beta exceeds |x|^{1/alpha}; stop when negligible past the peak.
    if (k > 4 && std::abs(term) < 1e-18 * std::max(std::abs(sum), 1e-300) &&
        std::pow(std::abs(x), 1.0 / alpha) < arg)
      break;
  }
  if (!std::isfinite(sum)) throw MittagLefflerOverflow("mittag_leffler: non-finite series value");
  return sum;
}

// E_{alpha,beta}(z) for z < 0, 0 < alpha < 1, beta < 1 + alpha.
double integral_representation(double alpha, double beta, double z) {
  const double s1 = std::sin(kPi * (1.0 - beta));
  const double s2 = std::sin(kPi * (1.0 - beta + alpha));
  const double c = std::cos(kPi * alpha);
  const double expo = (1.0 - beta) / alpha;
  auto kernel = [=](double chi) {
    if (chi <= 0.0) return 0.0;
    double num = chi * s1 - z * s2;
    double den = chi * chi - 2.0 * chi * z * c + z * z;
    return std::pow(chi, expo) * std::exp(-std::pow(chi, 1.0 / alpha)) * num / den;
  };

  const double cutoff = std::pow(75.0, alpha);
  // The denominator is smallest at chi = -z cos(pi alpha) when alpha > 1/2.
  const double split = c < 0.0 ? std::abs(z) * (-c) : 0.0;

  boost::math::quadrature::tanh_sinh<double> integrator(15);
  const double tol = 1e-14;
  double result = 0.0;
  if (split > 0.0 && split < cutoff) {
    result += integrator.integrate(kernel, 0.0, split, tol);
    result += integrator.integrate(kernel, split, cutoff, tol);
  } else {
    result += integrator.integrate(kernel, 0.0, cutoff, tol);
  }
  return result / (alpha * kPi);
}

double negative_axis(double alpha, double beta, double z) {
  if (alpha == 1.0) {
    // E_{1,1} = exp; integer beta from the upward recurrence E_{1,b+1}(z) = (E_{1,b}(z) - 1/G(b)) / z.
    double b = std::round(beta);
    if (std::abs(beta - b) > 1e-14 || b < 1.0)
      throw std::domain_error("mittag_leffler: alpha = 1 with non-integer beta is only supported for |x| <= 1");
    double value = std::exp(z);
    for (double k = 1.0; k < b; k += 1.0) value = (value - 1.0 / std::tgamma(k)) / z;
    return value;
  }
  if (beta < 1.0 + alpha) return integral_representation(alpha, beta, z);
  // E_{a,b}(z) = (E_{a,b-a}(z) - 1/G(b-a)) / z; dividing by |z| > 1 damps rounding error.
  return (negative_axis(alpha, beta - alpha, z) - 1.0 / std::tgamma(beta - alpha)) / z;
}

}  // namespace

double mittag_leffler(double alpha, double beta, double x) {
  check_parameters(alpha, beta);
  if (std::isnan(x)) return x;
  if (x >= -kSeriesRadius) return series(alpha, beta, x);
  if (std::isinf(x)) return 0.0;
  return negative_axis(alpha, beta, x);
}

double ml_density(double alpha, double lambda, double x) {
  if (!(lambda > 0.0)) throw std::domain_error("ml_density: lambda must be positive");
  if (x < 0.0) return 0.0;
  if (x == 0.0) return alpha < 1.0 ? std::numeric_limits<double>::infinity() : lambda;
  double xa = std::pow(x, alpha);
  return lambda * xa / x * mittag_leffler(alpha, alpha, -lambda * xa);
}

double ml_cdf(double alpha, double lambda, double x) {
  if (!(lambda > 0.0)) throw std::domain_error("ml_cdf: lambda must be positive");
  if (x <= 0.0) return 0.0;
  double z = -lambda * std::pow(x, alpha);
  if (alpha == 1.0) return -std::expm1(z);
  return 1.0 - mittag_leffler(alpha, 1.0, z);
}

}  // namespace lobimpact::specialfn
