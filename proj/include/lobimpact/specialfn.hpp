#pragma once

#include <stdexcept>

namespace lobimpact::specialfn {

class MittagLefflerOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Two-parameter Mittag-Leffler function E_{alpha,beta}(x) for 0 < alpha <= 1,
// beta > 0 and real x. Power series near the origin and for positive x; for
// x < -1 a real-axis integral representation (Gorenflo-Loutchko-Luchko), with
// beta reduced below 1 + alpha by the recurrence E_{a,b}(x) = 1/G(b) + x E_{a,a+b}(x).
[[nodiscard]] double mittag_leffler(double alpha, double beta, double x);

// Mittag-Leffler density f(x) = lambda x^{alpha-1} E_{alpha,alpha}(-lambda x^alpha).
[[nodiscard]] double ml_density(double alpha, double lambda, double x);

// Mittag-Leffler distribution function F(x) = 1 - E_{alpha,1}(-lambda x^alpha).
[[nodiscard]] double ml_cdf(double alpha, double lambda, double x);

// Threshold between the series and the integral representation on the negative axis.
inline constexpr double kSeriesRadius = 1.0;

}  // namespace lobimpact::specialfn
