#include "bwe/truncnorm.hpp"

#include <cmath>
#include <numbers>

namespace bwe {
namespace {

constexpr double kTailCutoff = 37.0;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// x * (1 - Phi(x)) / phi(x) for large positive x, as the asymptotic series
// 1 - 1/x^2 + 3/x^4 - 15/x^6 + ...
double scaled_mills_series(double x) {
  const double r = 1.0 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0 * k - 1.0) * r;
    sum += term;
  }
  return sum;
}

} // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double log_normal_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  if (x > -kTailCutoff) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  const double t = -x;
  return -0.5 * t * t - kLogSqrt2Pi - std::log(t) + std::log(scaled_mills_series(t));
}

double inverse_mills(double x) {
  if (x > -kTailCutoff) return normal_pdf(x) / (0.5 * std::erfc(-x * kInvSqrt2));
  const double t = -x;
  return t / scaled_mills_series(t);
}

double truncated_normal_mean(double location, bool positive) {
  return positive ? location + inverse_mills(location) : location - inverse_mills(-location);
}

} // namespace bwe
