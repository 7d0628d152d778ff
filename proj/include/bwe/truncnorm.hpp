#pragma once

namespace bwe {

double normal_pdf(double x);

// log Phi(x), accurate in both tails.
double log_normal_cdf(double x);

// phi(x) / Phi(x). Uses erfc below |x| = 37 and the asymptotic Mills-ratio
// series beyond, so neither tail cancels or underflows.
double inverse_mills(double x);

// Mean of N(location, 1) truncated to (0, inf) when positive, else (-inf, 0).
double truncated_normal_mean(double location, bool positive);

} // namespace bwe
