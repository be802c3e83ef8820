#include "bmsense/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bmsense {

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz's continued fraction for the upper tail Q(a, x).
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0)
    throw std::invalid_argument("regularized_gamma_p: a > 0, x >= 0 required");
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

TruncatedMoments truncated_gaussian_moments(double gamma, Field field) {
  if (gamma < 0.0)
    throw std::invalid_argument("truncated_gaussian_moments: gamma >= 0");
  TruncatedMoments out{};
  double e2, e4;  // E[t 1{t<=gamma}], E[t^2 1{t<=gamma}] for t = |z|^2
  if (field == Field::Real) {
    // t ~ chi^2_1: E[t^k 1{t<=gamma}] = 2^k Gamma(k+1/2)/Gamma(1/2)
    //                                   * P(k+1/2, gamma/2).
    e2 = 1.0 * regularized_gamma_p(1.5, gamma / 2.0);
    e4 = 3.0 * regularized_gamma_p(2.5, gamma / 2.0);
  } else {
    // t ~ Exp(1): E[t^k 1{t<=gamma}] = k! P(k+1, gamma).
    e2 = 1.0 * regularized_gamma_p(2.0, gamma);
    e4 = 2.0 * regularized_gamma_p(3.0, gamma);
  }
  out.m2_gamma = e2;
  out.m4_gamma = e4 - e2;
  return out;
}

}  // namespace bmsense
