#ifndef BMSENSE_SPECIAL_FUNCTIONS_HPP
#define BMSENSE_SPECIAL_FUNCTIONS_HPP

#include "bmsense/scalar.hpp"

namespace bmsense {

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a),
// series expansion for x < a + 1 and continued fraction otherwise.
double regularized_gamma_p(double a, double x);

// Truncated moments of |z|^2 for a standard normal z over the given field:
//   m2_gamma = E[|z|^2 1{|z|^2 <= gamma}]
//   m4_gamma = E[|z|^4 1{|z|^2 <= gamma}] - m2_gamma
// |z|^2 is chi^2_1 in the real case and Exp(1) in the complex case.
struct TruncatedMoments {
  double m2_gamma;
  double m4_gamma;
};

TruncatedMoments truncated_gaussian_moments(double gamma, Field field);

}  // namespace bmsense

#endif
