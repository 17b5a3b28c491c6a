#pragma once

// Exact integer and rational helpers for the constants in the bounds.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>

#include "superres/error.hpp"

namespace superres {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt binomial_exact(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline double binomial(int n, int k) { return binomial_exact(n, k).convert_to<double>(); }

inline BigInt factorial_exact(int n) {
  BigInt r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// sum_{j=1..n} prod_{k != j} 1/(j-k)^2, exactly.
inline Rational inverse_square_product_sum_exact(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "inverse-square product sum needs n >= 1");
  Rational total = 0;
  for (int j = 1; j <= n; ++j) {
    BigInt denom = 1;
    for (int k = 1; k <= n; ++k)
      if (k != j) denom *= BigInt((j - k) * (j - k));
    total += Rational(1, denom);
  }
  return total;
}

inline double inverse_square_product_sum(int n) {
  return inverse_square_product_sum_exact(n).convert_to<double>();
}

/// sum_{j=0}^{lambda-1} binom(lambda-1, j) j^lambda / lambda!, exactly.
/// The equispaced upper bound needs alpha <= 1/(2 pi times this times sqrt(M+1)).
inline Rational equispaced_alpha_sum_exact(int lambda) {
  if (lambda < 1) throw Error(ErrorCode::invalid_argument, "lambda must be positive");
  BigInt num = 0;
  for (int j = 0; j <= lambda - 1; ++j) {
    BigInt p = 1;
    for (int e = 0; e < lambda; ++e) p *= j;
    num += binomial_exact(lambda - 1, j) * p;
  }
  return Rational(num, factorial_exact(lambda));
}

}  // namespace superres
