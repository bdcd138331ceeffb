#pragma once

#include <cstdint>
#include <span>

namespace pdduq {

double normal_pdf(double x);
double normal_cdf(double x);
// Inverse of the standard normal CDF, accurate to a few ulps on (0,1).
double normal_quantile(double p);

// Binomial coefficient as a double. Uses the convention C(n,k) = 0 for
// k > n >= 0 and C(n,0) = 1 for any n (including n = -1).
double binomial(int n, int k);
double factorial(int n);

// Pairwise (tree) summation; result depends only on the input order.
double pairwise_sum(std::span<const double> v);

}  // namespace pdduq
