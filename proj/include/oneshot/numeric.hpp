#pragma once

#include <cstddef>
#include <span>

namespace oneshot {

// Pairwise (cascade) summation; error grows as O(log n) rather than O(n).
double pairwise_sum(std::span<const double> values) noexcept;

// Standard normal distribution function.
double normal_cdf(double x) noexcept;

// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x) noexcept;

// Inverse of the standard normal distribution function (Wichura, AS241).
// Relative accuracy about 1e-16 on (0, 1); returns +-inf at the endpoints.
double normal_quantile(double p);

}  // namespace oneshot
