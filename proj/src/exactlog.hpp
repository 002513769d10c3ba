#ifndef MCN_EXACTLOG_HPP
#define MCN_EXACTLOG_HPP

#include <vector>

namespace mcn {

/// Smallest integer k with (prod(num_factors) / prod(den_factors)) <= 2^k.
/// Every factor must be finite and strictly positive. The comparison is exact:
/// each double is decomposed into mantissa and exponent, so power-of-two
/// ratios land on the correct side of the ceiling.
int ceil_log2_exact(const std::vector<double>& num_factors,
                    const std::vector<double>& den_factors);

}  // namespace mcn

#endif
