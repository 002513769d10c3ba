#include "exactlog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "errors.hpp"

namespace mcn {

namespace {

// Minimal unsigned bignum: little-endian 64-bit limbs. Only what the exact
// ceiling comparison needs (multiply by a word, shift left, compare).
struct BigUint {
    std::vector<uint64_t> limbs{1, 0};

    static BigUint from_u64(uint64_t v) {
        BigUint b;
        b.limbs = {v};
        return b;
    }

    void mul_u64(uint64_t m) {
        unsigned __int128 carry = 0;
        for (auto& limb : limbs) {
            unsigned __int128 prod = static_cast<unsigned __int128>(limb) * m + carry;
            limb = static_cast<uint64_t>(prod);
            carry = prod >> 64;
        }
        if (carry) limbs.push_back(static_cast<uint64_t>(carry));
    }

    BigUint shifted_left(int bits) const {
        BigUint out = *this;
        const int words = bits / 64;
        const int rem = bits % 64;
        if (rem != 0) {
            uint64_t carry = 0;
            for (auto& limb : out.limbs) {
                const uint64_t next = limb >> (64 - rem);
                limb = (limb << rem) | carry;
                carry = next;
            }
            if (carry) out.limbs.push_back(carry);
        }
        out.limbs.insert(out.limbs.begin(), static_cast<size_t>(words), 0);
        return out;
    }

    // -1, 0, +1
    int cmp(const BigUint& rhs) const {
        size_t n = std::max(limbs.size(), rhs.limbs.size());
        for (size_t i = n; i-- > 0;) {
            const uint64_t a = i < limbs.size() ? limbs[i] : 0;
            const uint64_t b = i < rhs.limbs.size() ? rhs.limbs[i] : 0;
            if (a != b) return a < b ? -1 : 1;
        }
        return 0;
    }
};

// d = mantissa * 2^exp with mantissa a 53-bit-or-smaller integer.
void decompose(double d, uint64_t& mantissa, int& exp) {
    int e = 0;
    const double f = std::frexp(d, &e);  // f in [0.5, 1)
    mantissa = static_cast<uint64_t>(std::ldexp(f, 53));
    exp = e - 53;
}

}  // namespace

int ceil_log2_exact(const std::vector<double>& num_factors,
                    const std::vector<double>& den_factors) {
    double approx = 0.0;
    BigUint num = BigUint::from_u64(1);
    BigUint den = BigUint::from_u64(1);
    int net_exp = 0;
    for (double f : num_factors) {
        if (!(f > 0.0) || !std::isfinite(f)) throw NumericalError("ceil_log2_exact: factor <= 0");
        uint64_t m;
        int e;
        decompose(f, m, e);
        num.mul_u64(m);
        net_exp += e;
        approx += std::log2(f);
    }
    for (double f : den_factors) {
        if (!(f > 0.0) || !std::isfinite(f)) throw NumericalError("ceil_log2_exact: factor <= 0");
        uint64_t m;
        int e;
        decompose(f, m, e);
        den.mul_u64(m);
        net_exp -= e;
        approx += -std::log2(f);
    }

    // x <= 2^k  <=>  num * 2^net_exp <= den * 2^k, shifting only by positives.
    const auto le_pow2 = [&](int k) {
        const int shift = k - net_exp;
        if (shift >= 0) return num.cmp(den.shifted_left(shift)) <= 0;
        return num.shifted_left(-shift).cmp(den) <= 0;
    };

    int k = static_cast<int>(std::ceil(approx));
    while (!le_pow2(k)) ++k;
    while (k > std::numeric_limits<int>::min() && le_pow2(k - 1)) --k;
    return k;
}

}  // namespace mcn
