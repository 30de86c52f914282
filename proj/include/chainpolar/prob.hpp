#pragma once

#include <cmath>
#include <limits>

namespace chainpolar {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; tolerates -inf operands.
inline double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = a > b ? a : b;
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

inline double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// Binary entropy in bits, h(0) = h(1) = 0.
inline double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

// Unnormalized log-probability pair for one binary symbol.
struct LogPair {
    double l0 = 0.0;
    double l1 = 0.0;

    bool dead() const { return l0 == kNegInf && l1 == kNegInf; }

    // p(bit = 1); requires !dead().
    double p1() const {
        const double den = logaddexp(l0, l1);
        return std::exp(l1 - den);
    }
};

// Check node: distribution of the XOR of two independent symbols.
inline LogPair combine_check(const LogPair& a, const LogPair& b) {
    return LogPair{logaddexp(a.l0 + b.l0, a.l1 + b.l1),
                   logaddexp(a.l0 + b.l1, a.l1 + b.l0)};
}

// Bit node: second symbol's distribution once the XOR bit is known.
inline LogPair combine_bit(const LogPair& a, const LogPair& b, unsigned xor_bit) {
    if (xor_bit == 0) return LogPair{a.l0 + b.l0, a.l1 + b.l1};
    return LogPair{a.l1 + b.l0, a.l0 + b.l1};
}

} // namespace chainpolar
