#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace chainpolar {

using BitVector = std::vector<std::uint8_t>;
using IndexList = std::vector<int>; // sorted ascending, 0-based

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::size_t n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("length is not a power of two");
    int k = 0;
    while ((std::size_t{1} << k) < n) ++k;
    return k;
}

// In-place x <- x * G_n over GF(2), G_n = [[1,0],[1,1]]^{(x) n}.
// G_n is an involution, so this is also the inverse transform.
inline void polar_transform_inplace(BitVector& x) {
    const std::size_t n = x.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("polar_transform: length is not a power of two");
    for (std::size_t h = 1; h < n; h <<= 1)
        for (std::size_t i = 0; i < n; i += h << 1)
            for (std::size_t j = i; j < i + h; ++j)
                x[j] ^= x[j + h];
}

inline BitVector polar_transform(BitVector x) {
    polar_transform_inplace(x);
    return x;
}

// First `len` entries only; used for successive cancellation descent.
inline void polar_transform_prefix(std::uint8_t* x, std::size_t len) {
    for (std::size_t h = 1; h < len; h <<= 1)
        for (std::size_t i = 0; i < len; i += h << 1)
            for (std::size_t j = i; j < i + h; ++j)
                x[j] ^= x[j + h];
}

inline BitVector extract(const BitVector& v, const IndexList& positions) {
    BitVector out;
    out.reserve(positions.size());
    for (int p : positions) out.push_back(v.at(static_cast<std::size_t>(p)));
    return out;
}

inline void scatter(BitVector& v, const IndexList& positions, const BitVector& bits) {
    if (positions.size() != bits.size())
        throw std::invalid_argument("scatter: positions/bits size mismatch");
    for (std::size_t r = 0; r < positions.size(); ++r)
        v.at(static_cast<std::size_t>(positions[r])) = bits[r];
}

} // namespace chainpolar
