#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace chainpolar {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded generator with platform-stable sampling helpers. std:: distributions
// are implementation-defined, so all draws are derived from raw 64-bit words.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : base_(seed), gen_(splitmix64(seed)) {}

    std::uint64_t seed() const { return base_; }

    std::uint64_t word() { return gen_(); }

    // Uniform in [0,1) with 53 random bits.
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    unsigned coin() { return static_cast<unsigned>(gen_() & 1u); }

    unsigned bernoulli(double p) { return u01() < p ? 1u : 0u; }

    // Index into a pmf of `n` entries (assumed to sum to ~1).
    int categorical(const double* pmf, int n) {
        double u = u01();
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += pmf[i];
            if (u < acc) return i;
        }
        return n - 1;
    }

    // Independent child stream; stable across thread counts.
    Rng derive(std::uint64_t stream) const {
        return Rng(splitmix64(base_ ^ splitmix64(stream + 0x51ed2701a9e3c7d5ULL)));
    }

private:
    std::uint64_t base_;
    std::mt19937_64 gen_;
};

// Runs body(first, last) over [0, count) split into contiguous chunks.
// Chunk boundaries depend only on `count`, so per-item work seeded by item
// index is reproducible regardless of the thread count.
inline void parallel_chunks(std::size_t count, int threads,
                            const std::function<void(std::size_t, std::size_t)>& body) {
    if (threads <= 1 || count < 2) {
        body(0, count);
        return;
    }
    const std::size_t nchunks = static_cast<std::size_t>(threads);
    std::vector<std::thread> workers;
    workers.reserve(nchunks);
    for (std::size_t c = 0; c < nchunks; ++c) {
        const std::size_t lo = count * c / nchunks;
        const std::size_t hi = count * (c + 1) / nchunks;
        if (lo == hi) continue;
        workers.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& w : workers) w.join();
}

} // namespace chainpolar
