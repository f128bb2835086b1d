#pragma once

#include <cstdint>
#include <initializer_list>

namespace solenoid {

// Keyed counter-based RNG. Every stochastic routine in the library derives
// its stream from (master seed, fixed tag, indices...), so results do not
// depend on evaluation order or thread count.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(splitmix64(seed)) {}

    RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
        : state_(seed) {
        for (std::uint64_t k : keys) state_ = hash_combine(state_, k);
        state_ = splitmix64(state_);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a,b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift; bias is negligible for n far below 2^64.
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

  private:
    std::uint64_t state_;
};

/// One keyed uniform draw without carrying a stream around.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t tag,
                            std::uint64_t i, std::uint64_t j) {
    std::uint64_t h = splitmix64(seed);
    h = hash_combine(h, tag);
    h = hash_combine(h, i);
    h = hash_combine(h, j);
    return static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
}

}  // namespace solenoid
