#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace gmsplit {

// Deterministic RNG used everywhere. We avoid std:: distributions because
// their output is implementation-defined; the raw mt19937_64 stream is not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n);

    // standard normal via Box-Muller (one value per call, no caching so the
    // stream stays a pure function of call count)
    double normal();

    // Fisher-Yates over indices 0..n-1
    std::vector<std::size_t> permutation(std::size_t n);

    void shuffle(std::vector<std::size_t>& v);

private:
    std::uint64_t state_;
};

// Stable seed derivation for sub-streams: hash the base seed with a label so
// independently-seeded components never share a stream.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);
std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index);

}  // namespace gmsplit
