#pragma once

#include <cstdint>
#include <random>

namespace qkd {

/// Splitmix64-style mix of a base seed and a tag, for carving independent
/// substreams out of one session seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

/// Deterministic random stream.
///
/// The engine is std::mt19937_64 (bit-exact by the standard); all
/// distributions are implemented here rather than taken from <random>,
/// whose distribution algorithms are implementation-defined. Identical
/// seeds therefore give identical draw sequences for a given build.
///
/// Streams are single-owner: never draw from one stream concurrently.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound), bound > 0. Rejection sampling, unbiased.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform bit.
    int bit() { return static_cast<int>(next_u64() >> 63); }

    /// Standard normal via Box-Muller. Two uniforms per draw, no cached state.
    double gaussian();

    double gaussian(double mean, double stddev) {
        return mean + stddev * gaussian();
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace qkd
