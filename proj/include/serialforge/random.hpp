#pragma once

// Deterministic random streams.
//
// All randomness in serialforge comes from xoshiro256** generators whose
// state is expanded with SplitMix64 from a 64-bit user seed mixed with an
// operation tag (and optional integer indices). Bounded integers, Bernoulli
// draws and unit doubles are derived here rather than through <random>
// distributions, whose outputs differ between standard libraries.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace serialforge {

/// SplitMix64 finalizer step: advances `state` and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept;

    /// Independent stream for (seed, tag, indices...).
    static Rng stream(std::uint64_t seed, std::string_view tag,
                      std::initializer_list<std::uint64_t> indices = {}) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform integer in [0, bound). `bound` must be nonzero.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept;

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() noexcept;

    /// True with probability p (p <= 0 never, p >= 1 always).
    bool bernoulli(double p) noexcept;

    /// One fair bit.
    bool coin() noexcept { return ((*this)() >> 63) != 0; }

private:
    std::array<std::uint64_t, 4> s_;
};

}  // namespace serialforge
