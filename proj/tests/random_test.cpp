#include "serialforge/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <set>

using serialforge::Rng;

namespace {

// Reference SplitMix64 and xoshiro256** written independently of the library.
std::uint64_t ref_splitmix(std::uint64_t& x)
{
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

struct RefXoshiro {
    std::array<std::uint64_t, 4> s;
    explicit RefXoshiro(std::uint64_t seed)
    {
        for (auto& w : s) w = ref_splitmix(seed);
    }
    std::uint64_t next()
    {
        const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
};

}  // namespace

TEST(Random, SplitMixKnownValue)
{
    // First output of SplitMix64 seeded with 0.
    std::uint64_t state = 0;
    EXPECT_EQ(serialforge::splitmix64(state), 0xe220a8397b1dcdafULL);
}

TEST(Random, Fnv1aKnownValues)
{
    EXPECT_EQ(serialforge::fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(serialforge::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Random, MatchesReferenceXoshiro)
{
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
        Rng rng(seed);
        RefXoshiro ref(seed);
        for (int i = 0; i < 1000; ++i) ASSERT_EQ(rng(), ref.next()) << "seed " << seed << " draw " << i;
    }
}

TEST(Random, StreamsAreDeterministicAndDistinct)
{
    Rng a = Rng::stream(7, "csd");
    Rng b = Rng::stream(7, "csd");
    Rng c = Rng::stream(7, "gen_bit_sparse");
    Rng d = Rng::stream(7, "csd", {1});
    Rng e = Rng::stream(8, "csd");
    const auto first = a();
    EXPECT_EQ(first, b());
    EXPECT_NE(first, c());
    EXPECT_NE(first, d());
    EXPECT_NE(first, e());
}

TEST(Random, BelowStaysInRangeAndCoversIt)
{
    Rng rng(3);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 5000; ++i) {
        const auto v = rng.below(7);
        ASSERT_LT(v, 7u);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 7u);
}

TEST(Random, BetweenInclusiveBounds)
{
    Rng rng(5);
    std::int64_t lo = 100, hi = -100;
    for (int i = 0; i < 20000; ++i) {
        const auto v = rng.between(-8, 7);
        ASSERT_GE(v, -8);
        ASSERT_LE(v, 7);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_EQ(lo, -8);
    EXPECT_EQ(hi, 7);
    EXPECT_EQ(rng.between(3, 3), 3);
}

TEST(Random, UnitAndBernoulli)
{
    Rng rng(11);
    int hits = 0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.unit();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        hits += rng.bernoulli(0.25) ? 1 : 0;
    }
    // Binomial(1e5, 0.25) has sigma ~137.
    EXPECT_NEAR(hits, 25000, 1000);
    EXPECT_FALSE(rng.bernoulli(0.0));
    EXPECT_TRUE(rng.bernoulli(1.0));
}
