#include "serialforge/cost.hpp"
#include "serialforge/error.hpp"
#include "serialforge/matrix.hpp"
#include "serialforge/oracle.hpp"
#include "serialforge/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sf = serialforge;
using sf::IntMatrix;
using sf::Signedness;

TEST(Gemv, Identity)
{
    const IntMatrix eye(2, 2, 2, Signedness::Signed, {1, 0, 0, 1});
    const std::vector<std::int64_t> a{1, 2};
    EXPECT_EQ(sf::gemv(eye, a), (std::vector<std::int64_t>{1, 2}));
}

TEST(Gemv, ZeroMatrix)
{
    const IntMatrix z(3, 4, 8, Signedness::Signed);
    EXPECT_EQ(sf::gemv(z, std::vector<std::int64_t>{5, -6, 7}), std::vector<std::int64_t>(4, 0));
}

TEST(Gemv, SummationOrderInvariance)
{
    sf::Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const IntMatrix m = sf::gen_element_sparse(8, 8, 8, Signedness::Signed, 0.2, 40 + trial);
        const auto a = sf::random_vector(8, 8, rng);
        const auto got = sf::gemv(m, a);
        std::vector<std::size_t> order(8);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t c = 0; c < 8; ++c) {
            std::int64_t forward = 0, backward = 0, shuffled = 0;
            for (std::size_t r = 0; r < 8; ++r) forward += a[r] * m(r, c);
            for (std::size_t r = 8; r-- > 0;) backward += a[r] * m(r, c);
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t r : order) shuffled += a[r] * m(r, c);
            ASSERT_EQ(got[c], forward);
            ASSERT_EQ(got[c], backward);
            ASSERT_EQ(got[c], shuffled);
        }
    }
}

TEST(Gemv, PairMatchesSource)
{
    sf::Rng rng(1);
    const IntMatrix m = sf::gen_element_sparse(16, 5, 8, Signedness::Signed, 0.3, 9);
    const auto a = sf::random_vector(16, 8, rng);
    EXPECT_EQ(sf::gemv(sf::pn_split(m), a), sf::gemv(m, a));
}

TEST(Gemv, Errors)
{
    const IntMatrix m(2, 2, 8, Signedness::Signed);
    EXPECT_THROW(sf::gemv(m, std::vector<std::int64_t>{1}), sf::ArgumentError);
    const IntMatrix big(4, 1, 32, Signedness::Unsigned, std::vector<std::int64_t>(4, 4294967295LL));
    const std::vector<std::int64_t> huge(4, std::int64_t{1} << 62);
    EXPECT_THROW(sf::gemv(big, huge), std::overflow_error);
}

TEST(Helpers, CongruenceAndFit)
{
    EXPECT_TRUE(sf::congruent(-1, 255, 8));
    EXPECT_FALSE(sf::congruent(-1, 254, 8));
    EXPECT_TRUE(sf::congruent(5, 5, 64));
    EXPECT_TRUE(sf::fits_signed(-128, 8));
    EXPECT_FALSE(sf::fits_signed(128, 8));
    EXPECT_TRUE(sf::fits_signed(-1, 1));
}

TEST(Helpers, ChecksumIsFnvOverLittleEndianBytes)
{
    EXPECT_EQ(sf::checksum({}), 0xcbf29ce484222325ULL);
    // FNV-1a of eight zero bytes.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int i = 0; i < 8; ++i) h *= 0x100000001b3ULL;
    const std::vector<std::int64_t> zero{0};
    EXPECT_EQ(sf::checksum(zero), h);
    const std::vector<std::int64_t> a{1, 2}, b{2, 1};
    EXPECT_NE(sf::checksum(a), sf::checksum(b));
}

TEST(Helpers, RandomVectorRange)
{
    sf::Rng rng(3);
    const auto v = sf::random_vector(5000, 4, rng);
    EXPECT_EQ(*std::min_element(v.begin(), v.end()), -8);
    EXPECT_EQ(*std::max_element(v.begin(), v.end()), 7);
}

TEST(LatencySweep, SmallDimensionCycles)
{
    const std::vector<std::size_t> dims{64};
    const auto rows = sf::run_latency_sweep(dims, 0.98, 5, sf::default_profile());
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].cycles, 8u + 9u + 6u + 2u);
    EXPECT_TRUE(rows[0].verified);
    EXPECT_EQ(rows[0].exact_outputs, rows[0].total_outputs);
}

TEST(LatencySweep, HeadlineUnder120ns)
{
    const std::vector<std::size_t> dims{64, 128, 256, 512, 1024};
    const auto rows = sf::run_latency_sweep(dims, 0.98, 11, sf::default_profile(), {sf::Scheme::CSD, 8, 8, 2});
    ASSERT_EQ(rows.size(), dims.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].dim, dims[i]);
        EXPECT_TRUE(rows[i].verified);
        EXPECT_LT(rows[i].latency_ns, 120.0);
        EXPECT_DOUBLE_EQ(rows[i].latency_ns, rows[i].cycles * 1000.0 / rows[i].fmax_mhz);
    }
}

TEST(LatencySweep, EmptyDims)
{
    EXPECT_TRUE(sf::run_latency_sweep({}, 0.98, 1, sf::default_profile()).empty());
}

TEST(BatchSweep, LinearAndConsistentWithLatencySweep)
{
    const std::vector<std::size_t> batches{1, 2, 4, 8, 16, 32, 64};
    const auto rows = sf::run_batch_sweep(128, 0.9, batches, 6, sf::default_profile());
    const std::vector<std::size_t> dims{128};
    const auto single = sf::run_latency_sweep(dims, 0.9, 6, sf::default_profile());
    ASSERT_EQ(rows.size(), batches.size());
    EXPECT_EQ(rows[0].cycles, single[0].cycles);
    EXPECT_EQ(rows[0].checksum, single[0].checksum);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].cycles, batches[i] * single[0].cycles);
        EXPECT_TRUE(rows[i].verified);
    }
}

TEST(BatchSweep, DeterministicCsv)
{
    const std::vector<std::size_t> batches{1, 3};
    std::ostringstream a, b;
    sf::write_bench_csv(a, sf::run_batch_sweep(64, 0.5, batches, 2, sf::default_profile()));
    sf::write_bench_csv(b, sf::run_batch_sweep(64, 0.5, batches, 2, sf::default_profile(), {sf::Scheme::CSD, 8, 8, 2}));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
              "dim,sparsity,batch,scheme,cycles,fmax_mhz,latency_ns,checksum,ones,verified");
}
