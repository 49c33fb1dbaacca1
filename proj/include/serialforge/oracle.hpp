#pragma once

// Reference integer kernels and the latency / batch evaluation harness.

#include "serialforge/cost.hpp"
#include "serialforge/matrix.hpp"
#include "serialforge/random.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace serialforge {

/// o = a^T V with a 128-bit accumulator; throws std::overflow_error if a
/// result does not fit int64.
std::vector<std::int64_t> gemv(const IntMatrix& m, std::span<const std::int64_t> a);

/// a^T P - a^T N.
std::vector<std::int64_t> gemv(const MatrixPair& pair, std::span<const std::int64_t> a);

/// True when `got` equals `want` modulo 2^bits.
bool congruent(std::int64_t got, std::int64_t want, unsigned bits) noexcept;

/// True when `value` is representable as a `bits`-bit signed integer.
bool fits_signed(std::int64_t value, unsigned bits) noexcept;

/// FNV-1a over the little-endian bytes of the values.
std::uint64_t checksum(std::span<const std::int64_t> values) noexcept;

/// Uniform signed `bitwidth`-bit vector.
std::vector<std::int64_t> random_vector(std::size_t length, unsigned bitwidth, Rng& rng);

struct BenchRow {
    std::size_t dim = 0;
    double sparsity = 0.0;
    std::size_t batch = 1;
    Scheme scheme = Scheme::CSD;
    std::uint64_t cycles = 0;
    double fmax_mhz = 0.0;
    double latency_ns = 0.0;
    std::uint64_t checksum = 0;
    std::uint64_t ones = 0;
    /// Every simulated output matched gemv modulo 2^S.
    bool verified = false;
    /// Outputs whose true value fits S bits (and therefore matched exactly).
    std::uint64_t exact_outputs = 0;
    std::uint64_t total_outputs = 0;
};

struct BenchConfig {
    Scheme scheme = Scheme::CSD;
    unsigned input_bitwidth = 8;
    unsigned weight_bitwidth = 8;
    unsigned jobs = 1;
};

/// One row per dimension: generate a square signed element-sparse matrix,
/// transform, compile, simulate one random vector and check it against gemv.
std::vector<BenchRow> run_latency_sweep(std::span<const std::size_t> dims, double sparsity, std::uint64_t seed,
                                        const DeviceProfile& profile, const BenchConfig& config = {});

/// One compiled matrix, one row per batch size. The first vector of every
/// batch is the vector the latency sweep uses for this dimension.
std::vector<BenchRow> run_batch_sweep(std::size_t dim, double sparsity, std::span<const std::size_t> batches,
                                      std::uint64_t seed, const DeviceProfile& profile, const BenchConfig& config = {});

/// Header `dim,sparsity,batch,scheme,cycles,fmax_mhz,latency_ns,checksum,ones,verified`.
void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

}  // namespace serialforge
