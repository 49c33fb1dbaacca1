#include "serialforge/oracle.hpp"

#include "serialforge/compile.hpp"
#include "serialforge/csd.hpp"
#include "serialforge/error.hpp"
#include "serialforge/parallel.hpp"
#include "serialforge/sim.hpp"

#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace serialforge {

namespace {

__extension__ using i128 = __int128;


std::int64_t narrow(i128 v)
{
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw std::overflow_error("gemv result exceeds 64 bits");
    return static_cast<std::int64_t>(v);
}

MatrixPair transform(const IntMatrix& m, Scheme scheme, std::uint64_t seed)
{
    return scheme == Scheme::PN ? pn_split(m) : csd_transform(m, seed);
}

IntMatrix bench_matrix(std::size_t dim, double sparsity, std::uint64_t seed, const BenchConfig& config)
{
    const std::uint64_t matrix_seed = Rng::stream(seed, "bench-matrix", {dim})();
    return gen_element_sparse(dim, dim, config.weight_bitwidth, Signedness::Signed, sparsity, matrix_seed);
}

std::vector<std::int64_t> bench_vector(std::size_t dim, std::size_t index, std::uint64_t seed, unsigned bitwidth)
{
    Rng rng = Rng::stream(seed, "bench-vector", {dim, index});
    return random_vector(dim, bitwidth, rng);
}

void verify(BenchRow& row, const MatrixPair& pair, std::span<const std::int64_t> input,
            std::span<const std::int64_t> outputs, unsigned bits)
{
    const auto want = gemv(pair, input);
    for (std::size_t c = 0; c < want.size(); ++c) {
        if (!congruent(outputs[c], want[c], bits)) row.verified = false;
        if (fits_signed(want[c], bits)) {
            ++row.exact_outputs;
            if (outputs[c] != want[c]) row.verified = false;
        }
        ++row.total_outputs;
    }
}

}  // namespace

std::vector<std::int64_t> gemv(const IntMatrix& m, std::span<const std::int64_t> a)
{
    if (a.size() != m.rows())
        throw ArgumentError("gemv: vector length " + std::to_string(a.size()) + " != matrix rows "
                            + std::to_string(m.rows()));
    std::vector<i128> acc(m.cols(), 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (a[r] == 0) continue;
        for (std::size_t c = 0; c < m.cols(); ++c) acc[c] += static_cast<i128>(a[r]) * m(r, c);
    }
    std::vector<std::int64_t> out(m.cols());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = narrow(acc[c]);
    return out;
}

std::vector<std::int64_t> gemv(const MatrixPair& pair, std::span<const std::int64_t> a)
{
    const auto pos = gemv(pair.p, a);
    const auto neg = gemv(pair.n, a);
    std::vector<std::int64_t> out(pos.size());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = narrow(static_cast<i128>(pos[c]) - neg[c]);
    return out;
}

bool congruent(std::int64_t got, std::int64_t want, unsigned bits) noexcept
{
    const std::uint64_t diff = static_cast<std::uint64_t>(got) - static_cast<std::uint64_t>(want);
    if (bits >= 64) return diff == 0;
    return (diff & ((std::uint64_t{1} << bits) - 1)) == 0;
}

bool fits_signed(std::int64_t value, unsigned bits) noexcept
{
    if (bits >= 64) return true;
    const std::int64_t half = std::int64_t{1} << (bits - 1);
    return value >= -half && value < half;
}

std::uint64_t checksum(std::span<const std::int64_t> values) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int64_t v : values) {
        auto u = static_cast<std::uint64_t>(v);
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (u >> (8 * byte)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::vector<std::int64_t> random_vector(std::size_t length, unsigned bitwidth, Rng& rng)
{
    std::vector<std::int64_t> v(length);
    const std::int64_t lo = min_representable(bitwidth, Signedness::Signed);
    const std::int64_t hi = max_representable(bitwidth, Signedness::Signed);
    for (auto& x : v) x = rng.between(lo, hi);
    return v;
}

std::vector<BenchRow> run_latency_sweep(std::span<const std::size_t> dims, double sparsity, std::uint64_t seed,
                                        const DeviceProfile& profile, const BenchConfig& config)
{
    std::vector<BenchRow> rows(dims.size());
    parallel_for(dims.size(), config.jobs, [&](std::size_t i) {
        const std::size_t dim = dims[i];
        const IntMatrix m = bench_matrix(dim, sparsity, seed, config);
        const MatrixPair pair = transform(m, config.scheme, seed);
        const Netlist net = compile(pair, config.input_bitwidth);
        const auto input = bench_vector(dim, 0, seed, config.input_bitwidth);
        const SimResult sim = simulate(net, input);
        const CostReport cost = estimate(pair, config.input_bitwidth, profile, stats(net));

        BenchRow& row = rows[i];
        row.dim = dim;
        row.sparsity = sparsity;
        row.batch = 1;
        row.scheme = config.scheme;
        row.cycles = sim.latency_cycles;
        row.fmax_mhz = cost.fmax_mhz;
        row.latency_ns = static_cast<double>(row.cycles) * 1000.0 / row.fmax_mhz;
        row.checksum = checksum(sim.outputs);
        row.ones = pair.ones();
        row.verified = sim.latency_cycles == cost.latency_cycles;
        verify(row, pair, input, sim.outputs, sim.stream_bits);
    });
    return rows;
}

std::vector<BenchRow> run_batch_sweep(std::size_t dim, double sparsity, std::span<const std::size_t> batches,
                                      std::uint64_t seed, const DeviceProfile& profile, const BenchConfig& config)
{
    const IntMatrix m = bench_matrix(dim, sparsity, seed, config);
    const MatrixPair pair = transform(m, config.scheme, seed);
    const Netlist net = compile(pair, config.input_bitwidth);
    const CostReport cost = estimate(pair, config.input_bitwidth, profile, stats(net));

    std::vector<BenchRow> rows(batches.size());
    parallel_for(batches.size(), config.jobs, [&](std::size_t i) {
        const std::size_t batch = batches[i];
        std::vector<std::vector<std::int64_t>> inputs;
        inputs.reserve(batch);
        for (std::size_t j = 0; j < batch; ++j) inputs.push_back(bench_vector(dim, j, seed, config.input_bitwidth));
        const BatchResult result = simulate_batch(net, inputs);

        BenchRow& row = rows[i];
        row.dim = dim;
        row.sparsity = sparsity;
        row.batch = batch;
        row.scheme = config.scheme;
        row.cycles = result.total_cycles;
        row.fmax_mhz = cost.fmax_mhz;
        row.latency_ns = static_cast<double>(row.cycles) * 1000.0 / row.fmax_mhz;
        row.ones = pair.ones();
        row.verified = true;
        std::vector<std::int64_t> all;
        for (std::size_t j = 0; j < batch; ++j) {
            const SimResult& r = result.results[j];
            if (r.latency_cycles != cost.latency_cycles) row.verified = false;
            verify(row, pair, inputs[j], r.outputs, r.stream_bits);
            all.insert(all.end(), r.outputs.begin(), r.outputs.end());
        }
        row.checksum = checksum(all);
    });
    return rows;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows)
{
    out << "dim,sparsity,batch,scheme,cycles,fmax_mhz,latency_ns,checksum,ones,verified\n";
    for (const BenchRow& row : rows) {
        std::ostringstream line;
        line << row.dim << ',' << row.sparsity << ',' << row.batch << ',' << to_string(row.scheme) << ',' << row.cycles
             << ',' << row.fmax_mhz << ',' << std::fixed << std::setprecision(3) << row.latency_ns << ','
             << std::hex << std::setw(16) << std::setfill('0') << row.checksum << std::dec << ',' << row.ones << ','
             << (row.verified ? "true" : "false") << '\n';
        out << line.str();
    }
}

}  // namespace serialforge
