#pragma once

// Closed-form resource, frequency and latency estimates.
//
// One set bit of P or N costs one LUT (a bit-serial adder or subtractor) and
// two flip-flops. Designs are packed into SLRs up to an occupancy threshold,
// and the clock comes from a per-SLR-count frequency bucket.

#include "serialforge/matrix.hpp"
#include "serialforge/netlist.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace serialforge {

struct DeviceProfile {
    std::uint64_t luts_per_slr = 425000;
    std::uint32_t slr_count = 4;
    double occupancy_threshold = 0.82;
    /// fmax in MHz for designs spanning 1, 2, ... slr_count SLRs.
    std::vector<double> freq_buckets_mhz{500.0, 350.0, 237.5, 237.5};
    /// Optional power coefficient; without it no power figure is reported.
    std::optional<double> watts_per_lut_mhz;
    double thermal_limit_w = 150.0;

    /// Throws ArgumentError unless every field is positive, buckets cover
    /// 1..slr_count and are non-increasing.
    void validate() const;

    /// Bucket frequency for a design using `slrs` SLRs. Zero SLRs uses the
    /// single-SLR bucket; beyond `slr_count` the last bucket applies.
    double fmax_for(std::uint64_t slrs) const;
};

DeviceProfile default_profile();

/// JSON: {"luts_per_slr", "slr_count", "occupancy_threshold",
/// "freq_buckets": {"1": MHz, "2": MHz, ...}, "watts_per_lut_mhz",
/// "thermal_limit_w"}; all optional. Missing bucket keys repeat the value of
/// the nearest lower key.
DeviceProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const DeviceProfile& profile);
DeviceProfile read_profile(const std::filesystem::path& path);

struct CostReport {
    std::uint64_t ones = 0;
    std::uint64_t lut_estimate = 0;
    std::uint64_t ff_estimate = 0;
    std::optional<std::uint64_t> exact_adders;
    std::optional<std::uint64_t> exact_ffs;
    std::uint64_t slrs_used = 0;
    double fmax_mhz = 0.0;
    std::uint32_t latency_cycles = 0;
    double latency_ns = 0.0;
    bool fits = true;
    std::optional<double> power_w;
    std::optional<bool> fits_thermal;
};

/// `exact_adders` counts every LUT-mapped node (adders and subtractors).
CostReport estimate(const MatrixPair& pair, unsigned input_bitwidth, const DeviceProfile& profile,
                    const std::optional<NetlistStats>& netlist_stats = std::nullopt, unsigned extension = 0);

nlohmann::json report_to_json(const CostReport& report);

enum class Scheme { PN, CSD };
std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct SweepGrid {
    std::vector<std::size_t> dims;
    std::vector<double> sparsities;
    std::vector<unsigned> widths;
    std::vector<Scheme> schemes{Scheme::PN, Scheme::CSD};
    /// Input width; 0 means "same as the weight width".
    unsigned input_bitwidth = 0;
    /// Worker threads; output order does not depend on it.
    unsigned jobs = 1;
};

struct SweepRow {
    std::size_t dim = 0;
    double sparsity = 0.0;
    unsigned width = 0;
    Scheme scheme = Scheme::PN;
    CostReport report;
};

/// Cartesian product dims x sparsities x widths, each cell a square signed
/// element-sparse matrix evaluated under every scheme. Rows are ordered by
/// grid index.
std::vector<SweepRow> sweep(const SweepGrid& grid, const DeviceProfile& profile, std::uint64_t seed);

/// Header `dim,sparsity,width,scheme,ones,luts,ffs,slrs,fmax_mhz,cycles,ns,fits`.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace serialforge
