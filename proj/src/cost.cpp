#include "serialforge/cost.hpp"

#include "serialforge/csd.hpp"
#include "serialforge/error.hpp"
#include "serialforge/matrix_io.hpp"
#include "serialforge/parallel.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace serialforge {

void DeviceProfile::validate() const
{
    if (luts_per_slr == 0 || slr_count == 0) throw ArgumentError("device profile capacities must be positive");
    if (!(occupancy_threshold > 0.0 && occupancy_threshold <= 1.0))
        throw ArgumentError("occupancy_threshold must be in (0, 1]");
    if (freq_buckets_mhz.size() != slr_count)
        throw ArgumentError("freq_buckets must cover 1.." + std::to_string(slr_count) + " SLRs");
    for (std::size_t i = 0; i < freq_buckets_mhz.size(); ++i) {
        if (!(freq_buckets_mhz[i] > 0.0)) throw ArgumentError("bucket frequencies must be positive");
        if (i > 0 && freq_buckets_mhz[i] > freq_buckets_mhz[i - 1])
            throw ArgumentError("bucket frequencies must not increase with SLR count");
    }
    if (watts_per_lut_mhz && !(*watts_per_lut_mhz > 0.0)) throw ArgumentError("watts_per_lut_mhz must be positive");
    if (!(thermal_limit_w > 0.0)) throw ArgumentError("thermal_limit_w must be positive");
}

double DeviceProfile::fmax_for(std::uint64_t slrs) const
{
    if (slrs == 0) slrs = 1;
    const std::size_t index = std::min<std::uint64_t>(slrs, freq_buckets_mhz.size()) - 1;
    return freq_buckets_mhz[index];
}

DeviceProfile default_profile() { return DeviceProfile{}; }

namespace {

template <typename T>
T positive_count(const nlohmann::json& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
        throw ArgumentError(std::string(key) + " must be a positive integer");
    return v.get<T>();
}

}  // namespace

DeviceProfile profile_from_json(const nlohmann::json& j)
{
    DeviceProfile p;
    try {
        p.luts_per_slr = positive_count(j, "luts_per_slr", p.luts_per_slr);
        p.slr_count = positive_count(j, "slr_count", p.slr_count);
        const double last_bucket = p.freq_buckets_mhz.back();
        p.freq_buckets_mhz.resize(p.slr_count, last_bucket);
        p.occupancy_threshold = j.value("occupancy_threshold", p.occupancy_threshold);
        p.thermal_limit_w = j.value("thermal_limit_w", p.thermal_limit_w);
        if (j.contains("watts_per_lut_mhz")) p.watts_per_lut_mhz = j.at("watts_per_lut_mhz").get<double>();
        if (j.contains("freq_buckets")) {
            const auto& jb = j.at("freq_buckets");
            std::vector<double> buckets(p.slr_count, 0.0);
            for (auto it = jb.begin(); it != jb.end(); ++it) {
                const long key = std::stol(it.key());
                if (key < 1 || key > static_cast<long>(p.slr_count))
                    throw ArgumentError("freq_buckets key " + it.key() + " outside 1.." + std::to_string(p.slr_count));
                buckets[static_cast<std::size_t>(key - 1)] = it.value().get<double>();
            }
            if (buckets.front() == 0.0) throw ArgumentError("freq_buckets must define key \"1\"");
            for (std::size_t i = 1; i < buckets.size(); ++i)
                if (buckets[i] == 0.0) buckets[i] = buckets[i - 1];
            p.freq_buckets_mhz = std::move(buckets);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed device profile: ") + e.what());
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const ArgumentError*>(&e)) throw;
        throw ParseError(std::string("malformed device profile: ") + e.what());
    }
    p.validate();
    return p;
}

nlohmann::json profile_to_json(const DeviceProfile& p)
{
    nlohmann::json buckets = nlohmann::json::object();
    for (std::size_t i = 0; i < p.freq_buckets_mhz.size(); ++i) buckets[std::to_string(i + 1)] = p.freq_buckets_mhz[i];
    nlohmann::json j{{"luts_per_slr", p.luts_per_slr},
                     {"slr_count", p.slr_count},
                     {"occupancy_threshold", p.occupancy_threshold},
                     {"freq_buckets", buckets},
                     {"thermal_limit_w", p.thermal_limit_w}};
    if (p.watts_per_lut_mhz) j["watts_per_lut_mhz"] = *p.watts_per_lut_mhz;
    return j;
}

DeviceProfile read_profile(const std::filesystem::path& path)
{
    return profile_from_json(parse_json(read_text_file(path)));
}

CostReport estimate(const MatrixPair& pair, unsigned input_bitwidth, const DeviceProfile& profile,
                    const std::optional<NetlistStats>& netlist_stats, unsigned extension)
{
    CostReport r;
    r.ones = pair.ones();
    r.lut_estimate = r.ones;
    r.ff_estimate = 2 * r.lut_estimate;
    if (netlist_stats) {
        r.exact_adders = netlist_stats->adders + netlist_stats->subtractors;
        r.exact_ffs = netlist_stats->delay_ffs;
    }
    const double per_slr = profile.occupancy_threshold * static_cast<double>(profile.luts_per_slr);
    r.slrs_used = static_cast<std::uint64_t>(std::ceil(static_cast<double>(r.lut_estimate) / per_slr));
    r.fmax_mhz = profile.fmax_for(r.slrs_used);
    std::uint32_t depth = 0;
    while ((std::size_t{1} << depth) < pair.rows()) ++depth;
    r.latency_cycles = input_bitwidth + pair.bitwidth() + depth + 2 + extension;
    r.latency_ns = r.latency_cycles * 1000.0 / r.fmax_mhz;
    r.fits = r.slrs_used <= profile.slr_count;
    if (profile.watts_per_lut_mhz) {
        r.power_w = *profile.watts_per_lut_mhz * static_cast<double>(r.lut_estimate) * r.fmax_mhz;
        r.fits_thermal = *r.power_w <= profile.thermal_limit_w;
    }
    return r;
}

nlohmann::json report_to_json(const CostReport& r)
{
    nlohmann::json j{{"ones", r.ones},
                     {"lut_estimate", r.lut_estimate},
                     {"ff_estimate", r.ff_estimate},
                     {"slrs_used", r.slrs_used},
                     {"fmax_mhz", r.fmax_mhz},
                     {"latency_cycles", r.latency_cycles},
                     {"latency_ns", r.latency_ns},
                     {"fits", r.fits}};
    if (r.exact_adders) j["exact_adders"] = *r.exact_adders;
    if (r.exact_ffs) j["exact_ffs"] = *r.exact_ffs;
    if (r.power_w) j["power_w"] = *r.power_w;
    if (r.fits_thermal) j["fits_thermal"] = *r.fits_thermal;
    return j;
}

std::string to_string(Scheme scheme) { return scheme == Scheme::PN ? "pn" : "csd"; }

Scheme scheme_from_string(const std::string& name)
{
    if (name == "PN" || name == "pn") return Scheme::PN;
    if (name == "CSD" || name == "csd") return Scheme::CSD;
    throw ArgumentError("unknown scheme \"" + name + "\" (expected pn or csd)");
}

std::vector<SweepRow> sweep(const SweepGrid& grid, const DeviceProfile& profile, std::uint64_t seed)
{
    struct Cell {
        std::size_t dim;
        std::size_t sparsity_index;
        unsigned width;
    };
    std::vector<Cell> cells;
    for (std::size_t dim : grid.dims)
        for (std::size_t s = 0; s < grid.sparsities.size(); ++s)
            for (unsigned width : grid.widths) cells.push_back({dim, s, width});

    const std::size_t per_cell = grid.schemes.size();
    std::vector<SweepRow> rows(cells.size() * per_cell);
    parallel_for(cells.size(), grid.jobs, [&](std::size_t i) {
        const Cell& cell = cells[i];
        const double sparsity = grid.sparsities[cell.sparsity_index];
        const std::uint64_t cell_seed = Rng::stream(seed, "sweep", {cell.dim, cell.sparsity_index, cell.width})();
        const IntMatrix m = gen_element_sparse(cell.dim, cell.dim, cell.width, Signedness::Signed, sparsity, cell_seed);
        const unsigned input_bw = grid.input_bitwidth ? grid.input_bitwidth : cell.width;
        for (std::size_t k = 0; k < per_cell; ++k) {
            const Scheme scheme = grid.schemes[k];
            const MatrixPair pair = scheme == Scheme::PN ? pn_split(m) : csd_transform(m, cell_seed);
            rows[i * per_cell + k] = SweepRow{cell.dim, sparsity, cell.width, scheme, estimate(pair, input_bw, profile)};
        }
    });
    return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows)
{
    out << "dim,sparsity,width,scheme,ones,luts,ffs,slrs,fmax_mhz,cycles,ns,fits\n";
    for (const SweepRow& row : rows) {
        const CostReport& r = row.report;
        std::ostringstream line;
        line << row.dim << ',' << row.sparsity << ',' << row.width << ',' << to_string(row.scheme) << ',' << r.ones
             << ',' << r.lut_estimate << ',' << r.ff_estimate << ',' << r.slrs_used << ',' << r.fmax_mhz << ','
             << r.latency_cycles << ',' << std::fixed << std::setprecision(3) << r.latency_ns << ','
             << (r.fits ? "true" : "false") << '\n';
        out << line.str();
    }
}

}  // namespace serialforge
