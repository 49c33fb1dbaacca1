// serialforge command-line driver.
//
// Exit codes: 0 success, 2 usage error, 3 missing or unwritable file,
// 4 validation or parse failure. Errors print one line to stderr:
//   error: <usage|io|invalid>: <message>

#include "serialforge/compile.hpp"
#include "serialforge/cost.hpp"
#include "serialforge/csd.hpp"
#include "serialforge/error.hpp"
#include "serialforge/esn.hpp"
#include "serialforge/matrix.hpp"
#include "serialforge/matrix_io.hpp"
#include "serialforge/netlist.hpp"
#include "serialforge/oracle.hpp"
#include "serialforge/sim.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sf = serialforge;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitInvalid = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::string profile_path;
    int verbosity = 0;
};

std::uint64_t require_seed(const GlobalOptions& g, const char* command)
{
    if (!g.seed) throw UsageError(std::string(command) + " is stochastic and requires --seed");
    return *g.seed;
}

sf::DeviceProfile load_profile(const GlobalOptions& g)
{
    return g.profile_path.empty() ? sf::default_profile() : sf::read_profile(g.profile_path);
}

void emit(const std::string& out_path, const std::string& text)
{
    if (out_path.empty() || out_path == "-") std::cout << text;
    else sf::write_text_file(out_path, text);
}

void log(const GlobalOptions& g, const std::string& message)
{
    if (g.verbosity > 0) std::cerr << "serialforge: " << message << '\n';
}

sf::CoinMode coin_from_string(const std::string& name)
{
    if (name == "random") return sf::CoinMode::Random;
    if (name == "heads") return sf::CoinMode::AlwaysHeads;
    if (name == "tails") return sf::CoinMode::AlwaysTails;
    throw UsageError("--coin must be random, heads or tails");
}

/// Pair source shared by compile and cost: either --p/--n files or --in with a scheme.
struct PairSource {
    std::string p_path;
    std::string n_path;
    std::string in_path;
    std::string scheme = "pn";
    std::string coin = "random";

    void add_to(CLI::App* cmd)
    {
        cmd->add_option("--p", p_path, "Positive half of a matrix pair");
        cmd->add_option("--n", n_path, "Negative half of a matrix pair");
        cmd->add_option("--in", in_path, "Signed source matrix (split with --scheme)");
        cmd->add_option("--scheme", scheme, "pn or csd, used with --in")->check(CLI::IsMember({"pn", "csd"}));
        cmd->add_option("--coin", coin, "Length-2 chain policy for csd: random, heads or tails")
            ->check(CLI::IsMember({"random", "heads", "tails"}));
    }

    sf::MatrixPair load(const GlobalOptions& g) const
    {
        if (!in_path.empty()) {
            if (!p_path.empty() || !n_path.empty()) throw UsageError("use either --in or --p/--n, not both");
            const sf::IntMatrix m = sf::read_matrix(in_path);
            if (scheme == "pn") return sf::pn_split(m);
            const sf::CoinMode mode = coin_from_string(coin);
            const std::uint64_t seed = mode == sf::CoinMode::Random ? require_seed(g, "csd scheme") : g.seed.value_or(0);
            return sf::csd_transform(m, seed, mode);
        }
        if (p_path.empty() || n_path.empty()) throw UsageError("a matrix pair needs --p and --n (or --in)");
        sf::MatrixPair pair{sf::read_matrix(p_path), sf::read_matrix(n_path)};
        if (pair.p.is_signed() || pair.n.is_signed()) throw sf::ArgumentError("pair halves must be unsigned matrices");
        return pair;
    }
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag)
{
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::istringstream parse(item);
        T value{};
        if (!(parse >> value) || !parse.eof()) throw UsageError(std::string("bad value \"") + item + "\" in " + flag);
        out.push_back(value);
    }
    return out;
}

int run_gen(const GlobalOptions& g, std::size_t rows, std::size_t cols, unsigned bitwidth, bool is_signed,
            std::optional<double> bit_sparsity, std::optional<double> element_sparsity, const std::string& out)
{
    const std::uint64_t seed = require_seed(g, "gen");
    if (bit_sparsity.has_value() == element_sparsity.has_value())
        throw UsageError("gen needs exactly one of --bit-sparsity or --element-sparsity");
    sf::IntMatrix m = bit_sparsity
                          ? (is_signed ? throw UsageError("--bit-sparsity generates unsigned matrices")
                                       : sf::gen_bit_sparse(rows, cols, bitwidth, *bit_sparsity, seed))
                          : sf::gen_element_sparse(rows, cols, bitwidth,
                                                   is_signed ? sf::Signedness::Signed : sf::Signedness::Unsigned,
                                                   *element_sparsity, seed);
    const auto s = sf::stats(m);
    log(g, "generated " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix, ones "
               + std::to_string(s.ones_count));
    emit(out, sf::matrix_to_json(m).dump() + "\n");
    return 0;
}

int run_csd(const GlobalOptions& g, const std::string& in, const std::string& out_p, const std::string& out_n,
            const std::string& scheme, const std::string& coin)
{
    const sf::IntMatrix m = sf::read_matrix(in);
    sf::MatrixPair pair = [&] {
        if (scheme == "pn") return sf::pn_split(m);
        const sf::CoinMode mode = coin_from_string(coin);
        const std::uint64_t seed = mode == sf::CoinMode::Random ? require_seed(g, "csd") : g.seed.value_or(0);
        return sf::csd_transform(m, seed, mode);
    }();
    sf::write_matrix(pair.p, out_p);
    sf::write_matrix(pair.n, out_n);
    const std::uint64_t source_ones = sf::ones_count(m);
    const std::uint64_t p_ones = sf::ones_count(pair.p);
    const std::uint64_t n_ones = sf::ones_count(pair.n);
    nlohmann::json summary{{"scheme", scheme},
                           {"bitwidth", pair.bitwidth()},
                           {"source_ones", source_ones},
                           {"p_ones", p_ones},
                           {"n_ones", n_ones},
                           {"total_ones", p_ones + n_ones},
                           {"reduction", source_ones ? 1.0 - static_cast<double>(p_ones + n_ones) / source_ones : 0.0}};
    std::cout << summary.dump() << '\n';
    return 0;
}

nlohmann::json stats_json(const sf::NetlistStats& s)
{
    return {{"adders", s.adders}, {"subtractors", s.subtractors}, {"delay_ffs", s.delay_ffs}, {"total_nodes", s.total_nodes}};
}

int run_compile(const GlobalOptions& g, const PairSource& source, unsigned input_bitwidth, unsigned extension,
                const std::string& out, const std::string& dump)
{
    const sf::MatrixPair pair = source.load(g);
    const sf::Netlist net = sf::compile(pair, input_bitwidth, sf::CompileOptions{extension});
    if (out.empty()) throw UsageError("compile needs --out");
    sf::export_netlist(net, out);
    if (!dump.empty()) sf::write_text_file(dump, sf::structural_dump(net));
    nlohmann::json j = stats_json(sf::stats(net));
    j["latency_cycles"] = sf::expected_latency(net.meta(), extension);
    std::cout << j.dump() << '\n';
    return 0;
}

int run_simulate(const sf::Netlist& net, const std::string& input_path, const std::string& trace_path,
                 std::optional<unsigned> extension, const std::string& out)
{
    const nlohmann::json input = sf::parse_json(sf::read_text_file(input_path));
    const nlohmann::json& data = input.is_object() ? input.at("data") : input;
    if (!data.is_array()) throw sf::ParseError("input must be an array of integers or of integer arrays");
    sf::SimOptions options;
    options.extension = extension;
    nlohmann::json result;
    try {
        if (!data.empty() && data.front().is_array()) {
            if (!trace_path.empty()) throw UsageError("--trace needs a single input vector");
            const auto vectors = data.get<std::vector<std::vector<std::int64_t>>>();
            const sf::BatchResult batch = sf::simulate_batch(net, vectors, options);
            nlohmann::json outputs = nlohmann::json::array();
            for (const auto& r : batch.results) outputs.push_back(r.outputs);
            result = {{"results", outputs},
                      {"latency_cycles", batch.results.empty() ? 0 : batch.results.front().latency_cycles},
                      {"total_cycles", batch.total_cycles}};
        } else {
            const auto vector = data.get<std::vector<std::int64_t>>();
            options.trace = !trace_path.empty();
            const sf::SimResult r = sf::simulate(net, vector, options);
            if (options.trace) {
                std::ostringstream csv;
                sf::write_trace_csv(csv, r.trace);
                sf::write_text_file(trace_path, csv.str());
            }
            result = {{"outputs", r.outputs}, {"latency_cycles", r.latency_cycles}, {"stream_bits", r.stream_bits}};
        }
    } catch (const nlohmann::json::exception& e) {
        throw sf::ParseError(std::string("malformed input vector: ") + e.what());
    }
    emit(out, result.dump() + "\n");
    return 0;
}

int run_cost(const GlobalOptions& g, const PairSource& source, unsigned input_bitwidth, const std::string& netlist_path,
             unsigned extension, const std::string& out)
{
    const sf::MatrixPair pair = source.load(g);
    std::optional<sf::NetlistStats> census;
    if (!netlist_path.empty()) census = sf::stats(sf::import_netlist(netlist_path));
    const sf::CostReport report = sf::estimate(pair, input_bitwidth, load_profile(g), census, extension);
    emit(out, sf::report_to_json(report).dump() + "\n");
    return 0;
}

struct SweepArgs {
    std::string kind;
    std::string dims = "512,1024";
    std::string sparsities = "0.4,0.5,0.6,0.7,0.8,0.9,0.95,0.98";
    std::string widths = "8";
    std::string batches = "1,2,4,8,16,32,64";
    std::string scheme = "csd";
    double sparsity = 0.98;
    std::size_t dim = 1024;
    unsigned input_bitwidth = 8;
    unsigned weight_bitwidth = 8;
    unsigned jobs = 1;
    bool large = false;
    std::string out;
};

void check_dims(const std::vector<std::size_t>& dims, bool large)
{
    for (std::size_t d : dims) {
        if (d == 0) throw UsageError("dimensions must be positive");
        if (d > 2048 && !large) throw UsageError("dimension " + std::to_string(d) + " needs --large");
    }
}

int run_sweep(const GlobalOptions& g, const SweepArgs& a)
{
    const std::uint64_t seed = require_seed(g, "sweep");
    const sf::DeviceProfile profile = load_profile(g);
    std::ostringstream csv;
    if (a.kind == "cost") {
        sf::SweepGrid grid;
        grid.dims = parse_list<std::size_t>(a.dims, "--dims");
        grid.sparsities = parse_list<double>(a.sparsities, "--sparsities");
        grid.widths = parse_list<unsigned>(a.widths, "--widths");
        grid.input_bitwidth = a.input_bitwidth;
        grid.jobs = a.jobs;
        check_dims(grid.dims, a.large);
        const auto rows = sf::sweep(grid, profile, seed);
        sf::write_sweep_csv(csv, rows);
    } else {
        sf::BenchConfig config;
        config.scheme = sf::scheme_from_string(a.scheme);
        config.input_bitwidth = a.input_bitwidth;
        config.weight_bitwidth = a.weight_bitwidth;
        config.jobs = a.jobs;
        std::vector<sf::BenchRow> rows;
        if (a.kind == "latency") {
            const auto dims = parse_list<std::size_t>(a.dims, "--dims");
            check_dims(dims, a.large);
            rows = sf::run_latency_sweep(dims, a.sparsity, seed, profile, config);
        } else {
            check_dims({a.dim}, a.large);
            const auto batches = parse_list<std::size_t>(a.batches, "--batches");
            rows = sf::run_batch_sweep(a.dim, a.sparsity, batches, seed, profile, config);
        }
        sf::write_bench_csv(csv, rows);
        for (const auto& row : rows)
            if (!row.verified) throw sf::ArgumentError("simulated outputs disagree with the gemv oracle");
    }
    emit(a.out, csv.str());
    return 0;
}

int run_esn(const GlobalOptions& g, const std::string& config_path, const std::string& task_name,
            const std::string& backend_name, const std::string& report_path, std::optional<std::size_t> steps,
            std::optional<std::size_t> washout, std::optional<double> ridge)
{
    nlohmann::json jc = sf::parse_json(sf::read_text_file(config_path));
    if (g.seed) jc["seed"] = *g.seed;
    if (!jc.contains("seed")) throw UsageError("esn requires a seed in the config or via --seed");
    const sf::EsnConfig config = sf::esn_config_from_json(jc);
    sf::TaskSpec task = sf::task_from_string(task_name);
    if (steps) task.steps = *steps;
    if (washout) task.washout = *washout;
    if (ridge) task.ridge = *ridge;
    const sf::Backend backend = sf::backend_from_string(backend_name);
    const sf::TaskReport report = sf::demo_task(config, task, backend);
    nlohmann::json j = sf::task_report_to_json(report);
    j["task"] = sf::to_string(task);
    j["backend"] = sf::to_string(backend);
    j["config"] = sf::esn_config_to_json(config);
    emit(report_path, j.dump(2) + "\n");
    return 0;
}

std::string one_line(std::string s)
{
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

int fail(const char* category, const std::string& message, int code)
{
    std::cerr << "error: " << category << ": " << one_line(message) << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Compile, simulate and cost fixed-matrix bit-serial multipliers", "serialforge"};
    app.set_version_flag("--version", std::string("serialforge ") + SERIALFORGE_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "64-bit seed for every random draw");
    app.add_option("--profile", g.profile_path, "Device profile JSON");
    app.add_flag("-v,--verbose", g.verbosity, "Log progress to stderr");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a random sparse matrix");
    std::size_t rows = 0, cols = 0;
    unsigned bitwidth = 8;
    bool gen_signed = false;
    std::optional<double> bit_sparsity, element_sparsity;
    std::string gen_out;
    gen->add_option("--rows", rows, "Rows")->required();
    gen->add_option("--cols", cols, "Columns")->required();
    gen->add_option("--bitwidth", bitwidth, "Element bit-width")->required();
    gen->add_flag("--signed", gen_signed, "Signed elements (element-sparse only)");
    gen->add_option("--bit-sparsity", bit_sparsity, "Probability that each bit is 0");
    gen->add_option("--element-sparsity", element_sparsity, "Fraction of elements forced to 0");
    gen->add_option("--out", gen_out, "Output matrix file (default stdout)");

    // csd
    auto* csd = app.add_subcommand("csd", "Split a signed matrix into unsigned P and N halves");
    std::string csd_in, csd_out_p, csd_out_n, csd_scheme = "csd", csd_coin = "random";
    csd->add_option("--in", csd_in, "Source matrix")->required();
    csd->add_option("--out-p", csd_out_p, "Output P matrix")->required();
    csd->add_option("--out-n", csd_out_n, "Output N matrix")->required();
    csd->add_option("--scheme", csd_scheme, "csd or pn")->check(CLI::IsMember({"pn", "csd"}));
    csd->add_option("--coin", csd_coin, "random, heads or tails")->check(CLI::IsMember({"random", "heads", "tails"}));

    // compile
    auto* comp = app.add_subcommand("compile", "Compile a matrix pair into a bit-serial netlist");
    PairSource comp_src;
    comp_src.add_to(comp);
    unsigned comp_bw = 8, comp_ext = 0;
    std::string comp_out, comp_dump;
    comp->add_option("--input-bitwidth", comp_bw, "Input vector bit-width");
    comp->add_option("--extend", comp_ext, "Default extra sign-extension cycles");
    comp->add_option("--out", comp_out, "Netlist JSON")->required();
    comp->add_option("--dump", comp_dump, "Line-based structural dump");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a netlist cycle by cycle");
    std::string sim_netlist, sim_input, sim_trace, sim_out;
    std::optional<unsigned> sim_ext;
    sim->add_option("--netlist", sim_netlist, "Netlist JSON")->required();
    sim->add_option("--input", sim_input, "Input vector JSON (array, or array of arrays for a batch)")->required();
    sim->add_option("--trace", sim_trace, "Per-cycle register CSV");
    sim->add_option("--extend", sim_ext, "Extra sign-extension cycles");
    sim->add_option("--out", sim_out, "Result JSON (default stdout)");

    // cost
    auto* cost = app.add_subcommand("cost", "Estimate LUTs, FFs, frequency and latency");
    PairSource cost_src;
    cost_src.add_to(cost);
    unsigned cost_bw = 8, cost_ext = 0;
    std::string cost_netlist, cost_out;
    cost->add_option("--input-bitwidth", cost_bw, "Input vector bit-width");
    cost->add_option("--netlist", cost_netlist, "Compiled netlist for exact node counts");
    cost->add_option("--extend", cost_ext, "Extra sign-extension cycles");
    cost->add_option("--out", cost_out, "Report JSON (default stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Cost, latency or batch sweeps as CSV");
    SweepArgs sw;
    sweep->add_option("kind", sw.kind, "cost | latency | batch")->required()->check(CLI::IsMember({"cost", "latency", "batch"}));
    sweep->add_option("--dims", sw.dims, "Comma-separated dimensions (cost, latency)");
    sweep->add_option("--sparsities", sw.sparsities, "Comma-separated element sparsities (cost)");
    sweep->add_option("--widths", sw.widths, "Comma-separated weight bit-widths (cost)");
    sweep->add_option("--sparsity", sw.sparsity, "Element sparsity (latency, batch)");
    sweep->add_option("--dim", sw.dim, "Dimension (batch)");
    sweep->add_option("--batches", sw.batches, "Comma-separated batch sizes (batch)");
    sweep->add_option("--scheme", sw.scheme, "pn or csd (latency, batch)")->check(CLI::IsMember({"pn", "csd"}));
    sweep->add_option("--input-bitwidth", sw.input_bitwidth, "Input bit-width");
    sweep->add_option("--weight-bitwidth", sw.weight_bitwidth, "Weight bit-width (latency, batch)");
    sweep->add_option("--jobs", sw.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sweep->add_flag("--large", sw.large, "Allow dimensions above 2048");
    sweep->add_option("--out", sw.out, "CSV output (default stdout)");

    // esn
    auto* esn = app.add_subcommand("esn", "Run an echo state network demo task");
    std::string esn_config, esn_task = "sine", esn_backend = "reference", esn_report;
    std::optional<std::size_t> esn_steps, esn_washout;
    std::optional<double> esn_ridge;
    esn->add_option("--config", esn_config, "ESN config JSON")->required();
    esn->add_option("--task", esn_task, "sine | recall | recall:<delay>");
    esn->add_option("--backend", esn_backend, "reference or netlist")->check(CLI::IsMember({"reference", "netlist"}));
    esn->add_option("--report", esn_report, "Report JSON (default stdout)");
    esn->add_option("--steps", esn_steps, "Total steps");
    esn->add_option("--washout", esn_washout, "Initial steps excluded from training");
    esn->add_option("--ridge", esn_ridge, "Ridge coefficient");

    // trace-adder
    auto* adder = app.add_subcommand("trace-adder", "Print the cycle trace of one bit-serial addition");
    std::uint64_t add_a = 0, add_b = 0;
    std::optional<unsigned> add_cycles;
    adder->add_option("-a,--a,a", add_a, "First operand")->required();
    adder->add_option("-b,--b,b", add_b, "Second operand")->required();
    adder->add_option("--cycles", add_cycles, "Cycles (default: enough for the sum)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), kExitUsage);
    }
    if (*seed_opt) g.seed = seed_value;

    try {
        if (*gen) return run_gen(g, rows, cols, bitwidth, gen_signed, bit_sparsity, element_sparsity, gen_out);
        if (*csd) return run_csd(g, csd_in, csd_out_p, csd_out_n, csd_scheme, csd_coin);
        if (*comp) return run_compile(g, comp_src, comp_bw, comp_ext, comp_out, comp_dump);
        if (*sim) return run_simulate(sf::import_netlist(sim_netlist), sim_input, sim_trace, sim_ext, sim_out);
        if (*cost) return run_cost(g, cost_src, cost_bw, cost_netlist, cost_ext, cost_out);
        if (*sweep) return run_sweep(g, sw);
        if (*esn) return run_esn(g, esn_config, esn_task, esn_backend, esn_report, esn_steps, esn_washout, esn_ridge);
        if (*adder) {
            unsigned cycles = add_cycles.value_or(0);
            if (!add_cycles) {
                const std::uint64_t sum_bits = static_cast<std::uint64_t>(std::bit_width(std::max(add_a, add_b))) + 1;
                cycles = static_cast<unsigned>(std::clamp<std::uint64_t>(sum_bits, 1, 64));
            }
            std::cout << sf::format_adder_trace(sf::adder_trace(add_a, add_b, cycles));
            return 0;
        }
    } catch (const UsageError& e) {
        return fail("usage", e.what(), kExitUsage);
    } catch (const sf::IoError& e) {
        return fail("io", e.what(), kExitIo);
    } catch (const sf::ParseError& e) {
        return fail("invalid", e.what(), kExitInvalid);
    } catch (const sf::SolverError& e) {
        return fail("invalid", e.what(), kExitInvalid);
    } catch (const std::logic_error& e) {
        return fail("invalid", e.what(), kExitInvalid);
    } catch (const std::exception& e) {
        return fail("invalid", e.what(), kExitInvalid);
    }
    return fail("usage", "no subcommand", kExitUsage);
}
