#include "serialforge/esn.hpp"

#include "serialforge/compile.hpp"
#include "serialforge/csd.hpp"
#include "serialforge/error.hpp"
#include "serialforge/oracle.hpp"
#include "serialforge/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace serialforge {

namespace {

constexpr std::string_view kActivationNames[] = {"shift_clamp", "identity_clamp"};

unsigned bits_for_magnitude(std::uint64_t bound) noexcept
{
    // Smallest S with bound <= 2^(S-1) - 1.
    unsigned s = 1;
    while (s < 64 && bound > (std::uint64_t{1} << (s - 1)) - 1) ++s;
    return s;
}

}  // namespace

std::string to_string(Backend backend) { return backend == Backend::Reference ? "reference" : "netlist"; }

Backend backend_from_string(const std::string& name)
{
    if (name == "reference") return Backend::Reference;
    if (name == "netlist") return Backend::Netlist;
    throw ArgumentError("unknown backend \"" + name + "\" (expected reference or netlist)");
}

void EsnConfig::validate() const
{
    if (reservoir_dim == 0 || input_dim == 0 || output_dim == 0) throw ArgumentError("ESN dimensions must be positive");
    for (unsigned w : {weight_bitwidth, state_bitwidth, input_bitwidth})
        if (w < 1 || w > 16) throw ArgumentError("ESN bit-widths must be in [1, 16]");
    if (!(element_sparsity >= 0.0 && element_sparsity <= 1.0)) throw ArgumentError("element_sparsity must be in [0, 1]");
    if (shift > 32) throw ArgumentError("activation shift must be at most 32");
}

EsnConfig esn_config_from_json(const nlohmann::json& j)
{
    EsnConfig c;
    try {
        c.reservoir_dim = j.value("reservoir_dim", c.reservoir_dim);
        c.input_dim = j.value("input_dim", c.input_dim);
        c.output_dim = j.value("output_dim", c.output_dim);
        c.weight_bitwidth = j.value("weight_bitwidth", c.weight_bitwidth);
        c.state_bitwidth = j.value("state_bitwidth", c.state_bitwidth);
        c.input_bitwidth = j.value("input_bitwidth", c.input_bitwidth);
        c.element_sparsity = j.value("element_sparsity", c.element_sparsity);
        c.shift = j.value("shift", c.shift);
        c.seed = j.value("seed", c.seed);
        if (j.contains("activation")) {
            const auto name = j.at("activation").get<std::string>();
            if (name == kActivationNames[0]) c.activation = Activation::ShiftClamp;
            else if (name == kActivationNames[1]) c.activation = Activation::IdentityClamp;
            else throw ArgumentError("unknown activation \"" + name + "\"");
        }
        if (j.contains("scheme")) c.scheme = scheme_from_string(j.at("scheme").get<std::string>());
        if (j.contains("extension") && !j.at("extension").is_null())
            c.extension = j.at("extension").get<unsigned>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed ESN config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json esn_config_to_json(const EsnConfig& c)
{
    nlohmann::json j{{"reservoir_dim", c.reservoir_dim},
                     {"input_dim", c.input_dim},
                     {"output_dim", c.output_dim},
                     {"weight_bitwidth", c.weight_bitwidth},
                     {"state_bitwidth", c.state_bitwidth},
                     {"input_bitwidth", c.input_bitwidth},
                     {"element_sparsity", c.element_sparsity},
                     {"activation", kActivationNames[static_cast<std::size_t>(c.activation)]},
                     {"shift", c.shift},
                     {"scheme", to_string(c.scheme)},
                     {"seed", c.seed}};
    j["extension"] = c.extension ? nlohmann::json(*c.extension) : nlohmann::json(nullptr);
    return j;
}

Reservoir::Reservoir(const EsnConfig& config)
    : config_((config.validate(), config)),
      w_(gen_element_sparse(config.reservoir_dim, config.reservoir_dim, config.weight_bitwidth, Signedness::Signed,
                            config.element_sparsity, Rng::stream(config.seed, "esn-w")())),
      w_in_(gen_element_sparse(config.reservoir_dim, config.input_dim, config.weight_bitwidth, Signedness::Signed, 0.0,
                               Rng::stream(config.seed, "esn-w-in")())),
      w_t_(w_.transposed()),
      w_in_t_(w_in_.transposed())
{
    const unsigned pair_width = config_.weight_bitwidth + (config_.scheme == Scheme::CSD ? 1 : 0);
    if (config_.extension) {
        extension_ = *config_.extension;
    } else {
        const std::uint64_t x_max = std::uint64_t{1} << (config_.state_bitwidth - 1);
        std::uint64_t bound = 0;
        for (std::size_t i = 0; i < w_.rows(); ++i) {
            std::uint64_t row = 0;
            for (std::size_t j = 0; j < w_.cols(); ++j) row += static_cast<std::uint64_t>(std::llabs(w_(i, j)));
            bound = std::max(bound, row * x_max);
        }
        const unsigned needed = bits_for_magnitude(bound);
        const unsigned base = config_.state_bitwidth + pair_width;
        extension_ = needed > base ? needed - base : 0;
    }
}

EsnState Reservoir::initial_state() const { return EsnState{std::vector<std::int64_t>(config_.reservoir_dim, 0), 0}; }

const Netlist& Reservoir::netlist() const
{
    std::call_once(compiled_flag_, [this] {
        // Circuit inputs are the rows of the compiled matrix, so W x = x^T W^T.
        const MatrixPair pair = config_.scheme == Scheme::PN ? pn_split(w_t_)
                                                             : csd_transform(w_t_, Rng::stream(config_.seed, "esn-csd")());
        netlist_ = std::make_unique<Netlist>(compile(pair, config_.state_bitwidth, CompileOptions{extension_}));
    });
    return *netlist_;
}

std::int64_t Reservoir::activate(std::int64_t pre) const noexcept
{
    const unsigned s = config_.activation == Activation::ShiftClamp ? config_.shift : 0;
    const std::int64_t shifted = pre >> s;
    const std::int64_t lo = min_representable(config_.state_bitwidth, Signedness::Signed);
    const std::int64_t hi = max_representable(config_.state_bitwidth, Signedness::Signed);
    return std::clamp(shifted, lo, hi);
}

EsnState Reservoir::step(const EsnState& state, std::span<const std::int64_t> u, Backend backend) const
{
    if (state.x.size() != config_.reservoir_dim) throw ArgumentError("ESN state has the wrong dimension");
    if (u.size() != config_.input_dim) throw ArgumentError("ESN input has the wrong dimension");
    const std::int64_t u_lo = min_representable(config_.input_bitwidth, Signedness::Signed);
    const std::int64_t u_hi = max_representable(config_.input_bitwidth, Signedness::Signed);
    for (std::int64_t v : u)
        if (v < u_lo || v > u_hi) throw ArgumentError("ESN input exceeds input_bitwidth");

    const auto drive = gemv(w_in_t_, u);
    std::vector<std::int64_t> recurrent;
    if (backend == Backend::Reference) {
        recurrent = gemv(w_t_, state.x);
    } else {
        recurrent = simulate(netlist(), state.x).outputs;
    }
    EsnState next;
    next.step = state.step + 1;
    next.x.resize(config_.reservoir_dim);
    for (std::size_t i = 0; i < next.x.size(); ++i) next.x[i] = activate(drive[i] + recurrent[i]);
    return next;
}

ReadoutFit train_readout(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets, double ridge)
{
    if (states.cols() != targets.cols()) throw ArgumentError("states and targets need the same number of samples");
    if (ridge < 0.0) throw ArgumentError("ridge must be non-negative");
    const Eigen::Index features = states.rows();
    Eigen::MatrixXd gram = states * states.transpose();
    gram.diagonal().array() += ridge;
    const Eigen::MatrixXd rhs = states * targets.transpose();

    Eigen::MatrixXd solution;
    if (ridge == 0.0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        if (!lu.isInvertible())
            throw SolverError("readout normal equations are singular (rank " + std::to_string(lu.rank()) + " of "
                              + std::to_string(features) + "); use a ridge > 0");
        solution = lu.solve(rhs);
    } else {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success) throw SolverError("readout solve failed");
        solution = ldlt.solve(rhs);
    }
    ReadoutFit fit;
    fit.w_out = solution.transpose();
    fit.residual = (fit.w_out * states - targets).norm();
    return fit;
}

TaskSpec task_from_string(const std::string& name)
{
    TaskSpec t;
    if (name == "sine") {
        t.kind = TaskSpec::Kind::SinePrediction;
    } else if (name == "recall") {
        t.kind = TaskSpec::Kind::DelayedRecall;
    } else if (name.starts_with("recall:")) {
        t.kind = TaskSpec::Kind::DelayedRecall;
        try {
            t.delay = std::stoul(name.substr(7));
        } catch (const std::exception&) {
            throw ArgumentError("bad recall delay in \"" + name + "\"");
        }
    } else {
        throw ArgumentError("unknown task \"" + name + "\" (expected sine, recall or recall:<delay>)");
    }
    return t;
}

std::string to_string(const TaskSpec& task)
{
    if (task.kind == TaskSpec::Kind::SinePrediction) return "sine";
    return "recall:" + std::to_string(task.delay);
}

TaskReport demo_task(const EsnConfig& config, const TaskSpec& task, Backend backend)
{
    if (config.output_dim != config.input_dim)
        throw ArgumentError("demo tasks map each input channel to one output; input_dim must equal output_dim");
    if (task.washout < task.delay) throw ArgumentError("washout must cover the recall delay");
    if (task.steps <= task.washout + 2) throw ArgumentError("task needs more steps than washout");

    const Reservoir reservoir(config);
    const std::size_t channels = config.input_dim;
    const double in_scale = static_cast<double>(max_representable(config.input_bitwidth, Signedness::Signed));
    const double x_scale = static_cast<double>(max_representable(config.state_bitwidth, Signedness::Signed));
    const auto u_lo = min_representable(config.input_bitwidth, Signedness::Signed);
    const auto u_hi = max_representable(config.input_bitwidth, Signedness::Signed);

    // One extra sample for the one-step-ahead sine target.
    const std::size_t total = task.steps + 1;
    std::vector<std::vector<std::int64_t>> u(total, std::vector<std::int64_t>(channels));
    Rng rng = Rng::stream(config.seed, "esn-task");
    for (std::size_t n = 0; n < total; ++n) {
        for (std::size_t c = 0; c < channels; ++c) {
            if (task.kind == TaskSpec::Kind::DelayedRecall) {
                u[n][c] = rng.between(u_lo, u_hi);
            } else {
                const double phase = 2.0 * std::numbers::pi * (static_cast<double>(n) / task.period
                                                                + static_cast<double>(c) / static_cast<double>(channels));
                u[n][c] = std::llround(std::sin(phase) * in_scale);
            }
        }
    }

    const std::size_t usable = task.steps - task.washout;
    const auto train = static_cast<std::size_t>(std::floor(task.train_fraction * static_cast<double>(usable)));
    if (train == 0 || train >= usable) throw ArgumentError("train_fraction leaves an empty split");
    const auto features = static_cast<Eigen::Index>(config.reservoir_dim + channels + 1);
    Eigen::MatrixXd z(features, static_cast<Eigen::Index>(usable));
    Eigen::MatrixXd y(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(usable));

    std::vector<std::int64_t> trajectory;
    EsnState state = reservoir.initial_state();
    for (std::size_t n = 0; n < task.steps; ++n) {
        state = reservoir.step(state, u[n], backend);
        trajectory.insert(trajectory.end(), state.x.begin(), state.x.end());
        if (n < task.washout) continue;
        const auto col = static_cast<Eigen::Index>(n - task.washout);
        for (std::size_t i = 0; i < config.reservoir_dim; ++i)
            z(static_cast<Eigen::Index>(i), col) = static_cast<double>(state.x[i]) / x_scale;
        for (std::size_t c = 0; c < channels; ++c)
            z(static_cast<Eigen::Index>(config.reservoir_dim + c), col) = static_cast<double>(u[n][c]) / in_scale;
        z(features - 1, col) = 1.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const std::int64_t target = task.kind == TaskSpec::Kind::DelayedRecall ? u[n - task.delay][c] : u[n + 1][c];
            y(static_cast<Eigen::Index>(c), col) = static_cast<double>(target) / in_scale;
        }
    }

    const auto n_train = static_cast<Eigen::Index>(train);
    const auto n_test = static_cast<Eigen::Index>(usable - train);
    const ReadoutFit fit = train_readout(z.leftCols(n_train), y.leftCols(n_train), task.ridge);
    auto mse = [&](Eigen::Index begin, Eigen::Index count) {
        const Eigen::MatrixXd err = fit.w_out * z.middleCols(begin, count) - y.middleCols(begin, count);
        return err.squaredNorm() / static_cast<double>(err.size());
    };

    TaskReport report;
    report.train_steps = train;
    report.test_steps = usable - train;
    report.train_mse = mse(0, n_train);
    report.test_mse = mse(n_train, n_test);
    const Eigen::MatrixXd train_y = y.leftCols(n_train);
    const Eigen::VectorXd mean = train_y.rowwise().mean();
    report.target_variance = (train_y.colwise() - mean).squaredNorm() / static_cast<double>(train_y.size());
    report.state_checksum = checksum(trajectory);
    return report;
}

nlohmann::json task_report_to_json(const TaskReport& r)
{
    return nlohmann::json{{"train_mse", r.train_mse},
                          {"test_mse", r.test_mse},
                          {"target_variance", r.target_variance},
                          {"train_steps", r.train_steps},
                          {"test_steps", r.test_steps},
                          {"state_checksum", r.state_checksum}};
}

std::optional<std::size_t> echo_convergence_step(const Reservoir& reservoir, std::size_t max_steps, std::uint64_t seed)
{
    const EsnConfig& c = reservoir.config();
    Rng rng = Rng::stream(seed, "esn-echo");
    EsnState a = reservoir.initial_state();
    EsnState b = reservoir.initial_state();
    a.x = random_vector(c.reservoir_dim, c.state_bitwidth, rng);
    b.x = random_vector(c.reservoir_dim, c.state_bitwidth, rng);
    for (std::size_t n = 1; n <= max_steps; ++n) {
        const auto u = random_vector(c.input_dim, c.input_bitwidth, rng);
        a = reservoir.step(a, u, Backend::Reference);
        b = reservoir.step(b, u, Backend::Reference);
        if (a.x == b.x) return n;
    }
    return std::nullopt;
}

}  // namespace serialforge
