#pragma once

// Quantized echo state network.
//
//   x(n) = f(W_in u(n) + W x(n-1)),   y(n) = W_out z(n)
//
// with integer W, W_in, u and x. f shifts right arithmetically and then
// saturates to the state width. The recurrent product W x runs either on the
// integer reference kernel or through the compiled bit-serial netlist; W_in u
// always uses the reference kernel. The readout acts on the extended state
// z(n) = [x(n); u(n); 1] scaled to [-1, 1] and is fitted by ridge regression.

#include "serialforge/cost.hpp"
#include "serialforge/matrix.hpp"
#include "serialforge/netlist.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace serialforge {

enum class Activation { ShiftClamp, IdentityClamp };
enum class Backend { Reference, Netlist };

std::string to_string(Backend backend);
Backend backend_from_string(const std::string& name);

struct EsnConfig {
    std::size_t reservoir_dim = 64;
    std::size_t input_dim = 1;
    std::size_t output_dim = 1;
    unsigned weight_bitwidth = 4;
    unsigned state_bitwidth = 4;
    unsigned input_bitwidth = 4;
    double element_sparsity = 0.75;
    Activation activation = Activation::ShiftClamp;
    unsigned shift = 2;
    /// How W is split for the netlist backend.
    Scheme scheme = Scheme::PN;
    /// Simulator sign-extension cycles; when unset, the smallest value for
    /// which every pre-activation fits the captured window.
    std::optional<unsigned> extension;
    std::uint64_t seed = 1;

    void validate() const;
};

EsnConfig esn_config_from_json(const nlohmann::json& j);
nlohmann::json esn_config_to_json(const EsnConfig& config);

struct EsnState {
    std::vector<std::int64_t> x;
    std::uint64_t step = 0;

    friend bool operator==(const EsnState&, const EsnState&) = default;
};

class Reservoir {
public:
    /// Draws W (signed, element-sparse) and W_in (dense signed) from the seed.
    explicit Reservoir(const EsnConfig& config);

    const EsnConfig& config() const noexcept { return config_; }
    /// reservoir_dim x reservoir_dim; row i holds the weights into unit i.
    const IntMatrix& w() const noexcept { return w_; }
    /// reservoir_dim x input_dim.
    const IntMatrix& w_in() const noexcept { return w_in_; }
    EsnState initial_state() const;

    /// Extension used by the netlist backend.
    unsigned extension() const noexcept { return extension_; }
    /// Compiled circuit for W x, built on first use; thread-safe.
    const Netlist& netlist() const;

    /// f(W_in u + W x).
    EsnState step(const EsnState& state, std::span<const std::int64_t> u, Backend backend) const;

    /// Applies the activation to one pre-activation value.
    std::int64_t activate(std::int64_t pre) const noexcept;

private:
    EsnConfig config_;
    IntMatrix w_;
    IntMatrix w_in_;
    IntMatrix w_t_;
    IntMatrix w_in_t_;
    unsigned extension_ = 0;
    mutable std::once_flag compiled_flag_;
    mutable std::unique_ptr<Netlist> netlist_;
};

struct ReadoutFit {
    /// outputs x features.
    Eigen::MatrixXd w_out;
    /// Frobenius norm of W_out X - Y on the training data.
    double residual = 0.0;
};

/// W_out = Y X^T (X X^T + ridge I)^-1 for features x samples X and
/// outputs x samples Y. Throws SolverError if the system is singular.
ReadoutFit train_readout(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets, double ridge);

struct TaskSpec {
    enum class Kind { DelayedRecall, SinePrediction };
    Kind kind = Kind::DelayedRecall;
    /// Recall delay in steps.
    std::size_t delay = 0;
    /// Sine period in steps.
    double period = 25.0;
    std::size_t steps = 600;
    std::size_t washout = 100;
    double train_fraction = 0.7;
    double ridge = 1e-8;
};

TaskSpec task_from_string(const std::string& name);
std::string to_string(const TaskSpec& task);

struct TaskReport {
    double train_mse = 0.0;
    double test_mse = 0.0;
    /// Variance of the training targets (the mean predictor's MSE).
    double target_variance = 0.0;
    std::size_t train_steps = 0;
    std::size_t test_steps = 0;
    std::uint64_t state_checksum = 0;

    friend bool operator==(const TaskReport&, const TaskReport&) = default;
};

/// Drives the reservoir, fits the readout on the first part of the
/// post-washout run and evaluates on the rest.
TaskReport demo_task(const EsnConfig& config, const TaskSpec& task, Backend backend);

nlohmann::json task_report_to_json(const TaskReport& report);

/// Runs two random initial states under the same random input and returns
/// the first step at which they coincide, if within `max_steps`.
std::optional<std::size_t> echo_convergence_step(const Reservoir& reservoir, std::size_t max_steps,
                                                 std::uint64_t seed);

}  // namespace serialforge
