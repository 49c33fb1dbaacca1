#include "serialforge/error.hpp"
#include "serialforge/esn.hpp"
#include "serialforge/oracle.hpp"
#include "serialforge/random.hpp"

#include <gtest/gtest.h>

namespace sf = serialforge;

namespace {

sf::EsnConfig small_config()
{
    sf::EsnConfig c;
    c.reservoir_dim = 64;
    c.weight_bitwidth = 4;
    c.state_bitwidth = 4;
    c.input_bitwidth = 4;
    c.element_sparsity = 0.75;
    c.seed = 3;
    return c;
}

std::int64_t expected_activation(std::int64_t pre, const sf::EsnConfig& c)
{
    const std::int64_t shifted = c.activation == sf::Activation::ShiftClamp ? (pre >> c.shift) : pre;
    const std::int64_t hi = (std::int64_t{1} << (c.state_bitwidth - 1)) - 1;
    return std::clamp(shifted, -hi - 1, hi);
}

}  // namespace

TEST(Reservoir, Deterministic)
{
    const sf::Reservoir a(small_config()), b(small_config());
    EXPECT_EQ(a.w(), b.w());
    EXPECT_EQ(a.w_in(), b.w_in());
    auto other = small_config();
    other.seed = 4;
    EXPECT_NE(sf::Reservoir(other).w(), a.w());
}

TEST(Reservoir, BaselineDimensionBuilds)
{
    auto c = small_config();
    c.reservoir_dim = 800;
    c.element_sparsity = 0.75;
    const sf::Reservoir r(c);
    EXPECT_EQ(r.w().rows(), 800u);
    EXPECT_GE(sf::stats(r.w()).element_sparsity, 0.75);
}

TEST(Reservoir, StepMatchesDefinition)
{
    const sf::Reservoir r(small_config());
    sf::Rng rng(10);
    sf::EsnState s = r.initial_state();
    s.x = sf::random_vector(64, 4, rng);
    const std::vector<std::int64_t> u{5};
    const auto next = r.step(s, u, sf::Backend::Reference);
    for (std::size_t i = 0; i < 64; ++i) {
        std::int64_t pre = r.w_in()(i, 0) * u[0];
        for (std::size_t j = 0; j < 64; ++j) pre += r.w()(i, j) * s.x[j];
        ASSERT_EQ(next.x[i], expected_activation(pre, r.config()));
    }
    EXPECT_EQ(next.step, 1u);
}

TEST(Reservoir, ZeroStaysZero)
{
    const sf::Reservoir r(small_config());
    const std::vector<std::int64_t> u{0};
    for (auto backend : {sf::Backend::Reference, sf::Backend::Netlist}) {
        const auto next = r.step(r.initial_state(), u, backend);
        for (auto v : next.x) EXPECT_EQ(v, 0);
    }
}

TEST(Reservoir, FullSparsityIsInputOnly)
{
    auto c = small_config();
    c.element_sparsity = 1.0;
    const sf::Reservoir r(c);
    for (auto v : r.w().data()) ASSERT_EQ(v, 0);
    sf::EsnState s = r.initial_state();
    s.x.assign(64, 7);
    const std::vector<std::int64_t> u{-3};
    const auto next = r.step(s, u, sf::Backend::Reference);
    for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(next.x[i], expected_activation(r.w_in()(i, 0) * -3, c));
    const auto conv = sf::echo_convergence_step(r, 10, 1);
    ASSERT_TRUE(conv);
    EXPECT_EQ(*conv, 1u);
}

TEST(Reservoir, ActivationSaturates)
{
    auto c = small_config();
    c.activation = sf::Activation::IdentityClamp;
    const sf::Reservoir id(c);
    EXPECT_EQ(id.activate(8), 7);
    EXPECT_EQ(id.activate(-8), -8);
    EXPECT_EQ(id.activate(-9), -8);
    const sf::Reservoir shift(small_config());
    EXPECT_EQ(shift.activate(32), 7);
    EXPECT_EQ(shift.activate(-5), -2);
}

TEST(Reservoir, BackendsAgreeOverHundredSteps)
{
    for (auto scheme : {sf::Scheme::PN, sf::Scheme::CSD}) {
        auto c = small_config();
        c.scheme = scheme;
        const sf::Reservoir r(c);
        sf::Rng rng(77);
        sf::EsnState ref = r.initial_state(), net = r.initial_state();
        for (int n = 0; n < 100; ++n) {
            const auto u = sf::random_vector(1, 4, rng);
            ref = r.step(ref, u, sf::Backend::Reference);
            net = r.step(net, u, sf::Backend::Netlist);
            ASSERT_EQ(ref, net) << "step " << n;
            for (auto v : ref.x) {
                ASSERT_GE(v, -8);
                ASSERT_LE(v, 7);
            }
        }
    }
}

TEST(Reservoir, AutomaticExtensionCoversWorstCase)
{
    const sf::Reservoir r(small_config());
    std::int64_t worst = 0;
    for (std::size_t i = 0; i < 64; ++i) {
        std::int64_t row = 0;
        for (std::size_t j = 0; j < 64; ++j) row += std::llabs(r.w()(i, j)) * 8;
        worst = std::max(worst, row);
    }
    const unsigned s = 4 + 4 + r.extension();
    EXPECT_LE(worst, (std::int64_t{1} << (s - 1)) - 1);
    if (r.extension() > 0) EXPECT_GT(worst, (std::int64_t{1} << (s - 2)) - 1);
}

TEST(Reservoir, RejectsBadArguments)
{
    const sf::Reservoir r(small_config());
    EXPECT_THROW(r.step(r.initial_state(), std::vector<std::int64_t>{1, 2}, sf::Backend::Reference),
                 sf::ArgumentError);
    EXPECT_THROW(r.step(r.initial_state(), std::vector<std::int64_t>{8}, sf::Backend::Reference), sf::ArgumentError);
    auto bad = small_config();
    bad.element_sparsity = 1.5;
    EXPECT_THROW(sf::Reservoir{bad}, sf::ArgumentError);
    bad = small_config();
    bad.reservoir_dim = 0;
    EXPECT_THROW(sf::Reservoir{bad}, sf::ArgumentError);
}

TEST(Readout, IdentityStates)
{
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(5, 5);
    Eigen::MatrixXd y(2, 5);
    y << 1, 2, 3, 4, 5, -1, -2, -3, -4, -5;
    const auto fit = sf::train_readout(x, y, 0.0);
    EXPECT_LT((fit.w_out - y).norm(), 1e-12);
    EXPECT_LT(fit.residual, 1e-12);
}

TEST(Readout, RecoversLinearMap)
{
    Eigen::MatrixXd a(3, 6);
    a << 0.5, -1.0, 2.0, 0.0, 0.25, 3.0,
         1.5, 0.5, -0.5, 1.0, -2.0, 0.1,
         -0.3, 0.7, 0.9, -1.1, 0.0, 2.2;
    sf::Rng rng(1);
    Eigen::MatrixXd x(6, 200);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * rng.unit() - 1.0;
    const auto fit = sf::train_readout(x, a * x, 1e-9);
    EXPECT_LT((fit.w_out - a).norm() / a.norm(), 1e-8);
}

TEST(Readout, LargeRidgeShrinksWeights)
{
    sf::Rng rng(2);
    Eigen::MatrixXd x(4, 50), y(1, 50);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.unit();
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.unit();
    const double small = sf::train_readout(x, y, 1e-6).w_out.norm();
    const double big = sf::train_readout(x, y, 1e12).w_out.norm();
    EXPECT_LT(big, 1e-9);
    EXPECT_GT(small, big);
}

TEST(Readout, SingularWithoutRidge)
{
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 10);
    x.row(0).setOnes();
    const Eigen::MatrixXd y = Eigen::MatrixXd::Ones(1, 10);
    EXPECT_THROW(sf::train_readout(x, y, 0.0), sf::SolverError);
    EXPECT_NO_THROW(sf::train_readout(x, y, 1e-6));
}

TEST(Task, Parsing)
{
    EXPECT_EQ(sf::task_from_string("sine").kind, sf::TaskSpec::Kind::SinePrediction);
    EXPECT_EQ(sf::task_from_string("recall").delay, 0u);
    EXPECT_EQ(sf::task_from_string("recall:3").delay, 3u);
    EXPECT_EQ(sf::to_string(sf::task_from_string("recall:3")), "recall:3");
    EXPECT_THROW(sf::task_from_string("channel-eq"), sf::ArgumentError);
    EXPECT_THROW(sf::task_from_string("recall:x"), sf::ArgumentError);
}

TEST(Task, RecallZeroIsNearExact)
{
    const auto r = sf::demo_task(small_config(), sf::task_from_string("recall:0"), sf::Backend::Reference);
    EXPECT_LE(r.test_mse, 1e-6);
    EXPECT_EQ(r.train_steps + r.test_steps, 500u);
}

TEST(Task, SineBeatsMeanPredictor)
{
    const auto r = sf::demo_task(small_config(), sf::task_from_string("sine"), sf::Backend::Reference);
    EXPECT_LT(r.test_mse, r.target_variance);
}

TEST(Task, DeterministicAndBackendIndependent)
{
    const auto task = sf::task_from_string("recall:2");
    const auto a = sf::demo_task(small_config(), task, sf::Backend::Reference);
    const auto b = sf::demo_task(small_config(), task, sf::Backend::Reference);
    EXPECT_EQ(a, b);
    const auto c = sf::demo_task(small_config(), task, sf::Backend::Netlist);
    EXPECT_EQ(a, c);
}

TEST(Config, JsonRoundTrip)
{
    auto c = small_config();
    c.scheme = sf::Scheme::CSD;
    c.extension = 3;
    c.activation = sf::Activation::IdentityClamp;
    const auto back = sf::esn_config_from_json(sf::esn_config_to_json(c));
    EXPECT_EQ(sf::esn_config_to_json(back), sf::esn_config_to_json(c));
    EXPECT_THROW(sf::esn_config_from_json(nlohmann::json{{"reservoir_dim", "big"}}), sf::ParseError);
    EXPECT_THROW(sf::esn_config_from_json(nlohmann::json{{"activation", "tanh"}}), sf::ArgumentError);
}
