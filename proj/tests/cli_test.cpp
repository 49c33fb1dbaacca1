#include "serialforge/matrix.hpp"
#include "serialforge/matrix_io.hpp"
#include "serialforge/oracle.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sf = serialforge;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path()
               / ("serialforge_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    CliRun run(const std::string& args) const
    {
        const std::string out = path("stdout.txt"), err = path("stderr.txt");
        const std::string cmd = std::string("\"") + SERIALFORGE_CLI_PATH + "\" " + args + " >\"" + out + "\" 2>\"" + err + "\"";
        const int status = std::system(cmd.c_str());
        CliRun r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = sf::read_text_file(out);
        r.err = sf::read_text_file(err);
        return r;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, Version)
{
    const auto r = run("--version");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, std::string("serialforge ") + SERIALFORGE_VERSION + "\n");
}

TEST_F(Cli, TraceAdderPrintsTable)
{
    const std::string want = "Cycle C_in A B S C_out Result\n"
                             "1 0 1 1 0 1 0000\n"
                             "2 1 1 1 1 1 1000\n"
                             "3 1 0 1 0 1 0100\n"
                             "4 1 0 0 1 0 1010\n"
                             "Result 1010 = 10\n";
    auto r = run("trace-adder --a 3 --b 7");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, want);
    r = run("trace-adder 3 7");
    EXPECT_EQ(r.out, want);
}

TEST_F(Cli, GenZeroMatrix)
{
    const auto r = run("gen --rows 1 --cols 1 --bitwidth 8 --element-sparsity 1.0 --seed 1 --out " + path("z.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto m = sf::read_matrix(path("z.json"));
    EXPECT_EQ(m.rows(), 1u);
    EXPECT_EQ(m(0, 0), 0);
}

TEST_F(Cli, GenIsDeterministic)
{
    const auto a = run("--seed 5 gen --rows 8 --cols 8 --bitwidth 6 --signed --element-sparsity 0.3");
    const auto b = run("gen --rows 8 --cols 8 --bitwidth 6 --signed --element-sparsity 0.3 --seed 5");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(sf::parse_matrix(a.out).rows(), 8u);
}

TEST_F(Cli, PipelineMatchesGemv)
{
    ASSERT_EQ(run("--seed 9 gen --rows 64 --cols 64 --bitwidth 8 --signed --element-sparsity 0.8 --out " + path("m.json")).code, 0);
    const auto csd = run("--seed 9 csd --in " + path("m.json") + " --out-p " + path("p.json") + " --out-n " + path("n.json"));
    ASSERT_EQ(csd.code, 0) << csd.err;
    const auto summary = nlohmann::json::parse(csd.out);
    EXPECT_LE(summary.at("total_ones").get<int>(), summary.at("source_ones").get<int>());
    const auto comp = run("compile --p " + path("p.json") + " --n " + path("n.json") + " --input-bitwidth 8 --out "
                          + path("net.json") + " --dump " + path("dump.txt"));
    ASSERT_EQ(comp.code, 0) << comp.err;
    EXPECT_EQ(nlohmann::json::parse(comp.out).at("latency_cycles"), 8 + 9 + 6 + 2);

    sf::Rng rng(4);
    const auto a = sf::random_vector(64, 8, rng);
    std::ofstream(path("v.json")) << nlohmann::json(a).dump();
    const auto sim = run("simulate --netlist " + path("net.json") + " --input " + path("v.json") + " --extend 8 --trace "
                         + path("trace.csv"));
    ASSERT_EQ(sim.code, 0) << sim.err;
    const auto result = nlohmann::json::parse(sim.out);
    const auto want = sf::gemv(sf::read_matrix(path("m.json")), a);
    EXPECT_EQ(result.at("outputs").get<std::vector<std::int64_t>>(), want);
    EXPECT_EQ(result.at("latency_cycles"), 8 + 9 + 6 + 2 + 8);
    EXPECT_EQ(sf::read_text_file(path("trace.csv")).rfind("cycle,node_id,sum,carry\n", 0), 0u);
    EXPECT_EQ(sf::read_text_file(path("dump.txt")).rfind("NODE 0 InputTap(0) - -\n", 0), 0u);
}

TEST_F(Cli, BatchSimulation)
{
    ASSERT_EQ(run("--seed 2 gen --rows 16 --cols 4 --bitwidth 4 --signed --element-sparsity 0.5 --out " + path("m.json")).code, 0);
    ASSERT_EQ(run("compile --in " + path("m.json") + " --scheme pn --input-bitwidth 4 --out " + path("net.json")).code, 0);
    std::ofstream(path("b.json")) << "[[1,2,3,4,5,6,7,-8,1,2,3,4,5,6,7,-8],[0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]]";
    const auto r = run("simulate --netlist " + path("net.json") + " --input " + path("b.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("results").size(), 2u);
    EXPECT_EQ(j.at("total_cycles"), 2 * j.at("latency_cycles").get<int>());
}

TEST_F(Cli, CostReport)
{
    ASSERT_EQ(run("--seed 3 gen --rows 32 --cols 32 --bitwidth 8 --signed --element-sparsity 0.5 --out " + path("m.json")).code, 0);
    const auto r = run("--seed 3 cost --in " + path("m.json") + " --scheme csd");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("ff_estimate"), 2 * j.at("lut_estimate").get<int>());
    EXPECT_EQ(j.at("fmax_mhz"), 500.0);
    EXPECT_FALSE(j.contains("power_w"));
}

TEST_F(Cli, SweepsAreOrderedAndJobIndependent)
{
    const auto a = run("--seed 1 sweep cost --dims 32,64 --sparsities 0.5,0.9 --widths 8 --jobs 1");
    const auto b = run("--seed 1 sweep cost --dims 32,64 --sparsities 0.5,0.9 --widths 8 --jobs 3");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "dim,sparsity,width,scheme,ones,luts,ffs,slrs,fmax_mhz,cycles,ns,fits");
    const auto lat = run("--seed 1 sweep latency --dims 64,128 --sparsity 0.98 --out " + path("lat.csv"));
    ASSERT_EQ(lat.code, 0) << lat.err;
    EXPECT_NE(sf::read_text_file(path("lat.csv")).find("\n64,0.98,1,csd,25,"), std::string::npos);
    const auto batch = run("--seed 1 sweep batch --dim 64 --sparsity 0.9 --batches 1,2");
    ASSERT_EQ(batch.code, 0) << batch.err;
}

TEST_F(Cli, LargeDimsNeedFlag)
{
    const auto r = run("--seed 1 sweep latency --dims 4096");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--large"), std::string::npos);
}

TEST_F(Cli, Esn)
{
    std::ofstream(path("esn.json")) << R"({"reservoir_dim": 32, "seed": 4})";
    const auto r = run("esn --config " + path("esn.json") + " --task recall:0 --backend netlist --report " + path("rep.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = sf::parse_json(sf::read_text_file(path("rep.json")));
    EXPECT_LE(j.at("test_mse").get<double>(), 1e-6);
    EXPECT_EQ(j.at("backend"), "netlist");
    const auto again = run("esn --config " + path("esn.json") + " --task recall:0 --backend reference");
    EXPECT_EQ(nlohmann::json::parse(again.out).at("state_checksum"), j.at("state_checksum"));
}

TEST_F(Cli, ErrorCodes)
{
    auto r = run("gen --rows 2");
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.err.rfind("error: usage: ", 0), 0u);
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

    r = run("frobnicate");
    EXPECT_EQ(r.code, 2);

    r = run("gen --rows 2 --cols 2 --bitwidth 8 --element-sparsity 0.5");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--seed"), std::string::npos);

    r = run("compile --p " + path("missing.json") + " --n " + path("missing.json") + " --out " + path("x.json"));
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(r.err.rfind("error: io: ", 0), 0u);

    std::ofstream(path("bad.json")) << "{\n  \"rows\": 2,\n  \"cols\": oops\n}";
    r = run("--seed 1 csd --in " + path("bad.json") + " --out-p " + path("p.json") + " --out-n " + path("n.json"));
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("line 3"), std::string::npos);

    r = run("--seed 1 gen --rows 2 --cols 2 --bitwidth 40 --element-sparsity 0.5");
    EXPECT_EQ(r.code, 4);
}
