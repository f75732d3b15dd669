#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "impulsemc/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace imc;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const std::string& dir, unsigned threads) {
    RunConfig c;
    c.m_paths = 2048;
    c.m_new = 256;
    c.m_arbitrary = 64;
    c.threads = threads;
    c.output_dir = dir;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config files, overrides, and validation") {
    const fs::path dir = fs::temp_directory_path() / "imc_cfg_test";
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "# comment\n"
            << "sigma = 0.25\n"
            << "mus = 0.2, -0.2\n"
            << "m_paths = 512\n"
            << "kernel = scalar\n";
    }
    RunConfig c = load_config((dir / "run.cfg").string());
    CHECK(c.params.sigma == 0.25);
    CHECK(c.params.mus == std::vector<double>{0.2, -0.2});
    CHECK(c.m_paths == 512);
    CHECK(c.kernel == kernels::Backend::kScalar);

    apply_override(c, "m_paths=1024");
    CHECK(c.m_paths == 1024);
    apply_override(c, "basis=payoff");
    CHECK(c.basis == BasisKind::kPayoff);
    apply_override(c, "fitted_v1=off");
    CHECK(c.fitted_v1 == false);
    CHECK_THROWS_AS(apply_override(c, "nonsense=1"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(c, "m_paths"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(c, "sigma=abc"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(c, "basis=fourier"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(c, "rewards=unknown"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(c, "n_steps=99999999999"), std::invalid_argument);

    c.m_paths = 0;
    CHECK_THROWS_WITH_AS(c.validate(), "m_paths: must be at least 1", std::invalid_argument);
    c.m_paths = 64;
    c.params.lambda = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);

    const std::string dumped = dump_config(small_config("out", 0));
    CHECK(dumped.find("m_paths = 2048") != std::string::npos);
    CHECK(dumped.find("basis = monomial") != std::string::npos);
}

TEST_CASE("full pipeline emits every artifact and is byte-stable across reruns and threads") {
    const fs::path base = fs::temp_directory_path() / "imc_pipe_test";
    fs::remove_all(base);

    run_full(small_config((base / "a").string(), 1));
    run_full(small_config((base / "b").string(), 2));
    run_full(small_config((base / "c").string(), 1));

    const std::vector<std::string> artifacts = {
        "stopping_distribution.csv", "value.json", "backtest_means_hist.csv",
        "strategy_summary.csv", "stability_curve.csv"};
    for (const auto& name : artifacts) {
        CAPTURE(name);
        REQUIRE(fs::exists(base / "a" / name));
        // thread-count invariance and rerun determinism, byte for byte
        CHECK(slurp(base / "a" / name) == slurp(base / "b" / name));
        CHECK(slurp(base / "a" / name) == slurp(base / "c" / name));
    }
    CHECK(fs::exists(base / "a" / "run_manifest.json"));
    const std::string manifest = slurp(base / "a" / "run_manifest.json");
    CHECK(manifest.find("\"library_version\"") != std::string::npos);
    CHECK(manifest.find("\"kernel\"") != std::string::npos);
    CHECK(manifest.find("\"timings_seconds\"") != std::string::npos);
    CHECK(manifest.find("\"derived_seeds\"") != std::string::npos);

    const std::string value = slurp(base / "a" / "value.json");
    CHECK(value.find("\"q_scaled_value\"") != std::string::npos);
    CHECK(value.find("\"seed\": 42") != std::string::npos);
}

TEST_CASE("staged runs reuse the solve artifacts") {
    const fs::path base = fs::temp_directory_path() / "imc_stage_test";
    fs::remove_all(base);
    const auto config = small_config((base / "s").string(), 1);

    // backtest before solve: missing input is a configuration error
    CHECK_THROWS_AS(run_backtest_stage(config), std::invalid_argument);

    run_solve(config);
    REQUIRE(fs::exists(base / "s" / "stopping_distribution.csv"));
    run_backtest_stage(config);
    CHECK(fs::exists(base / "s" / "backtest_means_hist.csv"));
    CHECK(fs::exists(base / "s" / "strategy_summary.csv"));
    CHECK(fs::exists(base / "s" / "stability_curve.csv"));

    // the staged backtest matches the in-memory full run
    const auto full_dir = small_config((base / "f").string(), 1);
    run_full(full_dir);
    CHECK(slurp(base / "s" / "strategy_summary.csv") ==
          slurp(base / "f" / "strategy_summary.csv"));
}

TEST_CASE("simulate stage dumps the path bundle") {
    const fs::path base = fs::temp_directory_path() / "imc_sim_test";
    fs::remove_all(base);
    auto config = small_config((base / "s").string(), 1);
    config.m_paths = 64;
    run_simulate(config);
    std::ifstream in(base / "s" / "paths.csv");
    REQUIRE(in);
    std::string header;
    std::getline(in, header);
    CHECK(header == "path,k,t,x,l0,l1,l2,r1,r2,zpost");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 64 * 11);
}

TEST_CASE("invalid configurations are rejected before any work") {
    auto config = small_config("unused", 1);
    config.m_new = 0;
    CHECK_THROWS_WITH_AS(run_full(config), "m_new: must be at least 1", std::invalid_argument);
}

TEST_CASE("non-finite intermediate values abort before any file is written") {
    const fs::path dir = fs::temp_directory_path() / "imc_nan_test";
    fs::remove_all(dir);
    auto config = small_config(dir.string(), 1);
    config.m_paths = 256;
    // x0 this large overflows the payoff powers to infinity
    config.params.x0 = 1e200;
    CHECK_THROWS_AS(run_full(config), NumericalError);
    CHECK(!fs::exists(dir / "value.json"));
    CHECK(!fs::exists(dir / "stopping_distribution.csv"));
}
