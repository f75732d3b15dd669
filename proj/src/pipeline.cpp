#include "impulsemc/pipeline.hpp"

#include "impulsemc/paths.hpp"
#include "impulsemc/rng.hpp"
#include "impulsemc/stopper.hpp"
#include "impulsemc/strategy.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace imc {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

void ensure_finite(const std::vector<double>& values, const char* what) {
    for (double v : values)
        if (!std::isfinite(v)) throw NumericalError(std::string("non-finite value in ") + what);
}

void check_bundle(const PathBundle& bundle) {
    ensure_finite(bundle.x, "state paths");
    for (const auto& lj : bundle.l) ensure_finite(lj, "likelihood ratios");
    for (const auto& rj : bundle.r) ensure_finite(rj, "ratio integrals");
    ensure_finite(bundle.zpost, "posterior weights");
}

fs::path prepare_output_dir(const RunConfig& config) {
    fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw std::invalid_argument("output_dir: cannot create " + dir.string());
    return dir;
}

std::ofstream open_file(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

struct SolveOutput {
    StoppingResult result;
    StopDistribution dist;
};

SolveOutput solve_in_memory(const RunConfig& config) {
    const auto solver_seed = rng::split_seed(config.seed, rng::kSolverPaths);
    SimOptions sim{config.threads, config.substeps};
    const PathBundle bundle =
        simulate_reference(config.params, config.grid(), config.m_paths, solver_seed, sim);
    check_bundle(bundle);

    StopperOptions opts;
    opts.itm_filter = config.itm_filter;
    opts.fitted_v1 = config.fitted_v1;
    opts.basis = config.basis;
    opts.threads = config.threads;
    SolveOutput out;
    out.result = backward_induction(bundle, config.params, opts);
    ensure_finite(out.result.cont_values, "solver payoffs");
    out.dist = stopping_distribution(out.result, bundle);
    return out;
}

void write_value_json(const fs::path& path, const RunConfig& config, double value) {
    json j;
    j["value"] = value;
    j["q_scaled_value"] = config.q * value;
    j["m_paths"] = config.m_paths;
    j["n_steps"] = config.n_steps;
    j["seed"] = config.seed;
    auto out = open_file(path);
    out << j.dump(2) << '\n';
}

struct BacktestFiles {
    BacktestReport report;
    std::vector<double> curve;
};

BacktestFiles backtest_in_memory(const RunConfig& config, const StopDistribution& dist) {
    const auto backtest_seed = rng::split_seed(config.seed, rng::kBacktestPaths);
    const auto baseline_seed = rng::split_seed(config.seed, rng::kBaselines);

    std::vector<Schedule> schedules;
    schedules.reserve(1 + config.m_arbitrary);
    schedules.push_back(build_optimal_schedule(dist, config.q));
    for (std::size_t j = 0; j < config.m_arbitrary; ++j)
        schedules.push_back(
            sample_arbitrary_schedule(config.grid(), config.q, rng::split_seed(baseline_seed, j)));

    SimOptions sim{config.threads, 1};
    BacktestFiles out;
    out.report = run_backtest(schedules, config.params, config.grid(), config.m_new,
                              backtest_seed, sim);
    for (const auto& money : out.report.terminal_money) ensure_finite(money, "backtest money");
    out.curve = stability_curve(schedules[0], config.params, config.grid(), config.m_new,
                                backtest_seed, sim);
    ensure_finite(out.curve, "stability curve");
    return out;
}

void emit_backtest_files(const fs::path& dir, const BacktestFiles& files) {
    {
        auto out = open_file(dir / "backtest_means_hist.csv");
        write_hist_csv(out, files.report);
    }
    {
        auto out = open_file(dir / "strategy_summary.csv");
        write_summary_csv(out, files.report, 1);
    }
    {
        auto out = open_file(dir / "stability_curve.csv");
        write_stability_csv(out, files.curve);
    }
}

}  // namespace

void run_simulate(const RunConfig& config) {
    config.validate();
    kernels::select(config.kernel);
    const fs::path dir = prepare_output_dir(config);
    const auto solver_seed = rng::split_seed(config.seed, rng::kSolverPaths);
    SimOptions sim{config.threads, config.substeps};
    const PathBundle bundle =
        simulate_reference(config.params, config.grid(), config.m_paths, solver_seed, sim);
    check_bundle(bundle);
    auto out = open_file(dir / "paths.csv");
    write_paths_csv(out, bundle);
}

void run_solve(const RunConfig& config) {
    config.validate();
    kernels::select(config.kernel);
    const fs::path dir = prepare_output_dir(config);
    const SolveOutput solved = solve_in_memory(config);
    {
        auto out = open_file(dir / "stopping_distribution.csv");
        write_distribution_csv(out, solved.dist, config.grid());
    }
    write_value_json(dir / "value.json", config, solved.result.value);
}

void run_backtest_stage(const RunConfig& config) {
    config.validate();
    kernels::select(config.kernel);
    const fs::path dir = prepare_output_dir(config);
    std::ifstream in(dir / "stopping_distribution.csv");
    if (!in)
        throw std::invalid_argument("backtest: missing " +
                                    (dir / "stopping_distribution.csv").string() +
                                    " (run solve first)");
    const StopDistribution dist = read_distribution_csv(in);
    emit_backtest_files(dir, backtest_in_memory(config, dist));
}

void run_full(const RunConfig& config) {
    config.validate();
    const auto& ops = kernels::select(config.kernel);
    const fs::path dir = prepare_output_dir(config);

    const auto t0 = clock_type::now();
    const SolveOutput solved = solve_in_memory(config);
    const double solve_s = seconds_since(t0);

    const auto t1 = clock_type::now();
    const BacktestFiles files = backtest_in_memory(config, solved.dist);
    const double backtest_s = seconds_since(t1);

    {
        auto out = open_file(dir / "stopping_distribution.csv");
        write_distribution_csv(out, solved.dist, config.grid());
    }
    write_value_json(dir / "value.json", config, solved.result.value);
    emit_backtest_files(dir, files);

    json manifest;
    manifest["library_version"] = kLibraryVersion;
    manifest["kernel"] = ops.name;
    manifest["config"] = {
        {"mu0", config.params.mu0},
        {"mus", config.params.mus},
        {"probs", config.params.probs},
        {"lambda", config.params.lambda},
        {"sigma", config.params.sigma},
        {"x0", config.params.x0},
        {"horizon", config.params.horizon},
        {"n_steps", config.n_steps},
        {"m_paths", config.m_paths},
        {"m_new", config.m_new},
        {"m_arbitrary", config.m_arbitrary},
        {"q", config.q},
        {"seed", config.seed},
        {"output_dir", config.output_dir},
        {"itm_filter", config.itm_filter},
        {"fitted_v1", config.fitted_v1},
        {"substeps", config.substeps},
        {"threads", config.threads},
        {"basis", basis_name(config.basis)},
        {"rewards", config.rewards},
    };
    manifest["derived_seeds"] = {
        {"solver_paths", rng::split_seed(config.seed, rng::kSolverPaths)},
        {"backtest_paths", rng::split_seed(config.seed, rng::kBacktestPaths)},
        {"baselines", rng::split_seed(config.seed, rng::kBaselines)},
    };
    manifest["timings_seconds"] = {{"solve", solve_s}, {"backtest", backtest_s}};
    manifest["optimal_inventory_in_band"] = files.report.inventory_flag[0] == 0;
    manifest["files"] = {"stopping_distribution.csv", "value.json", "backtest_means_hist.csv",
                         "strategy_summary.csv", "stability_curve.csv"};
    auto out = open_file(dir / "run_manifest.json");
    out << manifest.dump(2) << '\n';
}

}  // namespace imc
