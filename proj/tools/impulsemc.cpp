// impulsemc command line: simulate | solve | backtest | full
//
// Configuration comes from an optional key=value file, then repeatable
// --set KEY=VALUE overrides, then the convenience flags. Exit codes:
// 0 success, 2 invalid configuration, 3 numerical failure, 1 anything else.

#include "impulsemc/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string seed;
    std::string output_dir;
    std::string threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key=value configuration file");
    cmd->add_option("--set", args.sets, "override KEY=VALUE (repeatable)");
    cmd->add_option("--seed", args.seed, "master seed");
    cmd->add_option("--output-dir", args.output_dir, "artifact directory");
    cmd->add_option("--threads", args.threads, "thread cap (0 = hardware)");
}

imc::RunConfig build_config(const CommonArgs& args) {
    imc::RunConfig config = imc::load_config(args.config_path);
    for (const std::string& s : args.sets) imc::apply_override(config, s);
    if (!args.seed.empty()) imc::apply_override(config, "seed=" + args.seed);
    if (!args.output_dir.empty()) imc::apply_override(config, "output_dir=" + args.output_dir);
    if (!args.threads.empty()) imc::apply_override(config, "threads=" + args.threads);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo solver and backtester for two-sided trading under drift "
                 "uncertainty with a change point"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        void (*run)(const imc::RunConfig&);
    };
    const Sub subs[] = {
        {"simulate", "simulate reference-measure paths and dump paths.csv", imc::run_simulate},
        {"solve", "solve the stopping problem; writes stopping_distribution.csv and value.json",
         imc::run_solve},
        {"backtest", "backtest schedules from an existing stopping_distribution.csv",
         imc::run_backtest_stage},
        {"full", "run the whole pipeline and write run_manifest.json", imc::run_full},
    };

    CommonArgs args[4];
    std::function<void()> selected;
    for (std::size_t i = 0; i < 4; ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_common(cmd, args[i]);
        cmd->callback([&, i] {
            selected = [&, i] { subs[i].run(build_config(args[i])); };
        });
    }

    CLI11_PARSE(app, argc, argv);
    try {
        selected();
    } catch (const imc::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
