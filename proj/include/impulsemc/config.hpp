#pragma once
// Flat key=value run configuration with CLI overrides. Defaults reproduce
// the headline two-regime study (n = 10, M = 2^16, q = 100).

#include "impulsemc/grid.hpp"
#include "impulsemc/kernels.hpp"
#include "impulsemc/model.hpp"
#include "impulsemc/stopper.hpp"

#include <cstdint>
#include <string>

namespace imc {

struct RunConfig {
    ModelParams params;

    int n_steps = 10;
    std::size_t m_paths = 65536;      // solver paths
    std::size_t m_new = 1024;         // backtest paths
    std::size_t m_arbitrary = 1024;   // baseline strategies
    double q = 100.0;                 // traded volume
    std::uint64_t seed = 42;          // master seed
    std::string output_dir = "out";

    bool itm_filter = false;
    bool fitted_v1 = true;
    int substeps = 1;
    unsigned threads = 0;             // 0 = hardware concurrency
    kernels::Backend kernel = kernels::Backend::kAuto;
    BasisKind basis = BasisKind::kMonomial;
    std::string rewards = "gbm_trading";

    TimeGrid grid() const { return TimeGrid{n_steps, params.horizon}; }

    // Throws std::invalid_argument naming the offending key.
    void validate() const;
};

// Reads a key=value file ('#' comments, blank lines ignored). Unknown keys
// are rejected. An empty path returns the defaults.
RunConfig load_config(const std::string& path);

// Applies one "key=value" override; same key set as the file.
void apply_override(RunConfig& config, const std::string& assignment);

// The file representation of a config, key per line (used by the manifest).
std::string dump_config(const RunConfig& config);

}  // namespace imc
