#pragma once
// Stage orchestration and file emission. Every run derives per-stage seeds
// from the master seed (rng::split_seed with the Stage tags), so the data
// artifacts of a run are byte-identical for a fixed (config, seed) at any
// thread count. run_manifest.json additionally records wall-clock timings
// and is therefore excluded from that guarantee.

#include "impulsemc/config.hpp"

#include <stdexcept>
#include <string>

namespace imc {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Raised when a stage produces a non-finite value; the pipeline never
// writes NaN-laden files.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// simulate: paths.csv
void run_simulate(const RunConfig& config);
// solve: stopping_distribution.csv, value.json
void run_solve(const RunConfig& config);
// backtest: reads stopping_distribution.csv; writes backtest_means_hist.csv,
// strategy_summary.csv, stability_curve.csv
void run_backtest_stage(const RunConfig& config);
// full: solve + backtest in memory plus run_manifest.json
void run_full(const RunConfig& config);

}  // namespace imc
