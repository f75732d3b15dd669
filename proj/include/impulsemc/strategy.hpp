#pragma once
// Static trading schedules and their comparison on fresh physical-measure
// paths. The optimal schedule re-weights the solved stopping distribution;
// baselines come from a randomized increasing induction with forced final
// liquidation. All strategies in one backtest are charged against the same
// path set, so their ranking carries no simulation luck.

#include "impulsemc/grid.hpp"
#include "impulsemc/paths.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace imc {

struct Schedule {
    std::vector<double> buy_mass;   // per interval k = 1..n
    std::vector<double> sell_mass;  // per interval k = 1..n
    double q = 1.0;                 // traded volume
};

struct StopDistribution;

// Normalized zpost-weighted stopping masses as buy/sell schedule.
// Throws std::invalid_argument when a mass row is identically zero.
Schedule build_optimal_schedule(const StopDistribution& dist, double q);

// One randomized baseline: buy fraction uniform on [0, 1-position],
// sell fraction uniform on [0, position], everything liquidated at t_n.
// The running position stays in [0,1] and ends at exactly 0.
Schedule sample_arbitrary_schedule(const TimeGrid& grid, double q, std::uint64_t seed);

struct BacktestReport {
    std::size_t m_new = 0;
    std::vector<std::vector<double>> terminal_money;  // [strategy][path]
    std::vector<double> mean_money;                   // per strategy
    std::vector<double> max_money;                    // per strategy
    std::vector<double> hist_edges;                   // 31 edges over strategy means
    std::vector<std::size_t> hist_counts;             // 30 bins
    // strategies whose cumulative inventory leaves [0,1] beyond 1e-9
    std::vector<std::uint8_t> inventory_flag;
};

BacktestReport run_backtest(const std::vector<Schedule>& schedules, const ModelParams& params,
                            const TimeGrid& grid, std::size_t m_new, std::uint64_t seed,
                            const SimOptions& opts = {});

// Same accounting against caller-supplied paths (shared by run_backtest).
BacktestReport run_backtest_on_paths(const std::vector<Schedule>& schedules,
                                     const std::vector<PhysicalPath>& paths,
                                     const TimeGrid& grid, unsigned threads = 0);

// Running mean of terminal money over the first m fresh paths, m = 1..max_paths.
// With the same seed, entry max_paths-1 reproduces run_backtest's mean exactly.
std::vector<double> stability_curve(const Schedule& schedule, const ModelParams& params,
                                    const TimeGrid& grid, std::size_t max_paths,
                                    std::uint64_t seed, const SimOptions& opts = {});

void write_hist_csv(std::ostream& out, const BacktestReport& report);
// kind column: strategies below n_optimal are "optimal", the rest "arbitrary"
void write_summary_csv(std::ostream& out, const BacktestReport& report, std::size_t n_optimal);
void write_stability_csv(std::ostream& out, const std::vector<double>& curve);

}  // namespace imc
