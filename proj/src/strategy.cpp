#include "impulsemc/strategy.hpp"

#include "impulsemc/kernels.hpp"
#include "impulsemc/parallel.hpp"
#include "impulsemc/rng.hpp"
#include "impulsemc/stopper.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace imc {

Schedule build_optimal_schedule(const StopDistribution& dist, double q) {
    for (int side = 0; side < 2; ++side) {
        double total = 0.0;
        for (double v : dist.mass_p[side]) total += v;
        if (!(total > 0.0))
            throw std::invalid_argument("build_optimal_schedule: stopping mass row is all zero");
    }
    Schedule s;
    s.buy_mass = dist.mass_p_norm[0];
    s.sell_mass = dist.mass_p_norm[1];
    s.q = q;
    return s;
}

Schedule sample_arbitrary_schedule(const TimeGrid& grid, double q, std::uint64_t seed) {
    if (grid.n_steps < 2) throw std::invalid_argument("n_steps: must be at least 2");
    const int n = grid.n_steps;
    Schedule s;
    s.buy_mass.resize(n);
    s.sell_mass.resize(n);
    s.q = q;
    double position = 0.0;  // S1 in the induction
    for (int k = 0; k < n; ++k) {
        const double buy = rng::uniform01(seed, 0, 2 * static_cast<std::uint64_t>(k)) *
                           (1.0 - position);
        const double held = position + buy;  // S2
        const double sell = (k == n - 1)
                                ? held
                                : rng::uniform01(seed, 0, 2 * static_cast<std::uint64_t>(k) + 1) *
                                      held;
        s.buy_mass[k] = buy;
        s.sell_mass[k] = sell;
        position = held - sell;
    }
    return s;
}

namespace {

bool inventory_leaves_band(const Schedule& s) {
    constexpr double eps = 1e-9;
    double position = 0.0;
    for (std::size_t k = 0; k < s.buy_mass.size(); ++k) {
        position += s.buy_mass[k] - s.sell_mass[k];
        if (position < -eps || position > 1.0 + eps) return true;
    }
    return false;
}

}  // namespace

BacktestReport run_backtest_on_paths(const std::vector<Schedule>& schedules,
                                     const std::vector<PhysicalPath>& paths,
                                     const TimeGrid& grid, unsigned threads) {
    if (schedules.empty()) throw std::invalid_argument("run_backtest: schedules must be nonempty");
    if (paths.empty()) throw std::invalid_argument("m_new: must be at least 1");
    const int n = grid.n_steps;
    const std::size_t m = paths.size();
    for (const Schedule& s : schedules)
        if (s.buy_mass.size() != static_cast<std::size_t>(n) ||
            s.sell_mass.size() != static_cast<std::size_t>(n))
            throw std::invalid_argument("run_backtest: schedule length does not match the grid");

    // time-major copy of the prices so per-interval accumulation is contiguous
    std::vector<double> px(static_cast<std::size_t>(n + 1) * m);
    for (std::size_t i = 0; i < m; ++i)
        for (int k = 0; k <= n; ++k) px[static_cast<std::size_t>(k) * m + i] = paths[i].x[k];

    const auto& ops = kernels::active();
    BacktestReport report;
    report.m_new = m;
    report.terminal_money.assign(schedules.size(), {});
    report.mean_money.resize(schedules.size());
    report.max_money.resize(schedules.size());
    report.inventory_flag.resize(schedules.size());

    parallel_blocks(schedules.size(), threads, [&](std::size_t, std::size_t sb, std::size_t se) {
        for (std::size_t s = sb; s < se; ++s) {
            const Schedule& sched = schedules[s];
            std::vector<double>& money = report.terminal_money[s];
            money.assign(m, 0.0);
            for (int k = 1; k <= n; ++k) {
                const double w = sched.q * (sched.sell_mass[k - 1] - sched.buy_mass[k - 1]);
                ops.axpy(px.data() + static_cast<std::size_t>(k) * m, w, money.data(), m);
            }
            double mean = 0.0, mx = money[0];
            for (double v : money) {
                mean += v;
                mx = std::max(mx, v);
            }
            report.mean_money[s] = mean / static_cast<double>(m);
            report.max_money[s] = mx;
            report.inventory_flag[s] = inventory_leaves_band(sched) ? 1 : 0;
        }
    }, /*block=*/16);

    // histogram of strategy means: 30 equal-width bins over [min, max]
    constexpr int kBins = 30;
    const auto [lo_it, hi_it] =
        std::minmax_element(report.mean_money.begin(), report.mean_money.end());
    const double lo = *lo_it, hi = *hi_it;
    const double width = (hi - lo) / kBins;
    report.hist_edges.resize(kBins + 1);
    for (int b = 0; b <= kBins; ++b) report.hist_edges[b] = lo + b * width;
    report.hist_edges[kBins] = hi;
    report.hist_counts.assign(kBins, 0);
    for (double v : report.mean_money) {
        int b = width > 0.0 ? static_cast<int>((v - lo) / width) : 0;
        b = std::clamp(b, 0, kBins - 1);
        report.hist_counts[b] += 1;
    }
    return report;
}

BacktestReport run_backtest(const std::vector<Schedule>& schedules, const ModelParams& params,
                            const TimeGrid& grid, std::size_t m_new, std::uint64_t seed,
                            const SimOptions& opts) {
    if (m_new == 0) throw std::invalid_argument("m_new: must be at least 1");
    const auto paths = simulate_physical(params, grid, m_new, seed, opts);
    return run_backtest_on_paths(schedules, paths, grid, opts.threads);
}

std::vector<double> stability_curve(const Schedule& schedule, const ModelParams& params,
                                    const TimeGrid& grid, std::size_t max_paths,
                                    std::uint64_t seed, const SimOptions& opts) {
    if (max_paths == 0) throw std::invalid_argument("max_paths: must be at least 1");
    const auto report =
        run_backtest(std::vector<Schedule>{schedule}, params, grid, max_paths, seed, opts);
    const std::vector<double>& money = report.terminal_money[0];
    std::vector<double> curve(max_paths);
    double sum = 0.0;
    for (std::size_t i = 0; i < max_paths; ++i) {
        sum += money[i];
        curve[i] = sum / static_cast<double>(i + 1);
    }
    return curve;
}

namespace {

void put(std::ostream& out, double v, bool lead_comma = true) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (lead_comma) out << ',';
    out << buf;
}

}  // namespace

void write_hist_csv(std::ostream& out, const BacktestReport& report) {
    out << "bin_left,bin_right,count\n";
    for (std::size_t b = 0; b < report.hist_counts.size(); ++b) {
        put(out, report.hist_edges[b], false);
        put(out, report.hist_edges[b + 1]);
        out << ',' << report.hist_counts[b] << '\n';
    }
}

void write_summary_csv(std::ostream& out, const BacktestReport& report, std::size_t n_optimal) {
    out << "strategy_id,kind,mean,max\n";
    for (std::size_t s = 0; s < report.mean_money.size(); ++s) {
        out << s << ',' << (s < n_optimal ? "optimal" : "arbitrary");
        put(out, report.mean_money[s]);
        put(out, report.max_money[s]);
        out << '\n';
    }
}

void write_stability_csv(std::ostream& out, const std::vector<double>& curve) {
    out << "m,running_mean\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out << (i + 1);
        put(out, curve[i]);
        out << '\n';
    }
}

}  // namespace imc
