#pragma once
// Monte Carlo state simulation under both measures.
//
// Under the reference measure the observed state is a driftless geometric
// Brownian motion stepped exactly in log space; the likelihood ratios come
// from their closed form and the weighted ratio integrals from the
// trapezoidal rule on the grid nodes. Under the physical measure the drift
// switches at a sampled change time, integrated exactly within each step.
//
// Path i is generated from its own counter-based stream, so bundles are
// bit-identical for a fixed (seed, grid, params, substeps) at any thread
// count, and path sets generated with different m_paths share a prefix.

#include "impulsemc/grid.hpp"
#include "impulsemc/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace imc {

struct SimOptions {
    unsigned threads = 0;  // 0 = hardware concurrency
    int substeps = 1;      // internal refinement of the ratio integrals per interval
};

// Per-path trajectories of the augmented state under the reference measure,
// stored time-major: row k holds the value of all paths at t_k.
struct PathBundle {
    TimeGrid grid;
    std::size_t m_paths = 0;
    std::size_t n_regimes = 0;  // m
    std::uint64_t seed = 0;

    std::vector<double> x;               // (n+1) rows
    std::vector<std::vector<double>> l;  // m+1 components, (n+1) rows each
    std::vector<std::vector<double>> r;  // m components, (n+1) rows each
    std::vector<double> zpost;           // (n+1) rows

    double* row(std::vector<double>& v, int k) { return v.data() + static_cast<std::size_t>(k) * m_paths; }
    const double* row(const std::vector<double>& v, int k) const {
        return v.data() + static_cast<std::size_t>(k) * m_paths;
    }
    const double* x_row(int k) const { return row(x, k); }
    const double* l_row(std::size_t j, int k) const { return row(l[j], k); }
    const double* r_row(std::size_t j, int k) const { return row(r[j], k); }
    const double* zpost_row(int k) const { return row(zpost, k); }
};

PathBundle simulate_reference(const ModelParams& params, const TimeGrid& grid,
                              std::size_t m_paths, std::uint64_t seed,
                              const SimOptions& opts = {});

// One observed trajectory under the physical measure together with the
// latent change time and post-change drift that produced it.
struct PhysicalPath {
    std::vector<double> x;  // n+1 values
    double rho = 0.0;
    double u = 0.0;
};

std::vector<PhysicalPath> simulate_physical(const ModelParams& params, const TimeGrid& grid,
                                            std::size_t m_paths, std::uint64_t seed,
                                            const SimOptions& opts = {});

// Posterior masses (pi_0, ..., pi_m) of {change not yet} and {changed to
// level j} given the observations up to t_k; sums to 1 by construction.
std::vector<double> posterior_probabilities(const PathBundle& bundle, const ModelParams& params,
                                            std::size_t path, int k);

// Columnar dump, one row per (path, k):
// path,k,t,x,l0..lm,r1..rm,zpost
void write_paths_csv(std::ostream& out, const PathBundle& bundle);

}  // namespace imc
