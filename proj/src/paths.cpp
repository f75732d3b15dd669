#include "impulsemc/paths.hpp"

#include "impulsemc/kernels.hpp"
#include "impulsemc/parallel.hpp"
#include "impulsemc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace imc {

namespace {

// Draw layout within a path's stream. The physical simulator reserves the
// first block (two uniforms) for the latent variables so its Brownian draws
// never collide with them.
constexpr std::uint64_t kPhysicalNormalOffset = 2;

struct RegimeConstants {
    // likelihood ratio: l = exp(a*t) * (x/x0)^p
    double a, p;
    // ratio integrand: f = lambda * exp(g*t) * (x/x0)^q
    double g, q;
};

std::vector<RegimeConstants> regime_constants(const ModelParams& params) {
    const double s2 = params.sigma * params.sigma;
    std::vector<RegimeConstants> out(params.regimes() + 1);
    auto lr = [&](double u) {
        return std::pair<double, double>{0.5 * (u - u * u / s2), u / s2};
    };
    std::tie(out[0].a, out[0].p) = lr(params.mu0);
    for (std::size_t j = 0; j < params.regimes(); ++j) {
        const double u = params.mus[j];
        std::tie(out[j + 1].a, out[j + 1].p) = lr(u);
        out[j + 1].g =
            0.5 * (params.mu0 - u - (params.mu0 * params.mu0 - u * u) / s2) - params.lambda;
        out[j + 1].q = (params.mu0 - u) / s2;
    }
    return out;
}

void format_row(std::ostream& out, const double* values, std::size_t count) {
    char buf[32];
    for (std::size_t i = 0; i < count; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        out << ',' << buf;
    }
}

}  // namespace

PathBundle simulate_reference(const ModelParams& params, const TimeGrid& grid,
                              std::size_t m_paths, std::uint64_t seed,
                              const SimOptions& opts) {
    params.validate();
    grid.validate();
    if (m_paths == 0) throw std::invalid_argument("m_paths: must be at least 1");
    if (opts.substeps < 1) throw std::invalid_argument("substeps: must be at least 1");

    const std::size_t m = params.regimes();
    const int n = grid.n_steps;
    const int fine_n = n * opts.substeps;
    const double dt_f = grid.horizon / fine_n;
    const double drift = -0.5 * params.sigma * params.sigma * dt_f;
    const double vol = params.sigma * std::sqrt(dt_f);
    const double inv_x0 = 1.0 / params.x0;
    const auto regimes = regime_constants(params);
    const auto& ops = kernels::active();

    PathBundle bundle;
    bundle.grid = grid;
    bundle.m_paths = m_paths;
    bundle.n_regimes = m;
    bundle.seed = seed;
    const std::size_t rows = static_cast<std::size_t>(n + 1) * m_paths;
    bundle.x.resize(rows);
    bundle.l.assign(m + 1, std::vector<double>(rows));
    bundle.r.assign(m, std::vector<double>(rows));
    bundle.zpost.resize(rows);

    parallel_blocks(m_paths, opts.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        const std::size_t len = end - begin;
        std::vector<double> cur(len, params.x0), next(len), z(len);
        std::vector<std::vector<double>> f_prev(m, std::vector<double>(len));
        std::vector<std::vector<double>> f_cur(m, std::vector<double>(len));
        std::vector<std::vector<double>> r_acc(m, std::vector<double>(len, 0.0));

        // integrand at s = 0 is lambda for every regime
        for (std::size_t j = 0; j < m; ++j)
            std::fill(f_prev[j].begin(), f_prev[j].end(), params.lambda);

        // k = 0 row: definitions at time zero
        std::copy(cur.begin(), cur.end(), bundle.row(bundle.x, 0) + begin);
        for (std::size_t j = 0; j <= m; ++j)
            std::fill_n(bundle.row(bundle.l[j], 0) + begin, len, 1.0);
        for (std::size_t j = 0; j < m; ++j)
            std::fill_n(bundle.row(bundle.r[j], 0) + begin, len, 0.0);
        std::fill_n(bundle.row(bundle.zpost, 0) + begin, len, 1.0);

        for (int s = 1; s <= fine_n; ++s) {
            const double ts = s * dt_f;
            for (std::size_t i = 0; i < len; ++i)
                z[i] = rng::standard_normal(seed, begin + i, static_cast<std::uint64_t>(s) - 1);
            ops.gbm_step(cur.data(), z.data(), drift, vol, next.data(), len);
            std::swap(cur, next);

            for (std::size_t j = 0; j < m; ++j) {
                const auto& rc = regimes[j + 1];
                ops.pow_scaled(cur.data(), inv_x0, rc.q, params.lambda * std::exp(rc.g * ts),
                               f_cur[j].data(), len);
                ops.trapezoid_acc(f_prev[j].data(), f_cur[j].data(), 0.5 * dt_f,
                                  r_acc[j].data(), len);
                std::swap(f_prev[j], f_cur[j]);
            }

            if (s % opts.substeps == 0) {
                const int k = s / opts.substeps;
                std::copy(cur.begin(), cur.end(), bundle.row(bundle.x, k) + begin);
                for (std::size_t j = 0; j <= m; ++j) {
                    const auto& rc = regimes[j];
                    ops.pow_scaled(cur.data(), inv_x0, rc.p, std::exp(rc.a * ts),
                                   bundle.row(bundle.l[j], k) + begin, len);
                }
                for (std::size_t j = 0; j < m; ++j)
                    std::copy(r_acc[j].begin(), r_acc[j].end(),
                              bundle.row(bundle.r[j], k) + begin);
                double* zrow = bundle.row(bundle.zpost, k) + begin;
                ops.scale(bundle.row(bundle.l[0], k) + begin,
                          std::exp(-params.lambda * ts), zrow, len);
                for (std::size_t j = 0; j < m; ++j)
                    ops.fma_mul(bundle.row(bundle.l[j + 1], k) + begin,
                                bundle.row(bundle.r[j], k) + begin, params.probs[j], zrow, len);
            }
        }
    });
    return bundle;
}

std::vector<PhysicalPath> simulate_physical(const ModelParams& params, const TimeGrid& grid,
                                            std::size_t m_paths, std::uint64_t seed,
                                            const SimOptions& opts) {
    params.validate();
    grid.validate();
    if (m_paths == 0) throw std::invalid_argument("m_paths: must be at least 1");

    const int n = grid.n_steps;
    const double dt = grid.dt();
    const double drift = -0.5 * params.sigma * params.sigma * dt;
    const double vol = params.sigma * std::sqrt(dt);

    std::vector<PhysicalPath> paths(m_paths);
    parallel_blocks(m_paths, opts.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            PhysicalPath& p = paths[i];
            p.rho = -std::log(rng::uniform01(seed, i, 0)) / params.lambda;
            const double u_level = rng::uniform01(seed, i, 1);
            double cum = 0.0;
            p.u = params.mus.back();
            for (std::size_t j = 0; j < params.regimes(); ++j) {
                cum += params.probs[j];
                if (u_level < cum) {
                    p.u = params.mus[j];
                    break;
                }
            }
            p.x.resize(n + 1);
            p.x[0] = params.x0;
            for (int k = 0; k < n; ++k) {
                const double t0 = grid.t(k), t1 = grid.t(k + 1);
                // a change exactly on a node counts as post-change from that node on
                const double pre = std::max(0.0, std::min(p.rho, t1) - t0);
                const double post = std::max(0.0, t1 - std::max(p.rho, t0));
                const double theta_int = params.mu0 * pre + p.u * post;
                const double zk =
                    rng::standard_normal(seed, i, kPhysicalNormalOffset + static_cast<std::uint64_t>(k));
                p.x[k + 1] = p.x[k] * std::exp(theta_int + drift + vol * zk);
            }
        }
    });
    return paths;
}

std::vector<double> posterior_probabilities(const PathBundle& bundle, const ModelParams& params,
                                            std::size_t path, int k) {
    if (path >= bundle.m_paths) throw std::out_of_range("posterior_probabilities: path index");
    if (k < 0 || k > bundle.grid.n_steps) throw std::out_of_range("posterior_probabilities: k index");

    const std::size_t m = bundle.n_regimes;
    std::vector<double> terms(m + 1);
    terms[0] = std::exp(-params.lambda * bundle.grid.t(k)) * bundle.l_row(0, k)[path];
    double sum = terms[0];
    for (std::size_t j = 0; j < m; ++j) {
        terms[j + 1] = params.probs[j] * bundle.l_row(j + 1, k)[path] * bundle.r_row(j, k)[path];
        sum += terms[j + 1];
    }
    for (double& v : terms) v /= sum;
    return terms;
}

void write_paths_csv(std::ostream& out, const PathBundle& bundle) {
    out << "path,k,t,x";
    for (std::size_t j = 0; j <= bundle.n_regimes; ++j) out << ",l" << j;
    for (std::size_t j = 1; j <= bundle.n_regimes; ++j) out << ",r" << j;
    out << ",zpost\n";
    std::vector<double> values;
    for (std::size_t i = 0; i < bundle.m_paths; ++i) {
        for (int k = 0; k <= bundle.grid.n_steps; ++k) {
            out << i << ',' << k;
            values.clear();
            values.push_back(bundle.grid.t(k));
            values.push_back(bundle.x_row(k)[i]);
            for (std::size_t j = 0; j <= bundle.n_regimes; ++j)
                values.push_back(bundle.l_row(j, k)[i]);
            for (std::size_t j = 0; j < bundle.n_regimes; ++j)
                values.push_back(bundle.r_row(j, k)[i]);
            values.push_back(bundle.zpost_row(k)[i]);
            format_row(out, values.data(), values.size());
            out << '\n';
        }
    }
}

}  // namespace imc
