#include "impulsemc/stopper.hpp"

#include "impulsemc/kernels.hpp"
#include "impulsemc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace imc {

BasisKind parse_basis(std::string_view name) {
    if (name == "monomial") return BasisKind::kMonomial;
    if (name == "payoff") return BasisKind::kPayoff;
    throw std::invalid_argument("unknown basis: " + std::string(name));
}

const char* basis_name(BasisKind basis) {
    return basis == BasisKind::kMonomial ? "monomial" : "payoff";
}

namespace {

struct Table {
    std::size_t m = 0;
    std::vector<double> data;
    Table() = default;
    Table(int rows, std::size_t m_paths) : m(m_paths), data(rows * m_paths) {}
    double* row(int k) { return data.data() + static_cast<std::size_t>(k) * m; }
    const double* row(int k) const { return data.data() + static_cast<std::size_t>(k) * m; }
};

// Basis columns at one decision date.
struct Columns {
    const double* c1;
    const double* c2;
    const double* c3;
};

class BasisColumns {
  public:
    BasisColumns(const PathBundle& bundle, const ModelParams& params,
                 BasisKind kind, unsigned threads)
        : bundle_(bundle), kind_(kind) {
        if (kind_ != BasisKind::kPayoff) return;
        const int n = bundle.grid.n_steps;
        const std::size_t m = bundle.m_paths;
        for (auto* t : {&f0_, &f1_, &f2_}) *t = Table(n + 1, m);
        const auto& ops = kernels::active();
        for (int k = 1; k <= n; ++k) {
            const auto c = trade_payoff_coeffs(params, bundle.grid.t(k));
            parallel_blocks(m, threads, [&](std::size_t, std::size_t b, std::size_t e) {
                const std::size_t len = e - b;
                ops.pow_scaled(bundle.x_row(k) + b, 1.0, c.e0, c.c0, f0_.row(k) + b, len);
                ops.pow_scaled(bundle.x_row(k) + b, 1.0, c.e1, c.c1, f1_.row(k) + b, len);
                for (std::size_t i = b; i < e; ++i) f1_.row(k)[i] *= bundle.r_row(0, k)[i];
                ops.pow_scaled(bundle.x_row(k) + b, 1.0, c.e2, c.c2, f2_.row(k) + b, len);
                for (std::size_t i = b; i < e; ++i) f2_.row(k)[i] *= bundle.r_row(1, k)[i];
            });
        }
    }

    Columns at(int k) const {
        if (kind_ == BasisKind::kMonomial)
            return {bundle_.x_row(k), bundle_.r_row(0, k), bundle_.r_row(1, k)};
        return {f0_.row(k), f1_.row(k), f2_.row(k)};
    }

  private:
    const PathBundle& bundle_;
    BasisKind kind_;
    Table f0_, f1_, f2_;
};

// Fit with an optional in-the-money restriction: only observations with
// itm[i] > 0 enter the regression. Falls back to the full set when fewer
// than the basis dimension qualify.
RegressionFit fit_maybe_itm(const Columns& cols, const double* y, const double* itm,
                            std::size_t n, unsigned threads) {
    if (!itm) return fit_columns(cols.c1, cols.c2, cols.c3, y, n, threads);
    std::vector<double> c1, c2, c3, yy;
    c1.reserve(n); c2.reserve(n); c3.reserve(n); yy.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (itm[i] > 0.0) {
            c1.push_back(cols.c1[i]);
            c2.push_back(cols.c2[i]);
            c3.push_back(cols.c3[i]);
            yy.push_back(y[i]);
        }
    }
    if (yy.size() < RegressionFit::kBasisDim)
        return fit_columns(cols.c1, cols.c2, cols.c3, y, n, threads);
    return fit_columns(c1.data(), c2.data(), c3.data(), yy.data(), yy.size(), threads);
}

double ascending_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

StoppingResult backward_induction(const PathBundle& bundle, const ModelParams& params,
                                  const StopperOptions& opts) {
    const int n = bundle.grid.n_steps;
    const std::size_t m = bundle.m_paths;
    if (n < 2) throw std::invalid_argument("backward_induction: need n_steps >= 2");
    if (bundle.n_regimes != 2)
        throw std::invalid_argument("backward_induction: two post-change regimes required");

    const auto& ops = kernels::active();
    const BasisColumns basis(bundle, params, opts.basis, opts.threads);

    // Immediate payoff of the closing trade at every date; the opening
    // trade's payoff is its negative (the payoff is odd in the direction).
    const double close_sign = opts.short_side ? -1.0 : 1.0;
    Table payoff(n + 1, m);
    for (int k = 1; k <= n; ++k) {
        const auto c = trade_payoff_coeffs(params, bundle.grid.t(k));
        parallel_blocks(m, opts.threads, [&](std::size_t, std::size_t b, std::size_t e) {
            ops.trade_payoff(bundle.x_row(k) + b, bundle.r_row(0, k) + b,
                             bundle.r_row(1, k) + b, c, close_sign, payoff.row(k) + b, e - b);
        });
    }

    // ---- pass 1: sell time ----
    std::vector<std::int32_t> tau2_table(static_cast<std::size_t>(n + 1) * m);
    auto tau2_row = [&](int k) { return tau2_table.data() + static_cast<std::size_t>(k) * m; };
    std::fill_n(tau2_row(n), m, n);

    Table sell_value(n + 1, m);  // realized pass-1 payoff from each date on
    std::vector<double> p2(payoff.row(n), payoff.row(n) + m);
    std::copy(p2.begin(), p2.end(), sell_value.row(n));

    std::vector<RegressionFit> sell_fits(n);  // index k, 1..n-1 used
    std::vector<double> cont(m), v1k(m), stopval(m);

    for (int k = n - 1; k >= 1; --k) {
        const Columns cols = basis.at(k);
        // every path is in the money on the sell side (the payoff is positive)
        sell_fits[k] = fit_columns(cols.c1, cols.c2, cols.c3, p2.data(), m, opts.threads);
        parallel_blocks(m, opts.threads, [&](std::size_t, std::size_t b, std::size_t e) {
            ops.affine4(cols.c1 + b, cols.c2 + b, cols.c3 + b,
                        sell_fits[k].coefficients.data(), cont.data() + b, e - b);
            const double* imm = payoff.row(k);
            for (std::size_t i = b; i < e; ++i) {
                if (imm[i] > cont[i]) {
                    tau2_row(k)[i] = static_cast<std::int32_t>(k);
                    p2[i] = imm[i];
                } else {
                    tau2_row(k)[i] = tau2_row(k + 1)[i];
                }
            }
        });
        std::copy(p2.begin(), p2.end(), sell_value.row(k));
    }

    // ---- pass 2: buy time ----
    std::vector<std::int32_t> tau1(m, n);
    std::vector<double> p1(m);
    for (std::size_t i = 0; i < m; ++i) p1[i] = sell_value.row(n)[i] - payoff.row(n)[i];

    for (int k = n - 1; k >= 1; --k) {
        const Columns cols = basis.at(k);
        const double* imm_sell = payoff.row(k);
        if (opts.fitted_v1) {
            parallel_blocks(m, opts.threads, [&](std::size_t, std::size_t b, std::size_t e) {
                ops.affine4(cols.c1 + b, cols.c2 + b, cols.c3 + b,
                            sell_fits[k].coefficients.data(), v1k.data() + b, e - b);
                for (std::size_t i = b; i < e; ++i)
                    v1k[i] = std::max(imm_sell[i], v1k[i]);
            });
        } else {
            std::copy(sell_value.row(k), sell_value.row(k) + m, v1k.begin());
        }
        for (std::size_t i = 0; i < m; ++i) stopval[i] = v1k[i] - imm_sell[i];

        const RegressionFit fit = fit_maybe_itm(
            cols, p1.data(), opts.itm_filter ? stopval.data() : nullptr, m, opts.threads);
        parallel_blocks(m, opts.threads, [&](std::size_t, std::size_t b, std::size_t e) {
            ops.affine4(cols.c1 + b, cols.c2 + b, cols.c3 + b, fit.coefficients.data(),
                        cont.data() + b, e - b);
            for (std::size_t i = b; i < e; ++i) {
                const bool eligible = !opts.itm_filter || stopval[i] > 0.0;
                if (eligible && stopval[i] > cont[i]) {
                    tau1[i] = static_cast<std::int32_t>(k);
                    p1[i] = sell_value.row(k)[i] - payoff.row(k)[i];
                } else {
                    const std::int32_t capped = std::min(tau2_row(k)[i], tau1[i]);
                    if (capped != tau1[i]) {
                        tau1[i] = capped;
                        p1[i] = sell_value.row(capped)[i] - payoff.row(capped)[i];
                    }
                }
            }
        });
    }

    StoppingResult result;
    result.tau1 = std::move(tau1);
    result.tau2.resize(m);
    for (std::size_t i = 0; i < m; ++i) result.tau2[i] = tau2_row(result.tau1[i])[i];
    result.value = std::max(ascending_mean(p1), 0.0);
    result.cont_values = std::move(p1);
    return result;
}

StopDistribution stopping_distribution(const StoppingResult& result, const PathBundle& bundle) {
    const int n = bundle.grid.n_steps;
    const std::size_t m = bundle.m_paths;
    if (result.tau1.size() != m || result.tau2.size() != m)
        throw std::invalid_argument("stopping_distribution: result and bundle disagree on paths");

    StopDistribution dist;
    const std::array<const std::vector<std::int32_t>*, 2> taus = {&result.tau1, &result.tau2};
    for (int side = 0; side < 2; ++side) {
        std::vector<std::size_t> counts(n + 1, 0);
        std::vector<double> weighted(n + 1, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const std::int32_t k = (*taus[side])[i];
            counts[k] += 1;
            weighted[k] += bundle.zpost_row(k)[i];
        }
        auto& p0 = dist.mass_p0[side];
        auto& p = dist.mass_p[side];
        auto& pn = dist.mass_p_norm[side];
        p0.resize(n);
        p.resize(n);
        pn.resize(n);
        double total = 0.0;
        for (int k = 1; k <= n; ++k) {
            p0[k - 1] = static_cast<double>(counts[k]) / static_cast<double>(m);
            p[k - 1] = weighted[k] / static_cast<double>(m);
            total += p[k - 1];
        }
        for (int k = 0; k < n; ++k) pn[k] = total > 0.0 ? p[k] / total : 0.0;
    }
    return dist;
}

void write_distribution_csv(std::ostream& out, const StopDistribution& dist,
                            const TimeGrid& grid) {
    out << "k,t,buy_mass_p0,sell_mass_p0,buy_mass_p,sell_mass_p\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
    };
    for (int k = 1; k <= grid.n_steps; ++k) {
        out << k;
        put(grid.t(k));
        put(dist.mass_p0[0][k - 1]);
        put(dist.mass_p0[1][k - 1]);
        put(dist.mass_p[0][k - 1]);
        put(dist.mass_p[1][k - 1]);
        out << '\n';
    }
}

StopDistribution read_distribution_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("k,t,", 0) != 0)
        throw std::runtime_error("stopping distribution: bad or missing header");
    StopDistribution dist;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::array<double, 6> v{};
        for (int i = 0; i < 6; ++i) {
            if (!std::getline(row, field, ',')) throw std::runtime_error("stopping distribution: short row");
            v[i] = std::stod(field);
        }
        dist.mass_p0[0].push_back(v[2]);
        dist.mass_p0[1].push_back(v[3]);
        dist.mass_p[0].push_back(v[4]);
        dist.mass_p[1].push_back(v[5]);
    }
    for (int side = 0; side < 2; ++side) {
        double total = 0.0;
        for (double x : dist.mass_p[side]) total += x;
        dist.mass_p_norm[side].resize(dist.mass_p[side].size());
        for (std::size_t k = 0; k < dist.mass_p[side].size(); ++k)
            dist.mass_p_norm[side][k] = total > 0.0 ? dist.mass_p[side][k] / total : 0.0;
    }
    return dist;
}

}  // namespace imc
