#include "impulsemc/regression.hpp"

#include "impulsemc/kernels.hpp"
#include "impulsemc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imc {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric 4x4 matrix. Fixed sweep
// order, so the result is deterministic; quadratic convergence makes eight
// sweeps far more than enough at double precision.
void jacobi_eigh4(double a[4][4], double values[4], double vectors[4][4]) {
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) vectors[i][j] = (i == j) ? 1.0 : 0.0;

    for (int sweep = 0; sweep < 16; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += a[p][q] * a[p][q];
        if (off == 0.0) break;
        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double sign = theta >= 0.0 ? 1.0 : -1.0;
                const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 4; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const double vkp = vectors[k][p], vkq = vectors[k][q];
                    vectors[k][p] = c * vkp - s * vkq;
                    vectors[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    for (int i = 0; i < 4; ++i) values[i] = a[i][i];
}

}  // namespace

RegressionFit fit_columns(const double* x, const double* r1, const double* r2,
                          const double* y, std::size_t n, unsigned threads) {
    if (n == 0) throw std::invalid_argument("fit_columns: need at least one observation");

    const auto& ops = kernels::active();
    const std::size_t nblocks = block_count(n);
    std::vector<std::array<double, 14>> partial(nblocks);
    parallel_blocks(n, threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
        ops.design_moments(x + begin, r1 + begin, r2 + begin, y + begin, end - begin,
                           partial[b].data(), partial[b].data() + 10);
    });
    double psi_u[10] = {0}, rhs[4] = {0};
    for (const auto& block : partial) {
        for (int i = 0; i < 10; ++i) psi_u[i] += block[i];
        for (int i = 0; i < 4; ++i) rhs[i] += block[10 + i];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : psi_u) v *= inv_n;
    for (double& v : rhs) v *= inv_n;

    double a[4][4] = {{psi_u[0], psi_u[1], psi_u[2], psi_u[3]},
                      {psi_u[1], psi_u[4], psi_u[5], psi_u[6]},
                      {psi_u[2], psi_u[5], psi_u[7], psi_u[8]},
                      {psi_u[3], psi_u[6], psi_u[8], psi_u[9]}};
    double values[4], vectors[4][4];
    jacobi_eigh4(a, values, vectors);

    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, v);
    const double cutoff = kSingularValueCutoff * vmax;

    RegressionFit fit;
    for (int i = 0; i < 4; ++i) {
        if (values[i] <= cutoff) continue;
        double proj = 0.0;
        for (int k = 0; k < 4; ++k) proj += vectors[k][i] * rhs[k];
        proj /= values[i];
        for (int k = 0; k < 4; ++k) fit.coefficients[k] += vectors[k][i] * proj;
        ++fit.rank;
    }
    std::array<double, 4> sv = {values[0], values[1], values[2], values[3]};
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    fit.singular_values = sv;
    return fit;
}

RegressionFit fit_regression(const std::vector<double>& targets, const PathBundle& bundle,
                             int k, unsigned threads) {
    if (targets.size() != bundle.m_paths)
        throw std::invalid_argument("fit_regression: one target per path required");
    if (k < 0 || k >= bundle.grid.n_steps)
        throw std::invalid_argument("fit_regression: decision index out of range");
    if (bundle.n_regimes != 2)
        throw std::invalid_argument("fit_regression: two post-change regimes required");
    return fit_columns(bundle.x_row(k), bundle.r_row(0, k), bundle.r_row(1, k),
                       targets.data(), bundle.m_paths, threads);
}

}  // namespace imc
