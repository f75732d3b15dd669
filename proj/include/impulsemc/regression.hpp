#pragma once
// Least-squares fit of a target against the four-dimensional basis
// g = (1, x, r1, r2), solved through the moment matrix: Psi A = b with
// Psi = mean(g g^T) and b = mean(y g). Psi is decomposed by a cyclic
// Jacobi eigensolver; eigenvalues below 1e-10 of the largest are truncated
// (pseudo-inverse), which absorbs rank-deficient designs -- a constant
// design degrades to the intercept-only fit instead of failing.

#include "impulsemc/paths.hpp"

#include <array>
#include <cstddef>

namespace imc {

struct RegressionFit {
    std::array<double, 4> coefficients{};    // against (1, x, r1, r2)
    std::array<double, 4> singular_values{}; // of Psi, descending
    int rank = 0;                            // retained after truncation
    static constexpr int kBasisDim = 4;

    double predict(double x, double r1, double r2) const {
        return coefficients[0] + coefficients[1] * x + coefficients[2] * r1 +
               coefficients[3] * r2;
    }
};

inline constexpr double kSingularValueCutoff = 1e-10;  // relative to the largest

// Fit from explicit basis columns. Moment accumulation runs over fixed-size
// path blocks merged in ascending order, so the result is identical for any
// thread count.
RegressionFit fit_columns(const double* x, const double* r1, const double* r2,
                          const double* y, std::size_t n, unsigned threads = 0);

// Fit against the bundle's state columns at decision index k.
RegressionFit fit_regression(const std::vector<double>& targets, const PathBundle& bundle,
                             int k, unsigned threads = 0);

}  // namespace imc
