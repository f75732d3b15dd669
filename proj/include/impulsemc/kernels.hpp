#pragma once
// Array kernels for the hot loops. Every kernel has a scalar reference
// implementation and, on x86-64, an AVX2+FMA variant selected at runtime.
// Kernels are pure: output depends only on the input arrays and scalars,
// never on alignment, thread count, or call history. The two backends are
// equivalence-tested against each other; they agree to ~1e-13 relative
// (the vector backend carries its own exp/log polynomials).

#include <cstddef>
#include <string_view>

namespace imc::kernels {

// Coefficients of the closed-form trade payoff at one decision time:
//   payoff(x, r1, r2; z) = z * (c0*x^e0 + c1*x^e1*r1 + c2*x^e2*r2)
// Priors, time factors and the 1/x0 normalization are folded into c0..c2.
struct TradeCoeffs {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double e0 = 0.0, e1 = 0.0, e2 = 0.0;
};

struct Ops {
    const char* name;

    // out[i] = x[i] * exp(drift + vol * z[i])
    void (*gbm_step)(const double* x, const double* z, double drift, double vol,
                     double* out, std::size_t n);

    // out[i] = scale * (x[i] * inv_x0)^q,   x > 0
    void (*pow_scaled)(const double* x, double inv_x0, double q, double scale,
                       double* out, std::size_t n);

    // r[i] += half_dt * (f0[i] + f1[i])
    void (*trapezoid_acc)(const double* f0, const double* f1, double half_dt,
                          double* r, std::size_t n);

    // out[i] = s * a[i]
    void (*scale)(const double* a, double s, double* out, std::size_t n);

    // out[i] += s * a[i] * b[i]
    void (*fma_mul)(const double* a, const double* b, double s, double* out,
                    std::size_t n);

    // out[i] = z * (c0*x^e0 + c1*x^e1*r1[i] + c2*x^e2*r2[i])
    void (*trade_payoff)(const double* x, const double* r1, const double* r2,
                         const TradeCoeffs& c, double z, double* out, std::size_t n);

    // Moments of the regression basis g = (1, x, r1, r2) against target y:
    //   psi[10] = upper triangle of sum_i g g^T (row-major: 00,01,02,03,11,12,13,22,23,33)
    //   rhs[4]  = sum_i y_i * g_i
    // Outputs are overwritten, not accumulated.
    void (*design_moments)(const double* x, const double* r1, const double* r2,
                           const double* y, std::size_t n, double psi[10], double rhs[4]);

    // out[i] = a[0] + a[1]*x[i] + a[2]*r1[i] + a[3]*r2[i]
    void (*affine4)(const double* x, const double* r1, const double* r2,
                    const double a[4], double* out, std::size_t n);

    // out[i] += w * a[i]
    void (*axpy)(const double* a, double w, double* out, std::size_t n);
};

enum class Backend { kAuto, kScalar, kAvx2 };

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when the CPU or build lacks AVX2+FMA

// Process-wide selection. kAuto resolves to the best available backend.
// Returns the ops actually selected; throws std::invalid_argument if an
// explicitly requested backend is unavailable.
const Ops& select(Backend backend);
const Ops& active();

// "auto" | "scalar" | "avx2" -> Backend; throws std::invalid_argument.
Backend parse_backend(std::string_view name);

}  // namespace imc::kernels
