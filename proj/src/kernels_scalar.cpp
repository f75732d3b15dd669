#include "impulsemc/kernels.hpp"

#include <cmath>

namespace imc::kernels {
namespace {

void gbm_step(const double* x, const double* z, double drift, double vol,
              double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * std::exp(drift + vol * z[i]);
}

void pow_scaled(const double* x, double inv_x0, double q, double scale,
                double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = scale * std::exp(q * std::log(x[i] * inv_x0));
}

void trapezoid_acc(const double* f0, const double* f1, double half_dt,
                   double* r, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) r[i] += half_dt * (f0[i] + f1[i]);
}

void scale(const double* a, double s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = s * a[i];
}

void fma_mul(const double* a, const double* b, double s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += s * a[i] * b[i];
}

void trade_payoff(const double* x, const double* r1, const double* r2,
                  const TradeCoeffs& c, double z, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        out[i] = z * (c.c0 * std::exp(c.e0 * lx) + c.c1 * std::exp(c.e1 * lx) * r1[i] +
                      c.c2 * std::exp(c.e2 * lx) * r2[i]);
    }
}

void design_moments(const double* x, const double* r1, const double* r2,
                    const double* y, std::size_t n, double psi[10], double rhs[4]) {
    double s01 = 0, s02 = 0, s03 = 0, s11 = 0, s12 = 0, s13 = 0, s22 = 0, s23 = 0, s33 = 0;
    double b0 = 0, b1 = 0, b2 = 0, b3 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i], ai = r1[i], bi = r2[i], yi = y[i];
        s01 += xi;  s02 += ai;  s03 += bi;
        s11 += xi * xi;  s12 += xi * ai;  s13 += xi * bi;
        s22 += ai * ai;  s23 += ai * bi;  s33 += bi * bi;
        b0 += yi;  b1 += yi * xi;  b2 += yi * ai;  b3 += yi * bi;
    }
    psi[0] = static_cast<double>(n);
    psi[1] = s01; psi[2] = s02; psi[3] = s03;
    psi[4] = s11; psi[5] = s12; psi[6] = s13;
    psi[7] = s22; psi[8] = s23; psi[9] = s33;
    rhs[0] = b0; rhs[1] = b1; rhs[2] = b2; rhs[3] = b3;
}

void affine4(const double* x, const double* r1, const double* r2,
             const double a[4], double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a[0] + a[1] * x[i] + a[2] * r1[i] + a[3] * r2[i];
}

void axpy(const double* a, double w, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += w * a[i];
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar", gbm_step,       pow_scaled, trapezoid_acc, scale,
        fma_mul,  trade_payoff,   design_moments, affine4,   axpy,
    };
    return ops;
}

}  // namespace imc::kernels
