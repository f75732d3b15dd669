// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; only dispatched to
// at runtime when the CPU supports both (see kernels.cpp).
//
// exp and log use the Cephes rational approximations (the same ones behind
// most vector math libraries); agreement with libm is a few ulp, which the
// kernel equivalence tests pin down. Tail elements (n mod 4) go through
// scalar versions of the identical polynomials, so a kernel's output is a
// function of the input array alone.

#include "impulsemc/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>
#include <cmath>
#include <cstdint>

namespace imc::kernels {
namespace {

// ----------------------------- exp --------------------------------------

constexpr double kLog2E   = 1.4426950408889634073599;
constexpr double kLn2Hi   = 6.93145751953125e-1;
constexpr double kLn2Lo   = 1.42860682030941723212e-6;
constexpr double kExpHi   = 708.0;
constexpr double kExpLo   = -708.0;

constexpr double kExpP0 = 1.26177193074810590878e-4;
constexpr double kExpP1 = 3.02994407707441961300e-2;
constexpr double kExpP2 = 9.99999999999999999910e-1;
constexpr double kExpQ0 = 3.00198505138664455042e-6;
constexpr double kExpQ1 = 2.52448340349684104192e-3;
constexpr double kExpQ2 = 2.27265548208155028766e-1;
constexpr double kExpQ3 = 2.00000000000000000005e0;

inline double exp_scalar(double x) {
    if (x > kExpHi) return HUGE_VAL;
    if (x < kExpLo) return 0.0;
    const double nd = std::floor(kLog2E * x + 0.5);
    double r = x - nd * kLn2Hi;
    r -= nd * kLn2Lo;
    const double rr = r * r;
    const double p = r * ((kExpP0 * rr + kExpP1) * rr + kExpP2);
    const double q = ((kExpQ0 * rr + kExpQ1) * rr + kExpQ2) * rr + kExpQ3;
    const double e = 1.0 + 2.0 * p / (q - p);
    const std::int64_t n = static_cast<std::int64_t>(nd);
    double pow2;
    const std::uint64_t bits = static_cast<std::uint64_t>(n + 1023) << 52;
    __builtin_memcpy(&pow2, &bits, sizeof pow2);
    return e * pow2;
}

inline __m256d exp4(__m256d x) {
    const __m256d hi_mask = _mm256_cmp_pd(x, _mm256_set1_pd(kExpHi), _CMP_GT_OQ);
    const __m256d lo_mask = _mm256_cmp_pd(x, _mm256_set1_pd(kExpLo), _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(kExpLo)), _mm256_set1_pd(kExpHi));

    const __m256d nd = _mm256_floor_pd(
        _mm256_fmadd_pd(x, _mm256_set1_pd(kLog2E), _mm256_set1_pd(0.5)));
    __m256d r = _mm256_fnmadd_pd(nd, _mm256_set1_pd(kLn2Hi), x);
    r = _mm256_fnmadd_pd(nd, _mm256_set1_pd(kLn2Lo), r);

    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d p = _mm256_fmadd_pd(_mm256_set1_pd(kExpP0), rr, _mm256_set1_pd(kExpP1));
    p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(kExpP2));
    p = _mm256_mul_pd(p, r);
    __m256d q = _mm256_fmadd_pd(_mm256_set1_pd(kExpQ0), rr, _mm256_set1_pd(kExpQ1));
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(kExpQ2));
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(kExpQ3));
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d e = _mm256_fmadd_pd(
        two, _mm256_div_pd(p, _mm256_sub_pd(q, p)), _mm256_set1_pd(1.0));

    // 2^n through the exponent field; |n| <= 1022 here.
    const __m128i n32 = _mm256_cvtpd_epi32(nd);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i bits = _mm256_slli_epi64(
        _mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    const __m256d pow2 = _mm256_castsi256_pd(bits);

    __m256d out = _mm256_mul_pd(e, pow2);
    out = _mm256_blendv_pd(out, _mm256_set1_pd(HUGE_VAL), hi_mask);
    out = _mm256_blendv_pd(out, _mm256_setzero_pd(), lo_mask);
    return out;
}

// ----------------------------- log --------------------------------------

constexpr double kSqrtHalf = 0.70710678118654752440;
constexpr double kLogC1    = 0.693359375;                   // ln2 split, high
constexpr double kLogC2    = -2.121944400546905827679e-4;   // ln2 split, low

constexpr double kLogP[6] = {1.01875663804580931796e-4, 4.97494994976747001425e-1,
                             4.70579119878881725854e0,  1.44989225341610930846e1,
                             1.79368678507819816313e1,  7.70838733755885391666e0};
constexpr double kLogQ[5] = {1.12873587189167450590e1, 4.52279145837532221105e1,
                             8.29875266912776603211e1, 7.11544750618563894466e1,
                             2.31251620126765340583e1};

// Natural log for positive normal x (all callers guarantee x > 0).
inline double log_scalar(double x) {
    int ie = 0;
    double m = std::frexp(x, &ie);
    double e = static_cast<double>(ie);
    if (m < kSqrtHalf) {
        e -= 1.0;
        m = m + m - 1.0;
    } else {
        m = m - 1.0;
    }
    const double z = m * m;
    double pn = kLogP[0];
    for (int i = 1; i < 6; ++i) pn = pn * m + kLogP[i];
    double qn = m + kLogQ[0];
    for (int i = 1; i < 5; ++i) qn = qn * m + kLogQ[i];
    double y = m * (z * pn / qn);
    y += e * kLogC2;
    y -= 0.5 * z;
    return m + y + e * kLogC1;
}

inline __m256d log4(__m256d x) {
    const __m256i ix = _mm256_castpd_si256(x);
    // frexp: exponent field and mantissa rescaled into [0.5, 1).
    const __m256i exp_bits = _mm256_srli_epi64(ix, 52);
    const __m256d e_raw = _mm256_sub_pd(
        _mm256_castsi256_pd(_mm256_or_si256(
            _mm256_and_si256(exp_bits, _mm256_set1_epi64x(0x7FF)),
            _mm256_set1_epi64x(0x4330000000000000LL))),           // 2^52 + biased exp
        _mm256_set1_pd(4503599627371518.0));                      // 2^52 + 1022
    const __m256d m_raw = _mm256_castsi256_pd(_mm256_or_si256(
        _mm256_and_si256(ix, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
        _mm256_set1_epi64x(0x3FE0000000000000LL)));

    const __m256d small = _mm256_cmp_pd(m_raw, _mm256_set1_pd(kSqrtHalf), _CMP_LT_OQ);
    const __m256d e = _mm256_sub_pd(e_raw, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d m = _mm256_sub_pd(
        _mm256_add_pd(m_raw, _mm256_and_pd(small, m_raw)), one);

    const __m256d z = _mm256_mul_pd(m, m);
    __m256d pn = _mm256_set1_pd(kLogP[0]);
    for (int i = 1; i < 6; ++i) pn = _mm256_fmadd_pd(pn, m, _mm256_set1_pd(kLogP[i]));
    __m256d qn = _mm256_add_pd(m, _mm256_set1_pd(kLogQ[0]));
    for (int i = 1; i < 5; ++i) qn = _mm256_fmadd_pd(qn, m, _mm256_set1_pd(kLogQ[i]));

    __m256d y = _mm256_mul_pd(m, _mm256_mul_pd(z, _mm256_div_pd(pn, qn)));
    y = _mm256_fmadd_pd(e, _mm256_set1_pd(kLogC2), y);
    y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
    return _mm256_fmadd_pd(e, _mm256_set1_pd(kLogC1), _mm256_add_pd(m, y));
}

// ----------------------------- kernels ----------------------------------

void gbm_step(const double* x, const double* z, double drift, double vol,
              double* out, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d vdrift = _mm256_set1_pd(drift);
    const __m256d vvol = _mm256_set1_pd(vol);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d zi = _mm256_loadu_pd(z + i);
        const __m256d ex = exp4(_mm256_fmadd_pd(vvol, zi, vdrift));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), ex));
    }
    for (std::size_t i = n4; i < n; ++i) out[i] = x[i] * exp_scalar(drift + vol * z[i]);
}

void pow_scaled(const double* x, double inv_x0, double q, double scale,
                double* out, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d vinv = _mm256_set1_pd(inv_x0);
    const __m256d vq = _mm256_set1_pd(q);
    const __m256d vs = _mm256_set1_pd(scale);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d lx = log4(_mm256_mul_pd(_mm256_loadu_pd(x + i), vinv));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, exp4(_mm256_mul_pd(vq, lx))));
    }
    for (std::size_t i = n4; i < n; ++i)
        out[i] = scale * exp_scalar(q * log_scalar(x[i] * inv_x0));
}

void trapezoid_acc(const double* f0, const double* f1, double half_dt,
                   double* r, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d h = _mm256_set1_pd(half_dt);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d s = _mm256_add_pd(_mm256_loadu_pd(f0 + i), _mm256_loadu_pd(f1 + i));
        _mm256_storeu_pd(r + i, _mm256_fmadd_pd(h, s, _mm256_loadu_pd(r + i)));
    }
    for (std::size_t i = n4; i < n; ++i) r[i] += half_dt * (f0[i] + f1[i]);
}

void scale(const double* a, double s, double* out, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d vs = _mm256_set1_pd(s);
    for (std::size_t i = 0; i < n4; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, _mm256_loadu_pd(a + i)));
    for (std::size_t i = n4; i < n; ++i) out[i] = s * a[i];
}

void fma_mul(const double* a, const double* b, double s, double* out, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d vs = _mm256_set1_pd(s);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vs, prod, _mm256_loadu_pd(out + i)));
    }
    for (std::size_t i = n4; i < n; ++i) out[i] += s * a[i] * b[i];
}

void trade_payoff(const double* x, const double* r1, const double* r2,
                  const TradeCoeffs& c, double z, double* out, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d vz = _mm256_set1_pd(z);
    const __m256d c0 = _mm256_set1_pd(c.c0), c1 = _mm256_set1_pd(c.c1),
                  c2 = _mm256_set1_pd(c.c2);
    const __m256d e0 = _mm256_set1_pd(c.e0), e1 = _mm256_set1_pd(c.e1),
                  e2 = _mm256_set1_pd(c.e2);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d lx = log4(_mm256_loadu_pd(x + i));
        __m256d acc = _mm256_mul_pd(c0, exp4(_mm256_mul_pd(e0, lx)));
        const __m256d t1 = _mm256_mul_pd(c1, exp4(_mm256_mul_pd(e1, lx)));
        acc = _mm256_fmadd_pd(t1, _mm256_loadu_pd(r1 + i), acc);
        const __m256d t2 = _mm256_mul_pd(c2, exp4(_mm256_mul_pd(e2, lx)));
        acc = _mm256_fmadd_pd(t2, _mm256_loadu_pd(r2 + i), acc);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vz, acc));
    }
    for (std::size_t i = n4; i < n; ++i) {
        const double lx = log_scalar(x[i]);
        out[i] = z * (c.c0 * exp_scalar(c.e0 * lx) + c.c1 * exp_scalar(c.e1 * lx) * r1[i] +
                      c.c2 * exp_scalar(c.e2 * lx) * r2[i]);
    }
}

void design_moments(const double* x, const double* r1, const double* r2,
                    const double* y, std::size_t n, double psi[10], double rhs[4]) {
    const std::size_t n4 = n & ~std::size_t{3};
    __m256d s01 = _mm256_setzero_pd(), s02 = s01, s03 = s01, s11 = s01, s12 = s01,
            s13 = s01, s22 = s01, s23 = s01, s33 = s01;
    __m256d b0 = s01, b1 = s01, b2 = s01, b3 = s01;
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d xi = _mm256_loadu_pd(x + i);
        const __m256d ai = _mm256_loadu_pd(r1 + i);
        const __m256d bi = _mm256_loadu_pd(r2 + i);
        const __m256d yi = _mm256_loadu_pd(y + i);
        s01 = _mm256_add_pd(s01, xi);
        s02 = _mm256_add_pd(s02, ai);
        s03 = _mm256_add_pd(s03, bi);
        s11 = _mm256_fmadd_pd(xi, xi, s11);
        s12 = _mm256_fmadd_pd(xi, ai, s12);
        s13 = _mm256_fmadd_pd(xi, bi, s13);
        s22 = _mm256_fmadd_pd(ai, ai, s22);
        s23 = _mm256_fmadd_pd(ai, bi, s23);
        s33 = _mm256_fmadd_pd(bi, bi, s33);
        b0 = _mm256_add_pd(b0, yi);
        b1 = _mm256_fmadd_pd(yi, xi, b1);
        b2 = _mm256_fmadd_pd(yi, ai, b2);
        b3 = _mm256_fmadd_pd(yi, bi, b3);
    }
    auto hsum = [](__m256d v) {
        const __m128d lo = _mm256_castpd256_pd128(v);
        const __m128d hi = _mm256_extractf128_pd(v, 1);
        const __m128d s = _mm_add_pd(lo, hi);
        return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
    };
    double t01 = hsum(s01), t02 = hsum(s02), t03 = hsum(s03), t11 = hsum(s11),
           t12 = hsum(s12), t13 = hsum(s13), t22 = hsum(s22), t23 = hsum(s23),
           t33 = hsum(s33);
    double u0 = hsum(b0), u1 = hsum(b1), u2 = hsum(b2), u3 = hsum(b3);
    for (std::size_t i = n4; i < n; ++i) {
        const double xi = x[i], ai = r1[i], bi = r2[i], yi = y[i];
        t01 += xi;  t02 += ai;  t03 += bi;
        t11 += xi * xi;  t12 += xi * ai;  t13 += xi * bi;
        t22 += ai * ai;  t23 += ai * bi;  t33 += bi * bi;
        u0 += yi;  u1 += yi * xi;  u2 += yi * ai;  u3 += yi * bi;
    }
    psi[0] = static_cast<double>(n);
    psi[1] = t01; psi[2] = t02; psi[3] = t03;
    psi[4] = t11; psi[5] = t12; psi[6] = t13;
    psi[7] = t22; psi[8] = t23; psi[9] = t33;
    rhs[0] = u0; rhs[1] = u1; rhs[2] = u2; rhs[3] = u3;
}

void affine4(const double* x, const double* r1, const double* r2,
             const double a[4], double* out, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d a0 = _mm256_set1_pd(a[0]), a1 = _mm256_set1_pd(a[1]),
                  a2 = _mm256_set1_pd(a[2]), a3 = _mm256_set1_pd(a[3]);
    for (std::size_t i = 0; i < n4; i += 4) {
        __m256d acc = _mm256_fmadd_pd(a1, _mm256_loadu_pd(x + i), a0);
        acc = _mm256_fmadd_pd(a2, _mm256_loadu_pd(r1 + i), acc);
        acc = _mm256_fmadd_pd(a3, _mm256_loadu_pd(r2 + i), acc);
        _mm256_storeu_pd(out + i, acc);
    }
    for (std::size_t i = n4; i < n; ++i)
        out[i] = a[0] + a[1] * x[i] + a[2] * r1[i] + a[3] * r2[i];
}

void axpy(const double* a, double w, double* out, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d vw = _mm256_set1_pd(w);
    for (std::size_t i = 0; i < n4; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_fmadd_pd(vw, _mm256_loadu_pd(a + i), _mm256_loadu_pd(out + i)));
    for (std::size_t i = n4; i < n; ++i) out[i] += w * a[i];
}

}  // namespace

const Ops* avx2_ops_impl() {
    static const Ops ops = {
        "avx2",  gbm_step,     pow_scaled, trapezoid_acc, scale,
        fma_mul, trade_payoff, design_moments, affine4,   axpy,
    };
    return &ops;
}

}  // namespace imc::kernels

#else

namespace imc::kernels {
const Ops* avx2_ops_impl() { return nullptr; }
}  // namespace imc::kernels

#endif
