// AVX2+FMA kernels, 2 complex doubles per 256-bit vector. Compiled with
// -mavx2 -mfma on x86-64; execution is gated behind the runtime CPUID check in
// kernels.cpp. Semantics match kernels_scalar.cpp bit-for-bit in structure
// (same accumulation order over k), differing only by vector-lane grouping.

#include "qoptk/kernels.hpp"

#if defined(QOPTK_BUILD_AVX2) && (defined(__x86_64__) || defined(__i386__))
#define QOPTK_AVX2_IMPL 1
#include <immintrin.h>
#endif

namespace qoptk::kernels {

#ifdef QOPTK_AVX2_IMPL

namespace {

// [re0,im0,re1,im1] -> [im0,re0,im1,re1]
inline __m256d swap_pairs(__m256d v) { return _mm256_permute_pd(v, 0b0101); }

// (ar + i*ai) * v for a vector of 2 complex values; ar/ai broadcast.
inline __m256d cmul_bcast(__m256d ar, __m256d ai, __m256d v) {
    return _mm256_addsub_pd(_mm256_mul_pd(ar, v), _mm256_mul_pd(ai, swap_pairs(v)));
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void v_axpy(cxd* y, cxd alpha, const cxd* x, std::size_t n) {
    const __m256d ar = _mm256_set1_pd(alpha.real());
    const __m256d ai = _mm256_set1_pd(alpha.imag());
    double* yd = reinterpret_cast<double*>(y);
    const double* xd = reinterpret_cast<const double*>(x);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        __m256d yv = _mm256_loadu_pd(yd + 2 * i);
        _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(yv, cmul_bcast(ar, ai, xv)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void v_scal(cxd* x, cxd alpha, std::size_t n) {
    const __m256d ar = _mm256_set1_pd(alpha.real());
    const __m256d ai = _mm256_set1_pd(alpha.imag());
    double* xd = reinterpret_cast<double*>(x);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        _mm256_storeu_pd(xd + 2 * i, cmul_bcast(ar, ai, xv));
    }
    for (; i < n; ++i) x[i] *= alpha;
}

void v_matmul_acc(cxd* c, const cxd* a, const cxd* b, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const cxd* arow = a + std::size_t(i) * k;
        cxd* crow = c + std::size_t(i) * n;
        for (int l = 0; l < k; ++l) {
            const cxd s = arow[l];
            if (s == cxd(0.0, 0.0)) continue;
            v_axpy(crow, s, b + std::size_t(l) * n, std::size_t(n));
        }
    }
}

void v_matmul(cxd* c, const cxd* a, const cxd* b, int m, int k, int n) {
    for (std::size_t i = 0, e = std::size_t(m) * n; i < e; ++i) c[i] = cxd(0.0, 0.0);
    v_matmul_acc(c, a, b, m, k, n);
}

cxd v_dotc(const cxd* a, const cxd* b, std::size_t n) {
    const double* ad = reinterpret_cast<const double*>(a);
    const double* bd = reinterpret_cast<const double*>(b);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    // even lanes -1: picks out ar*bi - ai*br from the pair-swapped product
    const __m256d sign = _mm256_set_pd(1.0, -1.0, 1.0, -1.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d av = _mm256_loadu_pd(ad + 2 * i);
        __m256d bv = _mm256_loadu_pd(bd + 2 * i);
        acc_re = _mm256_fmadd_pd(av, bv, acc_re);
        acc_im = _mm256_fmadd_pd(_mm256_mul_pd(swap_pairs(av), bv), sign, acc_im);
    }
    double re = hsum(acc_re), im = hsum(acc_im);
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

double v_nrm2sq(const cxd* a, std::size_t n) {
    const double* ad = reinterpret_cast<const double*>(a);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d av = _mm256_loadu_pd(ad + 2 * i);
        acc = _mm256_fmadd_pd(av, av, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return s;
}

void v_rot(cxd* x, cxd* y, std::size_t n, double c, cxd s) {
    const __m256d cv = _mm256_set1_pd(c);
    const __m256d sr = _mm256_set1_pd(s.real());
    const __m256d si = _mm256_set1_pd(s.imag());
    const __m256d scr = sr;
    const __m256d sci = _mm256_set1_pd(-s.imag()); // conj(s)
    double* xd = reinterpret_cast<double*>(x);
    double* yd = reinterpret_cast<double*>(y);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        __m256d yv = _mm256_loadu_pd(yd + 2 * i);
        __m256d xn = _mm256_add_pd(_mm256_mul_pd(cv, xv), cmul_bcast(sr, si, yv));
        __m256d yn = _mm256_sub_pd(_mm256_mul_pd(cv, yv), cmul_bcast(scr, sci, xv));
        _mm256_storeu_pd(xd + 2 * i, xn);
        _mm256_storeu_pd(yd + 2 * i, yn);
    }
    const cxd sc = std::conj(s);
    for (; i < n; ++i) {
        const cxd xi = x[i];
        x[i] = c * xi + s * y[i];
        y[i] = c * y[i] - sc * xi;
    }
}

void v_rank1_acc(cxd* c, cxd alpha, const cxd* x, const cxd* y, int m, int n) {
    const double* yd = reinterpret_cast<const double*>(y);
    const __m256d conj_mask = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
    for (int i = 0; i < m; ++i) {
        const cxd s = alpha * x[i];
        const __m256d sr = _mm256_set1_pd(s.real());
        const __m256d si = _mm256_set1_pd(s.imag());
        double* crow = reinterpret_cast<double*>(c + std::size_t(i) * n);
        int j = 0;
        for (; j + 2 <= n; j += 2) {
            __m256d yv = _mm256_xor_pd(_mm256_loadu_pd(yd + 2 * j), conj_mask); // conj(y)
            __m256d cv = _mm256_loadu_pd(crow + 2 * j);
            _mm256_storeu_pd(crow + 2 * j, _mm256_add_pd(cv, cmul_bcast(sr, si, yv)));
        }
        cxd* crowc = c + std::size_t(i) * n;
        for (; j < n; ++j) crowc[j] += s * std::conj(y[j]);
    }
}

} // namespace

const Backend& avx2_backend() {
    static const Backend table{
        "avx2", v_matmul, v_matmul_acc, v_axpy, v_scal, v_dotc, v_nrm2sq, v_rank1_acc, v_rot};
    return table;
}

#else

const Backend& avx2_backend() { return scalar_backend(); }

#endif

} // namespace qoptk::kernels
