// Scalar reference kernels. These define the semantics the SIMD variants are
// equivalence-tested against.

#include "qoptk/kernels.hpp"

namespace qoptk::kernels {

namespace {

void s_matmul_acc(cxd* c, const cxd* a, const cxd* b, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const cxd* arow = a + std::size_t(i) * k;
        cxd* crow = c + std::size_t(i) * n;
        for (int l = 0; l < k; ++l) {
            const cxd s = arow[l];
            if (s == cxd(0.0, 0.0)) continue;
            const cxd* brow = b + std::size_t(l) * n;
            for (int j = 0; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

void s_matmul(cxd* c, const cxd* a, const cxd* b, int m, int k, int n) {
    for (std::size_t i = 0, e = std::size_t(m) * n; i < e; ++i) c[i] = cxd(0.0, 0.0);
    s_matmul_acc(c, a, b, m, k, n);
}

void s_axpy(cxd* y, cxd alpha, const cxd* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void s_scal(cxd* x, cxd alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

cxd s_dotc(const cxd* a, const cxd* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

double s_nrm2sq(const cxd* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return acc;
}

void s_rank1_acc(cxd* c, cxd alpha, const cxd* x, const cxd* y, int m, int n) {
    for (int i = 0; i < m; ++i) {
        const cxd s = alpha * x[i];
        cxd* crow = c + std::size_t(i) * n;
        for (int j = 0; j < n; ++j) crow[j] += s * std::conj(y[j]);
    }
}

void s_rot(cxd* x, cxd* y, std::size_t n, double c, cxd s) {
    const cxd sc = std::conj(s);
    for (std::size_t i = 0; i < n; ++i) {
        const cxd xi = x[i];
        x[i] = c * xi + s * y[i];
        y[i] = c * y[i] - sc * xi;
    }
}

} // namespace

const Backend& scalar_backend() {
    static const Backend table{
        "scalar", s_matmul, s_matmul_acc, s_axpy, s_scal, s_dotc, s_nrm2sq, s_rank1_acc, s_rot};
    return table;
}

} // namespace qoptk::kernels
