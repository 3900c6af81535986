// kernels.hpp — dense complex arithmetic kernels with runtime backend selection.
//
// Every kernel has a scalar reference implementation and, on x86-64 with AVX2+FMA,
// an intrinsics variant. The active backend is picked once at startup from CPUID;
// set QOPTK_KERNELS=scalar (or avx2) to force one. All matrices are row-major
// interleaved std::complex<double>.

#pragma once

#include <complex>
#include <cstddef>

namespace qoptk::kernels {

using cxd = std::complex<double>;

struct Backend {
    const char* name;

    // C (m x n) = A (m x k) * B (k x n). C must not alias A or B.
    void (*matmul)(cxd* c, const cxd* a, const cxd* b, int m, int k, int n);
    // C += A * B
    void (*matmul_acc)(cxd* c, const cxd* a, const cxd* b, int m, int k, int n);
    // y += alpha * x
    void (*axpy)(cxd* y, cxd alpha, const cxd* x, std::size_t n);
    // x *= alpha
    void (*scal)(cxd* x, cxd alpha, std::size_t n);
    // sum_i conj(a_i) * b_i
    cxd (*dotc)(const cxd* a, const cxd* b, std::size_t n);
    // sum_i |a_i|^2
    double (*nrm2sq)(const cxd* a, std::size_t n);
    // C (m x n) += alpha * x * y†   (outer product, y conjugated)
    void (*rank1_acc)(cxd* c, cxd alpha, const cxd* x, const cxd* y, int m, int n);
    // Plane rotation: x <- c x + s y, y <- -conj(s) x_old + c y (c real)
    void (*rot)(cxd* x, cxd* y, std::size_t n, double c, cxd s);
};

const Backend& scalar_backend();

// Only valid to call through when avx2_available(); otherwise the pointers
// fall back to the scalar implementations.
const Backend& avx2_backend();

bool avx2_available();

// Backend chosen at first use (CPUID + QOPTK_KERNELS override).
const Backend& active();

} // namespace qoptk::kernels
