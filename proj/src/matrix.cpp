#include "qoptk/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace qoptk {

CMat CMat::identity(int n) {
    CMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMat CMat::adjoint() const {
    CMat r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

CMat CMat::transpose() const {
    CMat r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

CMat CMat::conj() const {
    CMat r(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = std::conj(a_[i]);
    return r;
}

cxd CMat::trace() const {
    if (!is_square()) throw DimMismatch("trace of non-square matrix");
    cxd t = 0.0;
    for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

double CMat::max_abs() const {
    double m = 0.0;
    for (const cxd& z : a_) m = std::max(m, std::abs(z));
    return m;
}

bool CMat::all_finite() const {
    for (const cxd& z : a_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

CMat& CMat::operator+=(const CMat& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimMismatch("operator+=");
    kernels::active().axpy(a_.data(), cxd(1.0, 0.0), o.a_.data(), a_.size());
    return *this;
}

CMat& CMat::operator-=(const CMat& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimMismatch("operator-=");
    kernels::active().axpy(a_.data(), cxd(-1.0, 0.0), o.a_.data(), a_.size());
    return *this;
}

CMat operator*(const CMat& x, const CMat& y) {
    if (x.cols() != y.rows()) throw DimMismatch("operator*: inner dimensions differ");
    CMat c(x.rows(), y.cols());
    kernels::active().matmul(c.data(), x.data(), y.data(), x.rows(), x.cols(), y.cols());
    return c;
}

cxd fro_inner(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimMismatch("fro_inner");
    return kernels::active().dotc(a.data(), b.data(), a.size());
}

CMat kron(const CMat& a, const CMat& b) {
    CMat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const cxd s = a(i, j);
            if (s == cxd(0.0, 0.0)) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = s * b(k, l);
        }
    return r;
}

CMat ptrace_first(const CMat& m, int d1, int d2) {
    if (m.rows() != d1 * d2 || m.cols() != d1 * d2) throw DimMismatch("ptrace_first");
    CMat r(d2, d2);
    for (int k = 0; k < d2; ++k)
        for (int l = 0; l < d2; ++l) {
            cxd s = 0.0;
            for (int i = 0; i < d1; ++i) s += m(i * d2 + k, i * d2 + l);
            r(k, l) = s;
        }
    return r;
}

CMat ptrace_second(const CMat& m, int d1, int d2) {
    if (m.rows() != d1 * d2 || m.cols() != d1 * d2) throw DimMismatch("ptrace_second");
    CMat r(d1, d1);
    for (int i = 0; i < d1; ++i)
        for (int j = 0; j < d1; ++j) {
            cxd s = 0.0;
            for (int k = 0; k < d2; ++k) s += m(i * d2 + k, j * d2 + k);
            r(i, j) = s;
        }
    return r;
}

CMat embed_first(const CMat& op, int d2) { return kron(op, CMat::identity(d2)); }

CMat embed_second(const CMat& op, int d1) { return kron(CMat::identity(d1), op); }

CMat vec(const CMat& m) {
    CMat v(m.rows() * m.cols(), 1);
    std::copy(m.data(), m.data() + m.size(), v.data());
    return v;
}

CMat unvec(const CMat& v, int rows, int cols) {
    if (int(v.size()) != rows * cols) throw DimMismatch("unvec");
    CMat m(rows, cols);
    std::copy(v.data(), v.data() + v.size(), m.data());
    return m;
}

CMat basis_ket(int d, int i) {
    CMat v(d, 1);
    v(i, 0) = 1.0;
    return v;
}

CMat ketbra(const CMat& u, const CMat& v) {
    if (u.cols() != 1 || v.cols() != 1) throw DimMismatch("ketbra expects column vectors");
    CMat r(u.rows(), v.rows());
    kernels::active().rank1_acc(r.data(), cxd(1.0, 0.0), u.data(), v.data(), u.rows(), v.rows());
    return r;
}

CMat projector(const CMat& u) {
    const double n2 = kernels::active().nrm2sq(u.data(), u.size());
    CMat r(u.rows(), u.rows());
    kernels::active().rank1_acc(r.data(), cxd(1.0 / n2, 0.0), u.data(), u.data(), u.rows(),
                                u.rows());
    return r;
}

double max_abs_diff(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimMismatch("max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

CMat Rng::ginibre(int rows, int cols) {
    CMat g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = cnormal();
    return g;
}

CMat Rng::haar_unitary(int n) {
    // QR of a Ginibre matrix by modified Gram-Schmidt, R-diagonal phases fixed.
    CMat g = ginibre(n, n);
    CMat q(n, n);
    for (int col = 0; col < n; ++col) {
        std::vector<cxd> v(n);
        for (int i = 0; i < n; ++i) v[i] = g(i, col);
        for (int rep = 0; rep < 2; ++rep)
            for (int prev = 0; prev < col; ++prev) {
                cxd ov = 0.0;
                for (int i = 0; i < n; ++i) ov += std::conj(q(i, prev)) * v[i];
                for (int i = 0; i < n; ++i) v[i] -= ov * q(i, prev);
            }
        double nrm = 0.0;
        for (int i = 0; i < n; ++i) nrm += std::norm(v[i]);
        nrm = std::sqrt(nrm);
        cxd phase = v[0] != cxd(0.0, 0.0) ? v[0] / std::abs(v[0]) : cxd(1.0, 0.0);
        for (int i = 0; i < n; ++i) q(i, col) = v[i] / (nrm * phase);
    }
    return q;
}

CMat Rng::hermitian(int n) {
    CMat g = ginibre(n, n);
    CMat h = g + g.adjoint();
    h *= cxd(0.5, 0.0);
    return h;
}

CMat Rng::psd(int n, int rank) {
    CMat g = ginibre(n, rank);
    return g * g.adjoint();
}

CMat Rng::density(int n, int rank) {
    CMat p = psd(n, rank);
    const double t = p.trace().real();
    p *= cxd(1.0 / t, 0.0);
    return p;
}

std::vector<double> Rng::probability_vector(int n) {
    std::vector<double> p(n);
    double s = 0.0;
    for (double& x : p) {
        x = -std::log(std::max(uniform(), 1e-300));
        s += x;
    }
    for (double& x : p) x /= s;
    return p;
}

std::vector<CMat> orthonormalize_span(const std::vector<CMat>& mats, double tol) {
    std::vector<CMat> onb;
    for (const CMat& m : mats) {
        const double input_norm = m.fro_norm();
        if (input_norm <= tol) continue;
        CMat v = m;
        for (int rep = 0; rep < 2; ++rep)
            for (const CMat& b : onb) {
                const cxd ov = fro_inner(b, v);
                kernels::active().axpy(v.data(), -ov, b.data(), v.size());
            }
        const double res = v.fro_norm();
        if (res > tol * std::max(1.0, input_norm)) {
            v *= cxd(1.0 / res, 0.0);
            onb.push_back(std::move(v));
        }
    }
    return onb;
}

double span_residual(const CMat& m, const std::vector<CMat>& onb) {
    CMat v = m;
    for (int rep = 0; rep < 2; ++rep)
        for (const CMat& b : onb) {
            const cxd ov = fro_inner(b, v);
            kernels::active().axpy(v.data(), -ov, b.data(), v.size());
        }
    return v.fro_norm();
}

} // namespace qoptk
