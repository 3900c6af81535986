// matrix.hpp — dense row-major complex matrices and the small utility layer
// shared by every module: Kronecker products, partial traces, vectorisation,
// seeded random ensembles, and Gram-Schmidt over operator spans.

#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "qoptk/errors.hpp"
#include "qoptk/kernels.hpp"

namespace qoptk {

using cxd = std::complex<double>;

class CMat {
public:
    CMat() = default;
    CMat(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols) {}
    CMat(int rows, int cols, std::vector<cxd> entries)
        : rows_(rows), cols_(cols), a_(std::move(entries)) {
        if (a_.size() != std::size_t(rows) * cols)
            throw DimMismatch("CMat: entry count does not match rows*cols");
    }

    static CMat identity(int n);
    static CMat zero(int rows, int cols) { return CMat(rows, cols); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }
    std::size_t size() const { return a_.size(); }

    cxd& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
    const cxd& operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }
    cxd* data() { return a_.data(); }
    const cxd* data() const { return a_.data(); }
    const std::vector<cxd>& entries() const { return a_; }

    CMat adjoint() const;
    CMat transpose() const;
    CMat conj() const;
    cxd trace() const;
    double fro_norm() const { return std::sqrt(kernels::active().nrm2sq(a_.data(), a_.size())); }
    double max_abs() const;
    bool all_finite() const;

    CMat& operator+=(const CMat& o);
    CMat& operator-=(const CMat& o);
    CMat& operator*=(cxd s) {
        kernels::active().scal(a_.data(), s, a_.size());
        return *this;
    }

    friend CMat operator+(CMat x, const CMat& y) { return x += y; }
    friend CMat operator-(CMat x, const CMat& y) { return x -= y; }
    friend CMat operator*(cxd s, CMat x) { return x *= s; }
    friend CMat operator*(CMat x, cxd s) { return x *= s; }
    friend CMat operator*(const CMat& x, const CMat& y);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<cxd> a_;
};

// tr(a† b), the Frobenius inner product
cxd fro_inner(const CMat& a, const CMat& b);

CMat kron(const CMat& a, const CMat& b);

// Partial traces of an operator on H_first ⊗ H_second (composite index i*d2+j).
CMat ptrace_first(const CMat& m, int d1, int d2);  // -> d2 x d2
CMat ptrace_second(const CMat& m, int d1, int d2); // -> d1 x d1

// Lift an operator acting on factor `slot` of a two-factor space into the full space.
CMat embed_first(const CMat& op, int d2);  // op ⊗ 1_{d2}
CMat embed_second(const CMat& op, int d1); // 1_{d1} ⊗ op

// Row-major vectorisation: vec(M)[i*cols+j] = M(i,j); a d1*d2-vector as column.
CMat vec(const CMat& m);
CMat unvec(const CMat& v, int rows, int cols);

CMat basis_ket(int d, int i);                      // d x 1
CMat ketbra(const CMat& u, const CMat& v);         // |u><v|
CMat projector(const CMat& u);                     // |u><u| / <u|u>

double max_abs_diff(const CMat& a, const CMat& b);

// Seeded randomness for reproducible corpora.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }
    std::uint64_t integer() { return gen_(); }
    cxd cnormal() { return {normal(), normal()}; }

    CMat ginibre(int rows, int cols);
    CMat haar_unitary(int n);
    CMat hermitian(int n);                  // GUE-style
    CMat psd(int n, int rank);              // G G† with G n x rank
    CMat density(int n, int rank);          // unit-trace PSD of given rank
    std::vector<double> probability_vector(int n);

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Gram-Schmidt over vectorised matrices; drops directions whose residual
// norm falls below tol relative to the input norm. Two passes per vector.
std::vector<CMat> orthonormalize_span(const std::vector<CMat>& mats, double tol);

// Orthonormal projection of m onto the span (assumed orthonormal); returns residual norm.
double span_residual(const CMat& m, const std::vector<CMat>& onb);

} // namespace qoptk
