// opalg.hpp — exact-tolerance dense operator algebra: Hermitian spectra, ranks,
// support projections, and closure/commutant/center computations for finite
// *-algebras of matrices.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qoptk/matrix.hpp"
#include "qoptk/tolerances.hpp"

namespace qoptk {

// A = V diag(w) V†, eigenvalues ascending. Inputs within herm_tol of Hermitian
// are symmetrised first; larger deviations throw NotHermitian.
struct EigResult {
    std::vector<double> w;
    CMat V; // columns are eigenvectors
};
EigResult eigh(const CMat& a, double herm_tol = 1e-8);

// Thin SVD of a general matrix via the Hermitian dilation [[0, M],[M†, 0]];
// singular values descending.
struct SvdResult {
    std::vector<double> s;
    CMat U; // m x r
    CMat V; // n x r, M = U diag(s) V†
};
SvdResult svd(const CMat& m);

// Orthonormal basis (as columns) of {v : ||M v|| <= tol * max(1, sigma_max)}.
CMat nullspace(const CMat& m, double tol);

// Count of eigenvalues above rank_tol * max(1, lambda_max). Throws NotPSD if
// the smallest eigenvalue is below -psd_tol.
int psd_rank(const CMat& a, const Tolerances& tol);

// Projector onto the span of eigenvectors above the rank threshold.
CMat support_projection(const CMat& a, const Tolerances& tol);

// min eigenvalue > rank_tol * max(1, lambda_max); margin receives min eigenvalue.
bool is_strictly_positive_op(const CMat& a, const Tolerances& tol, double* margin = nullptr);

CMat sqrt_psd(const CMat& a, const Tolerances& tol);
// Eigenvalues below `floor` throw SingularNormalizer.
CMat inv_sqrt_psd(const CMat& a, double herm_tol, double floor = 1e-14);

// Basis of a *-closed subspace of d x d matrices, orthonormal in the Frobenius
// inner product and spanned by Hermitian elements where possible.
struct AlgebraBasis {
    int dim = 0;
    std::vector<CMat> basis;

    int span_dimension() const { return int(basis.size()); }
    bool contains(const CMat& m, double tol) const;
};

// Smallest unit-containing, *-closed, multiplicatively closed subspace holding
// the generators; alternating product/adjoint augmentation until the span
// dimension stabilises (capped at dim^2).
AlgebraBasis algebra_closure(const std::vector<CMat>& generators, int dim, const Tolerances& tol);

// {B : [B, A] = 0 for all A in alg}, from the null space of the summed
// commutator superoperators. The result is re-expressed on a Hermitian basis.
AlgebraBasis commutant(const AlgebraBasis& alg, const Tolerances& tol);

// Span intersection of two subspaces of L(C^d), as an AlgebraBasis.
AlgebraBasis span_intersection(const AlgebraBasis& a, const AlgebraBasis& b, const Tolerances& tol);

// Minimal projections of the center alg ∩ alg'; orthocomplete over the unit of
// the algebra. Obtained by eigen-grouping a seeded generic Hermitian center
// element; throws DegenerateCenter if grouping stays ambiguous after redraws.
std::vector<CMat> center_projections(const AlgebraBasis& alg, const Tolerances& tol,
                                     std::uint64_t seed = 20240901);

// Hermitian spanning set with the same span (H and iH parts, orthonormalised).
std::vector<CMat> hermitian_basis(const std::vector<CMat>& span, double tol);

} // namespace qoptk
