// fixedpoints.hpp — fixed-point analysis of channels and operations: fixed
// bases, the Cesàro-average channel, minimal support projection, classical
// actions with irreducibility, Kraus block decomposition, and the factor
// decomposition of the fixed-point algebra.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qoptk/qmaps.hpp"

namespace qoptk {

// Basis of the eigenvalue-1 eigenspace of the superoperator (window fixed_tol);
// empty when no eigenvalue sits within the window. Adjoint-closed span.
AlgebraBasis fixed_point_basis(const CPMap& map, const Tolerances& tol);

// The Cesàro limit of ch^n, computed as the spectral projection of the
// superoperator onto its eigenvalue-1 eigenspace. Idempotent, and absorbs ch
// on both sides, each within 1e-8.
CPMap average_channel(const CPMap& ch, const Tolerances& tol);

// Support of average_channel applied to the maximally mixed state: the
// carrier of every fixed state.
CMat minimal_support_projection(const CPMap& ch, const Tolerances& tol);

struct ClassicalAction {
    int dim = 0;
    std::vector<double> t;   // row-major dim x dim, T[m][n] = <m|Phi(|n><n|)|m>
    std::vector<CMat> basis; // the orthonormal kets defining the matrix

    double at(int m, int n) const { return t[std::size_t(m) * dim + n]; }
};

// T[m][n] = <phi_m|Phi(|phi_n><phi_n|)|phi_m>, cross-checked against
// sum_a K ⊙ conj(K) in the same basis within 1e-10.
ClassicalAction classical_action(const CPMap& ch, const std::vector<CMat>& basis,
                                 const Tolerances& tol);

// Strong connectivity of the digraph with edge n->m when T[m][n] > tol.
bool is_irreducible(const ClassicalAction& t, double tol);

struct BlockDecomposition {
    std::vector<CMat> projections;              // P_beta on the full space
    std::vector<CMat> isometries;               // d x m_beta, columns span P_beta
    std::vector<ClassicalAction> block_actions; // in the isometry basis
    std::vector<CMat> block_fixed_states;       // stationary states, full-space embedded
};

// Finest orthocomplete family commuting with every Kraus operator, refined
// until each block's classical action is irreducible; RefinementStall when a
// reducible block admits no finer commuting projection.
BlockDecomposition kraus_block_decomposition(const CPMap& ch, const Tolerances& tol,
                                             std::uint64_t seed = 20240901);

// sum_beta p_beta sigma_beta when every block stationary state is full-rank in
// its block; nullopt (with diagnostics) when some block is rank-deficient.
std::optional<CMat> strictly_positive_fixed_state(const CPMap& ch,
                                                  const std::vector<double>* weights,
                                                  const Tolerances& tol,
                                                  std::uint64_t seed = 20240901,
                                                  std::string* diagnostics = nullptr);

struct FixedPointStructure {
    CMat min_support;                           // the projection P
    std::vector<CMat> central_projections;      // P_alpha, full-space
    std::vector<std::pair<int, int>> factor_dims; // (k_alpha, r_alpha)
    std::vector<CMat> block_states;             // omega_alpha on R_alpha (r x r)
    std::vector<CMat> factor_isometries;        // d x (k*r), realising P_a H ≅ K ⊗ R
};

// Decomposes P F(ch*) P into type-I factors L(K_a) ⊗ 1_{R_a} and recovers the
// per-factor states omega_alpha; validates the factorised form of the average
// channel on random inputs within 1e-8.
FixedPointStructure fixed_algebra_decomposition(const CPMap& ch, const Tolerances& tol,
                                                std::uint64_t seed = 20240901);

} // namespace qoptk
