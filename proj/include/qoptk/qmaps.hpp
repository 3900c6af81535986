// qmaps.hpp — completely positive maps in Kraus form: Choi/superoperator
// representations, duals, products, and structural classification.

#pragma once

#include <string>
#include <vector>

#include "qoptk/opalg.hpp"

namespace qoptk {

struct CPMap {
    int dim_in = 0;
    int dim_out = 0;
    std::vector<CMat> kraus; // each dim_out x dim_in

    bool is_square() const { return dim_in == dim_out; }
};

CPMap identity_map(int d);
CPMap cpmap_from_kraus(std::vector<CMat> kraus); // dims inferred, validated

// Schrödinger action: sum_a K_a A K_a†.
CMat apply(const CPMap& map, const CMat& a);

// Heisenberg dual, Kraus operators K_a†.
CPMap dual(const CPMap& map);

// sum_a K_a† K_a (= dual applied to the out-identity).
CMat kraus_sum(const CPMap& map);

// (Phi ⊗ id)(|Omega><Omega|) with |Omega> unnormalised; (dim_out*dim_in)^2.
CMat choi(const CPMap& map);

// Superoperator on row-major vec: S = sum_a K_a ⊗ conj(K_a); dim_out^2 x dim_in^2.
CMat superoperator_matrix(const CPMap& map);

// Index reshuffles between superoperator and Choi layouts.
CMat superop_to_choi(const CMat& s, int dim_in, int dim_out);
CMat choi_to_superop(const CMat& j, int dim_in, int dim_out);

// Canonical Kraus operators from the Choi eigendecomposition (descending
// eigenvalues, eigenvector phase fixed, lexicographic tie-break).
CPMap kraus_from_choi(const CMat& j, int dim_in, int dim_out, const Tolerances& tol);
CPMap canonical(const CPMap& map, const Tolerances& tol);

CPMap tensor(const CPMap& m1, const CPMap& m2);
CPMap compose(const CPMap& m2, const CPMap& m1); // m2 after m1
CPMap convex_mix(const CPMap& m1, const CPMap& m2, double lambda);

bool is_trace_preserving(const CPMap& map, double trace_tol);
// Trace non-increasing: sum K†K <= 1 within psd_tol.
bool is_operation(const CPMap& map, double psd_tol);

struct MapClassification {
    bool trace_preserving = false;
    bool unital = false;
    bool bistochastic = false;
    bool strictly_positive = false;
    bool purity_preserving = false;
    CMat compatible_effect;
    // Per-flag slack: how far inside (positive) or outside each decision sits.
    double trace_preserving_margin = 0.0; // -max|sum K†K - 1|
    double unital_margin = 0.0;           // -max|Phi(1) - 1|
    double strictly_positive_margin = 0.0; // min eigenvalue of Phi(1)
    double purity_margin = 0.0;            // second Choi eigenvalue (0 for rank 1)
};

// Throws NotSubunital when Phi*(1) exceeds 1 beyond eff_tol.
MapClassification classify_map(const CPMap& map, const Tolerances& tol);

// Clamp a near-effect's eigenvalues into [0,1]; beyond eff_tol throws NotSubunital.
CMat clamp_to_effect(const CMat& e, const Tolerances& tol);

} // namespace qoptk
