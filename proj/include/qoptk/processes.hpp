// processes.hpp — measurement processes (apparatus, preparation, interaction,
// pointer): evaluation, induced instruments, conjugate channels, class
// validation, and the explicit dilation constructions.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qoptk/measurements.hpp"
#include "qoptk/scaling.hpp"

namespace qoptk {

struct MeasurementProcess {
    int sys_dim = 0;
    int app_dim = 0;
    CMat xi;            // apparatus state
    CPMap interaction;  // trace-preserving, acting on sys ⊗ app
    std::vector<std::pair<std::string, CMat>> pointer; // labelled apparatus effects

    bool pointer_complete(double tol) const; // effects sum to the apparatus unit
};

void validate_process(const MeasurementProcess& p, const Tolerances& tol);

// tr_A[(1 ⊗ Z_x) E(rho ⊗ xi)] for the named outcome.
CMat evaluate_process(const MeasurementProcess& p, const std::string& outcome, const CMat& rho);

// The operation induced by an arbitrary apparatus effect z (Kraus form).
CPMap induced_operation(const MeasurementProcess& p, const CMat& z, const Tolerances& tol);

// Requires a complete pointer; the per-outcome operations sum to a channel.
Instrument induced_instrument(const MeasurementProcess& p, const Tolerances& tol);

// Lambda(rho) = tr_S[E(rho ⊗ xi)], system -> apparatus.
CPMap conjugate_channel(const MeasurementProcess& p, const Tolerances& tol);

// Gamma_xi(.) = tr_A[(1 ⊗ xi) .], sys ⊗ app -> sys (unital CP).
CPMap restriction_map(const MeasurementProcess& p, const Tolerances& tol);

struct ProcessClassReport {
    bool xi_strictly_positive = false;
    double xi_min_eig = 0.0;
    MapClassification interaction_class;
    RankDecision interaction_rank;
    Tier tier_I = Tier::Unknown;
    Tier tier_II = Tier::Unknown;
    Tier tier_III = Tier::Unknown;

    bool admits(int tier) const {
        const Tier t = tier == 1 ? tier_I : (tier == 2 ? tier_II : tier_III);
        return t == Tier::InClass;
    }
};

ProcessClassReport validate_process_class(const MeasurementProcess& p, const ScalingConfig& cfg);

// E(A ⊗ B) = sum_x I_x(A) ⊗ tr[B] |x><x|, xi = 1/N, Z_x = |x><x|; requires
// every operation strictly positive. Round-trips the instrument exactly.
MeasurementProcess dilate_weak_third(const Instrument& inst, const Tolerances& tol);

// Same construction, preconditioned on certified rank non-decreasing
// operations with indefinite effects; the composite interaction is re-verified
// by the scaling engine.
MeasurementProcess dilate_strong_third(const Instrument& inst, const ScalingConfig& cfg);

// Unitary-swap process implementing tr[E .] xi; xi must be strictly positive.
MeasurementProcess swap_process(const CMat& e, const CMat& xi, const Tolerances& tol);

// Control-register assembly of the convex combination; pointers must carry the
// same labels.
MeasurementProcess convex_combine_processes(const MeasurementProcess& p1,
                                            const MeasurementProcess& p2, double lambda);

// Sequential assembly; both pointers must be single effects.
MeasurementProcess compose_processes(const MeasurementProcess& p1,
                                     const MeasurementProcess& p2);

// Replaces a pure preparation by its epsilon-mixture with a strictly positive
// Omega; returns the perturbed process and its induced operation. Requires a
// unitary interaction and a pure xi. choi_distance (optional) receives
// ||J(Phi) - J(Phi_1)||_1, guaranteed <= 2 eps d.
std::pair<MeasurementProcess, CPMap> interior_approximation(const MeasurementProcess& p,
                                                            double eps, const CMat& omega,
                                                            const Tolerances& tol,
                                                            double* choi_distance = nullptr);

// The unitary swap on C^d ⊗ C^d as a matrix.
CMat swap_matrix(int d);

// Trace norm (sum of singular values) of a Hermitian matrix.
double trace_norm_hermitian(const CMat& h);

} // namespace qoptk
