// measurements.hpp — observables and instruments: taxonomy, compatibility,
// the four non-disturbance grades, and the no-go cross-audit.

#pragma once

#include <string>
#include <vector>

#include "qoptk/hierarchy.hpp"

namespace qoptk {

struct Observable {
    std::vector<std::string> labels;
    std::vector<CMat> effects;

    int dim() const { return effects.empty() ? 0 : effects.front().rows(); }
    int outcomes() const { return int(effects.size()); }
};

struct Instrument {
    std::vector<std::string> labels;
    std::vector<CPMap> operations;

    int dim() const { return operations.empty() ? 0 : operations.front().dim_in; }
    int outcomes() const { return int(operations.size()); }
};

// Effects must be nonzero and sum to the identity within eff_tol.
void validate_observable(const Observable& obs, const Tolerances& tol);
// Operations must sum to a channel within trace_tol, with nonzero effects.
void validate_instrument(const Instrument& inst, const Tolerances& tol);

// The non-selective channel sum_x I_x.
CPMap total_channel(const Instrument& inst);

struct ObservableClass {
    bool commutative = false;
    bool sharp = false;
    bool norm_one = false;
    bool indefinite = false;
    bool trivial = false;
};

ObservableClass classify_observable(const Observable& obs, const Tolerances& tol);

// E_x = I_x*(1), clamped per the effect contract.
Observable compatible_observable(const Instrument& inst, const Tolerances& tol);

struct PropertyResult {
    bool holds = false;
    std::vector<double> residuals; // max operator-norm deviation per outcome
    std::string reason;            // set when a precondition decides the answer
};

// I_x*(E_y) = delta_xy E_x for all x,y (norm-1 observables only).
PropertyResult is_repeatable(const Instrument& inst, const Tolerances& tol);
// I_X*(E_x) = E_x for all x.
PropertyResult is_first_kind(const Instrument& inst, const Tolerances& tol);
// P_x I_X*(E_x) P_x = P_x on each eigenvalue-1 block (norm-1 only).
PropertyResult is_value_reproducible(const Instrument& inst, const Tolerances& tol);
// I_x acts as the identity on the eigenvalue-1 block of E_x (norm-1 only).
PropertyResult is_ideal(const Instrument& inst, const Tolerances& tol);

struct DisturbanceReport {
    PropertyResult repeatable;
    PropertyResult first_kind;
    PropertyResult value_reproducible;
    PropertyResult ideal;
    std::vector<std::string> nogo_conflicts;
};

DisturbanceReport disturbance_report(const Instrument& inst, const Tolerances& tol);

// Instrument-level tier certificate assembled from per-operation verdicts and
// the total-channel verdict.
struct InstrumentTiers {
    Tier class_I = Tier::Unknown;
    Tier class_II = Tier::Unknown;
    Tier class_III = Tier::Unknown;
};

InstrumentTiers instrument_tiers(const Instrument& inst,
                                 const std::vector<HierarchyVerdict>& op_verdicts,
                                 const HierarchyVerdict& channel_verdict,
                                 const Tolerances& tol);

// Cross-checks the no-go theorems against measured disturbance properties.
// Empty result = consistent; any entry names the violated clause and signals a
// numerical or pipeline bug.
std::vector<std::string> nogo_audit(const Instrument& inst,
                                    const std::vector<HierarchyVerdict>& op_verdicts,
                                    const HierarchyVerdict& channel_verdict,
                                    const DisturbanceReport& report, const Tolerances& tol);

// Conserved-quantity audit: if the process interaction conserves
// H = H_S ⊗ 1 + 1 ⊗ H_A, is bistochastic with xi > 0, and the induced
// instrument is first-kind, every effect must commute with H_S.
// Returns violated-commutator magnitudes per outcome (empty = consistent or
// predicate vacuous).
std::vector<std::string> conserved_quantity_audit(const CPMap& interaction, const CMat& h_sys,
                                                  const CMat& h_app, const CMat& xi,
                                                  const Observable& obs, bool first_kind,
                                                  const Tolerances& tol);

} // namespace qoptk
