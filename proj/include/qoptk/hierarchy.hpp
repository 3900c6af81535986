// hierarchy.hpp — places effects, operations and channels in the three-tier
// consistency hierarchy, with a certificate attached to every verdict.

#pragma once

#include <optional>
#include <string>

#include "qoptk/fixedpoints.hpp"
#include "qoptk/scaling.hpp"

namespace qoptk {

struct EffectClass {
    bool trivial = false;         // E = c 1
    bool norm_one = false;        // ||E|| = 1
    bool indefinite = false;      // spectrum inside (0, 1) strictly
    bool projection = false;      // E^2 = E
    bool strictly_positive = false;
    std::optional<CMat> eig1_projection; // present when norm_one
    double min_eig = 0.0;
    double max_eig = 0.0;
};

EffectClass classify_effect(const CMat& e, const Tolerances& tol);

// App.-A fixed-point criterion for operations: shrinks the eigenvalue-1
// eigenspace of E to its largest Phi-invariant subprojection.
std::pair<bool, std::optional<CMat>> operation_fixed_point_exists(const CPMap& op,
                                                                  const Tolerances& tol);

enum class Tier { InClass, NotInClass, Unknown };
const char* to_string(Tier t);

struct ClassIIIWitness {
    std::string kind; // "bistochastic" | "choi-positive" | "swap"
    double choi_min_eig = 0.0;
    std::optional<CMat> swap_effect; // for kind "swap": Phi = tr[E .] xi
    std::optional<CMat> swap_xi;
};

struct HierarchyVerdict {
    Tier class_I = Tier::Unknown;
    Tier class_II = Tier::Unknown;
    Tier class_III = Tier::Unknown;

    MapClassification classification;
    EffectClass effect_class;
    RankDecision rank_decision;
    std::optional<ClassIIIWitness> witness_iii;
    std::optional<CMat> fixed_state; // strictly positive fixed state when found
    bool has_fixed_point = false;    // operations: App.-A invariant subspace found
    std::optional<CMat> fixed_point_projection;
    std::string notes; // failed/passed necessary conditions behind Unknown verdicts
};

HierarchyVerdict channel_hierarchy(const CPMap& ch, const ScalingConfig& cfg);

// Square operations (subunital dual); trace-preserving inputs delegate to
// channel_hierarchy.
HierarchyVerdict operation_hierarchy(const CPMap& op, const ScalingConfig& cfg);

// Consistency auditor for class-II operations with a non-trivial norm-1
// effect: every basis state on the eigenvalue-1 block must gain rank.
bool lemma1_rank_increase_check(const CPMap& op, const Tolerances& tol);

} // namespace qoptk
