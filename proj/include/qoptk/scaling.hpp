// scaling.hpp — the rank non-decreasing decision engine: DS functional,
// alternating operator scaling, counterexample search, and the certified
// three-way decision.

#pragma once

#include <cstdint>
#include <optional>

#include "qoptk/qmaps.hpp"

namespace qoptk {

// tr[(Phi_{C1,C2}(1) - 1)^2] + tr[(Phi_{C1,C2}*(1) - 1)^2]
// with Phi_{C1,C2}(.) = C1 Phi(C2 . C2†) C1†.
double ds_value(const CPMap& map, const CMat& c1, const CMat& c2);

struct ScalingReport {
    CMat c1;
    CMat c2;
    double ds_value = 0.0;
    int iterations = 0;
    bool converged = false;
    bool singular_normalizer = false; // normalizer hit the eigenvalue floor
};

// Alternating normalisation: C1 <- Phi_cur(1)^{-1/2} C1, then
// C2 <- C2 Phi_cur*(1)^{-1/2}, until ds <= eps^2 or max_iter. A singular
// normalizer (eigenvalue below 1e-14) ends the run as non-converged.
ScalingReport sinkhorn_scale(const CPMap& map, double eps, int max_iter);

struct RankCounterexample {
    CMat state;
    int rank_in = 0;
    int rank_out = 0;
    bool on_dual = false; // counterexample found on the dual map (Lemma-equivalent)
};

// Structured candidates (coordinate-subset mixtures, eigenspace subsets of
// Phi*(1) and Phi(1)) plus seeded Haar-random rank-r states.
std::optional<RankCounterexample> rank_drop_search(const CPMap& map, int samples_per_rank,
                                                   std::uint64_t seed, const Tolerances& tol);

enum class Verdict3 { Yes, No, Inconclusive };
const char* to_string(Verdict3 v);

struct ScalingConfig {
    Tolerances tol;
    int max_iter = 10000;
    int samples_per_rank = 40;
    std::uint64_t seed = 20240901;
};

struct RankDecision {
    Verdict3 verdict = Verdict3::Inconclusive;
    std::optional<ScalingReport> witness;            // present on Yes
    std::optional<RankCounterexample> counterexample; // present on No
};

// Counterexample search on the map and its dual first (exact No); otherwise
// scaling (Yes on convergence); otherwise Inconclusive with both artifacts.
RankDecision decide_rank_nondecreasing(const CPMap& map, const ScalingConfig& cfg);

// Decision for tensor(map, id_anc); consistency probe for complete rank
// non-decrease.
RankDecision check_extension_rank_nondec(const CPMap& map, int anc_dim, const ScalingConfig& cfg);

} // namespace qoptk
