#include "qoptk/hierarchy.hpp"

#include <algorithm>
#include <cmath>

namespace qoptk {

const char* to_string(Tier t) {
    switch (t) {
        case Tier::InClass: return "InClass";
        case Tier::NotInClass: return "NotInClass";
        default: return "Unknown";
    }
}

EffectClass classify_effect(const CMat& e, const Tolerances& tol) {
    EffectClass c;
    EigResult eg = eigh(e, tol.herm_tol);
    const int d = e.rows();
    c.min_eig = eg.w.front();
    c.max_eig = eg.w.back();
    if (c.min_eig < -tol.eff_tol || c.max_eig > 1.0 + tol.eff_tol)
        throw NotSubunital("classify_effect: spectrum outside [0,1]");

    c.trivial = (c.max_eig - c.min_eig) <= tol.eff_tol;
    c.norm_one = std::abs(c.max_eig - 1.0) <= tol.eff_tol;
    c.strictly_positive = c.min_eig > tol.rank_tol * std::max(1.0, c.max_eig);
    c.indefinite = c.min_eig > tol.eff_tol && c.max_eig < 1.0 - tol.eff_tol;
    c.projection = true;
    for (double w : eg.w)
        if (std::min(std::abs(w), std::abs(w - 1.0)) > tol.proj_tol) c.projection = false;

    if (c.norm_one) {
        CMat p(d, d);
        for (int i = 0; i < d; ++i) {
            if (eg.w[i] < 1.0 - tol.proj_tol) continue;
            CMat v(d, 1);
            for (int k = 0; k < d; ++k) v(k, 0) = eg.V(k, i);
            kernels::active().rank1_acc(p.data(), cxd(1.0, 0.0), v.data(), v.data(), d, d);
        }
        c.eig1_projection = std::move(p);
    }
    return c;
}

namespace {

// Projector from eigenvectors of h with eigenvalue above 0.5 (projection cleanup).
CMat reproject(const CMat& h) {
    EigResult e = eigh(h, 1e-6);
    const int d = h.rows();
    CMat p(d, d);
    for (int i = 0; i < d; ++i) {
        if (e.w[i] < 0.5) continue;
        CMat v(d, 1);
        for (int k = 0; k < d; ++k) v(k, 0) = e.V(k, i);
        kernels::active().rank1_acc(p.data(), cxd(1.0, 0.0), v.data(), v.data(), d, d);
    }
    return p;
}

int proj_rank(const CMat& p) { return int(std::lround(p.trace().real())); }

} // namespace

std::pair<bool, std::optional<CMat>> operation_fixed_point_exists(const CPMap& op,
                                                                  const Tolerances& tol) {
    if (!op.is_square()) throw DimMismatch("operation_fixed_point_exists: map must be square");
    const int d = op.dim_in;
    CMat e = clamp_to_effect(kraus_sum(op), tol);
    EffectClass ec = classify_effect(e, tol);
    if (!ec.norm_one) return {false, std::nullopt}; // ||E|| < 1 kills all fixed points

    CPMap du = dual(op);
    CMat q = *ec.eig1_projection;
    for (int pass = 0; pass <= d; ++pass) {
        if (proj_rank(q) == 0) return {false, std::nullopt};
        // Directions of Q that leak outside Q under one application.
        CMat complement = CMat::identity(d) - q;
        CMat leak = q * apply(du, complement) * q;
        EigResult le = eigh(leak, 1e-6);
        const double wmax = le.w.empty() ? 0.0 : std::max(0.0, le.w.back());
        const double thresh = std::max(tol.fixed_tol, tol.rank_tol * std::max(1.0, wmax));
        CMat r(d, d);
        int leak_rank = 0;
        for (int i = 0; i < d; ++i) {
            if (le.w[i] <= thresh) continue;
            CMat v(d, 1);
            for (int k = 0; k < d; ++k) v(k, 0) = le.V(k, i);
            kernels::active().rank1_acc(r.data(), cxd(1.0, 0.0), v.data(), v.data(), d, d);
            ++leak_rank;
        }
        if (leak_rank == 0) return {true, q};
        q = reproject(q - r);
    }
    return {false, std::nullopt};
}

namespace {

double choi_min_eigenvalue(const CPMap& map, const Tolerances& tol) {
    EigResult e = eigh(choi(map), tol.herm_tol);
    return e.w.empty() ? 0.0 : e.w.front();
}

bool choi_strictly_positive(const CPMap& map, const Tolerances& tol, double* min_eig) {
    EigResult e = eigh(choi(map), tol.herm_tol);
    *min_eig = e.w.front();
    return e.w.front() > tol.rank_tol * std::max(1.0, e.w.back());
}

// Detect the constant-output form Phi(.) = tr[E .] sigma. Returns sigma when
// every basis image is proportional to a common positive operator.
std::optional<CMat> constant_output_state(const CPMap& map, const Tolerances& tol) {
    const int d = map.dim_in;
    CMat sigma = apply(map, CMat::identity(d));
    const double tr = sigma.trace().real();
    if (tr <= tol.trace_tol) return std::nullopt;
    sigma *= cxd(1.0 / tr, 0.0);

    const CMat e = kraus_sum(map);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            CMat basis = ketbra(basis_ket(d, i), basis_ket(d, j));
            CMat out = apply(map, basis);
            CMat expected = sigma;
            expected *= e(j, i); // tr[E |i><j|] = E_{ji}
            if (max_abs_diff(out, expected) > 1e-9 * std::max(1.0, out.max_abs()))
                return std::nullopt;
        }
    return sigma;
}

Tier rank_verdict_to_tier(Verdict3 v) {
    switch (v) {
        case Verdict3::Yes: return Tier::InClass;
        case Verdict3::No: return Tier::NotInClass;
        default: return Tier::Unknown;
    }
}

void enforce_chain(HierarchyVerdict& v) {
    auto violates = [](Tier lower, Tier higher) {
        return higher == Tier::InClass && lower == Tier::NotInClass;
    };
    if (violates(v.class_I, v.class_II) || violates(v.class_II, v.class_III) ||
        violates(v.class_I, v.class_III))
        throw Error("hierarchy verdict violates the inclusion chain");
    // Membership propagates up the chain: tier III ⊂ tier II ⊂ tier I.
    if (v.class_III == Tier::InClass) v.class_II = Tier::InClass;
    if (v.class_II == Tier::InClass) v.class_I = Tier::InClass;
}

} // namespace

HierarchyVerdict channel_hierarchy(const CPMap& ch, const ScalingConfig& cfg) {
    if (!ch.is_square()) throw DimMismatch("channel_hierarchy: map must be square");
    if (!is_trace_preserving(ch, cfg.tol.trace_tol))
        throw NotTracePreserving("channel_hierarchy requires a channel");
    const Tolerances& tol = cfg.tol;

    HierarchyVerdict v;
    v.classification = classify_map(ch, tol);
    v.effect_class = classify_effect(v.classification.compatible_effect, tol);

    v.class_I = v.classification.strictly_positive ? Tier::InClass : Tier::NotInClass;

    v.rank_decision = decide_rank_nondecreasing(ch, cfg);
    v.class_II = rank_verdict_to_tier(v.rank_decision.verdict);
    if (v.class_I == Tier::NotInClass) v.class_II = Tier::NotInClass; // tier II ⊂ tier I

    double choi_min = 0.0;
    if (v.classification.bistochastic) {
        v.class_III = Tier::InClass;
        v.witness_iii = ClassIIIWitness{"bistochastic", 0.0, std::nullopt, std::nullopt};
        CMat mixed = CMat::identity(ch.dim_in);
        mixed *= cxd(1.0 / ch.dim_in, 0.0);
        v.fixed_state = mixed;
    } else if (choi_strictly_positive(ch, tol, &choi_min)) {
        v.class_III = Tier::InClass;
        v.witness_iii = ClassIIIWitness{"choi-positive", choi_min, std::nullopt, std::nullopt};
    } else if (auto sigma = constant_output_state(ch, tol);
               sigma && is_strictly_positive_op(*sigma, tol)) {
        v.class_III = Tier::InClass;
        v.witness_iii =
            ClassIIIWitness{"swap", 0.0, clamp_to_effect(kraus_sum(ch), tol), *sigma};
    } else if (v.class_II == Tier::NotInClass) {
        v.class_III = Tier::NotInClass;
        v.notes = "not rank non-decreasing";
    } else {
        CMat support = minimal_support_projection(ch, tol);
        if (proj_rank(support) < ch.dim_in) {
            v.class_III = Tier::NotInClass;
            v.notes = "no strictly positive fixed state (minimal support rank " +
                      std::to_string(proj_rank(support)) + " < " + std::to_string(ch.dim_in) +
                      ")";
        } else {
            v.class_III = Tier::Unknown;
            std::string diag;
            if (auto rho = strictly_positive_fixed_state(ch, nullptr, tol, cfg.seed, &diag)) {
                v.fixed_state = *rho;
                v.notes = "strictly positive fixed state exists (necessary condition only)";
            } else {
                v.notes = "fixed-state construction inconclusive: " + diag;
            }
        }
    }

    enforce_chain(v);
    return v;
}

HierarchyVerdict operation_hierarchy(const CPMap& op, const ScalingConfig& cfg) {
    if (!op.is_square()) throw DimMismatch("operation_hierarchy: map must be square");
    const Tolerances& tol = cfg.tol;
    if (!is_operation(op, tol.psd_tol))
        throw NotSubunital("operation_hierarchy: sum K†K exceeds the identity");
    if (is_trace_preserving(op, tol.trace_tol)) return channel_hierarchy(op, cfg);

    HierarchyVerdict v;
    v.classification = classify_map(op, tol);
    v.effect_class = classify_effect(v.classification.compatible_effect, tol);

    v.class_I = v.classification.strictly_positive ? Tier::InClass : Tier::NotInClass;

    v.rank_decision = decide_rank_nondecreasing(op, cfg);
    auto [has_fp, fp_proj] = operation_fixed_point_exists(op, tol);
    v.has_fixed_point = has_fp;
    v.fixed_point_projection = fp_proj;

    if (has_fp) {
        // In tier II only channels keep fixed points, and E != 1 here.
        v.class_II = Tier::NotInClass;
        v.notes = "non-vanishing fixed point with E != 1";
    } else if (v.class_I == Tier::NotInClass) {
        v.class_II = Tier::NotInClass;
    } else if (v.rank_decision.verdict == Verdict3::Yes && v.effect_class.indefinite) {
        v.class_II = Tier::InClass;
    } else {
        v.class_II = Tier::Unknown;
        v.notes = "rank decision " + std::string(to_string(v.rank_decision.verdict)) +
                  ", effect " + (v.effect_class.indefinite ? "indefinite" : "not indefinite");
    }

    double choi_min = 0.0;
    if (v.classification.purity_preserving && !v.effect_class.trivial) {
        v.class_III = Tier::NotInClass;
        v.notes += (v.notes.empty() ? "" : "; ");
        v.notes += "purity-preserving with a non-trivial effect";
    } else if (v.class_II == Tier::NotInClass) {
        v.class_III = Tier::NotInClass;
    } else if (auto sigma = constant_output_state(op, tol);
               sigma && is_strictly_positive_op(*sigma, tol)) {
        v.class_III = Tier::InClass;
        v.witness_iii =
            ClassIIIWitness{"swap", 0.0, v.classification.compatible_effect, *sigma};
    } else if (choi_strictly_positive(op, tol, &choi_min)) {
        v.class_III = Tier::InClass;
        v.witness_iii = ClassIIIWitness{"choi-positive", choi_min, std::nullopt, std::nullopt};
    } else {
        v.class_III = Tier::Unknown;
    }

    enforce_chain(v);
    return v;
}

bool lemma1_rank_increase_check(const CPMap& op, const Tolerances& tol) {
    if (!op.is_square()) throw DimMismatch("lemma1_rank_increase_check: map must be square");
    CMat e = clamp_to_effect(kraus_sum(op), tol);
    EffectClass ec = classify_effect(e, tol);
    if (!ec.norm_one || ec.trivial)
        throw PreconditionUnmet("lemma1_rank_increase_check needs a non-trivial norm-1 effect");

    const CMat& p = *ec.eig1_projection;
    EigResult pe = eigh(p, 1e-6);
    const int d = op.dim_in;
    std::vector<CMat> block;
    for (int i = 0; i < d; ++i) {
        if (pe.w[i] < 0.5) continue;
        CMat v(d, 1);
        for (int k = 0; k < d; ++k) v(k, 0) = pe.V(k, i);
        block.push_back(std::move(v));
    }
    const int k = int(block.size());

    std::vector<CMat> states;
    {
        CMat full = p;
        full *= cxd(1.0 / k, 0.0);
        states.push_back(std::move(full));
    }
    for (int i = 0; i < k; ++i) states.push_back(projector(block[i]));
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            CMat s = block[i] + block[j];
            states.push_back(projector(s));
            CMat t = block[i];
            CMat ij = block[j];
            ij *= cxd(0.0, 1.0);
            t += ij;
            states.push_back(projector(t));
        }

    for (const CMat& rho : states) {
        const int rin = psd_rank(rho, tol);
        const int rout = psd_rank(apply(op, rho), tol);
        if (rout <= rin) return false;
    }
    return true;
}

} // namespace qoptk
