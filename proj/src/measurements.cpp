#include "qoptk/measurements.hpp"

#include <algorithm>
#include <cmath>

namespace qoptk {

void validate_observable(const Observable& obs, const Tolerances& tol) {
    if (obs.effects.empty()) throw DimMismatch("observable has no effects");
    if (obs.labels.size() != obs.effects.size())
        throw DimMismatch("observable labels/effects length mismatch");
    const int d = obs.dim();
    CMat sum(d, d);
    for (const CMat& e : obs.effects) {
        if (e.rows() != d || e.cols() != d) throw DimMismatch("observable effect size");
        (void)clamp_to_effect(e, tol);
        if (e.max_abs() <= tol.eff_tol)
            throw PreconditionUnmet("observable contains a vanishing effect");
        sum += e;
    }
    if (max_abs_diff(sum, CMat::identity(d)) > tol.eff_tol * 10.0)
        throw NotNormalized("observable effects do not sum to the identity");
}

void validate_instrument(const Instrument& inst, const Tolerances& tol) {
    if (inst.operations.empty()) throw DimMismatch("instrument has no operations");
    if (inst.labels.size() != inst.operations.size())
        throw DimMismatch("instrument labels/operations length mismatch");
    const int d = inst.dim();
    for (const CPMap& op : inst.operations) {
        if (op.dim_in != d || op.dim_out != d)
            throw DimMismatch("instrument operations must act in a common space");
        if (!is_operation(op, tol.psd_tol))
            throw NotSubunital("instrument operation is not trace non-increasing");
        if (kraus_sum(op).max_abs() <= tol.eff_tol)
            throw PreconditionUnmet("instrument operation has a vanishing effect");
    }
    if (!is_trace_preserving(total_channel(inst), tol.trace_tol * 10.0))
        throw NotNormalized("instrument operations do not sum to a channel");
}

CPMap total_channel(const Instrument& inst) {
    CPMap total;
    total.dim_in = inst.dim();
    total.dim_out = inst.dim();
    for (const CPMap& op : inst.operations)
        for (const CMat& k : op.kraus) total.kraus.push_back(k);
    return total;
}

ObservableClass classify_observable(const Observable& obs, const Tolerances& tol) {
    ObservableClass c;
    const int n = obs.outcomes();

    c.commutative = true;
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            CMat comm = obs.effects[x] * obs.effects[y] - obs.effects[y] * obs.effects[x];
            if (comm.max_abs() > tol.eff_tol * 10.0) c.commutative = false;
        }

    c.sharp = true;
    for (int x = 0; x < n && c.sharp; ++x)
        for (int y = 0; y < n && c.sharp; ++y) {
            CMat prod = obs.effects[x] * obs.effects[y];
            CMat expected = (x == y) ? obs.effects[x] : CMat::zero(obs.dim(), obs.dim());
            if (max_abs_diff(prod, expected) > tol.proj_tol * 10.0) c.sharp = false;
        }

    c.norm_one = true;
    c.indefinite = true;
    bool all_trivial = true;
    for (const CMat& e : obs.effects) {
        EffectClass ec = classify_effect(e, tol);
        if (!ec.norm_one) c.norm_one = false;
        if (!ec.indefinite) c.indefinite = false;
        if (!ec.trivial) all_trivial = false;
    }
    c.trivial = (n == 1) || all_trivial;
    return c;
}

Observable compatible_observable(const Instrument& inst, const Tolerances& tol) {
    Observable obs;
    obs.labels = inst.labels;
    for (const CPMap& op : inst.operations)
        obs.effects.push_back(clamp_to_effect(kraus_sum(op), tol));
    return obs;
}

namespace {

// Property tolerance: operator-norm deviations up to prop_tol pass.
constexpr double kPropScale = 100.0; // applied to tol.fixed_tol

double op_norm(const CMat& h) {
    EigResult e = eigh(h, 1.0);
    double m = 0.0;
    for (double w : e.w) m = std::max(m, std::abs(w));
    return m;
}

} // namespace

PropertyResult is_repeatable(const Instrument& inst, const Tolerances& tol) {
    PropertyResult r;
    Observable obs = compatible_observable(inst, tol);
    ObservableClass oc = classify_observable(obs, tol);
    if (!oc.norm_one) {
        r.holds = false;
        r.reason = "NotNormOne";
        return r;
    }
    const double pass = tol.fixed_tol * kPropScale;
    r.holds = true;
    const int n = inst.outcomes();
    for (int x = 0; x < n; ++x) {
        double worst = 0.0;
        CPMap du = dual(inst.operations[x]);
        for (int y = 0; y < n; ++y) {
            CMat got = apply(du, obs.effects[y]);
            CMat expected = (x == y) ? obs.effects[x] : CMat::zero(obs.dim(), obs.dim());
            worst = std::max(worst, op_norm(got - expected));
        }
        r.residuals.push_back(worst);
        if (worst > pass) r.holds = false;
    }
    return r;
}

PropertyResult is_first_kind(const Instrument& inst, const Tolerances& tol) {
    PropertyResult r;
    Observable obs = compatible_observable(inst, tol);
    CPMap du = dual(total_channel(inst));
    const double pass = tol.fixed_tol * kPropScale;
    r.holds = true;
    for (int x = 0; x < inst.outcomes(); ++x) {
        const double dev = op_norm(apply(du, obs.effects[x]) - obs.effects[x]);
        r.residuals.push_back(dev);
        if (dev > pass) r.holds = false;
    }
    return r;
}

PropertyResult is_value_reproducible(const Instrument& inst, const Tolerances& tol) {
    PropertyResult r;
    Observable obs = compatible_observable(inst, tol);
    ObservableClass oc = classify_observable(obs, tol);
    if (!oc.norm_one) {
        r.holds = false;
        r.reason = "NotNormOne";
        return r;
    }
    CPMap du = dual(total_channel(inst));
    const double pass = tol.fixed_tol * kPropScale;
    r.holds = true;
    for (int x = 0; x < inst.outcomes(); ++x) {
        EffectClass ec = classify_effect(obs.effects[x], tol);
        if (!ec.eig1_projection) {
            r.residuals.push_back(1.0);
            r.holds = false;
            r.reason = "eigenvalue-1 eigenspace empty despite norm-1 within tolerance";
            continue;
        }
        const CMat& p = *ec.eig1_projection;
        CMat lhs = p * apply(du, obs.effects[x]) * p;
        const double dev = op_norm(lhs - p);
        r.residuals.push_back(dev);
        if (dev > pass) r.holds = false;
    }
    return r;
}

PropertyResult is_ideal(const Instrument& inst, const Tolerances& tol) {
    PropertyResult r;
    Observable obs = compatible_observable(inst, tol);
    ObservableClass oc = classify_observable(obs, tol);
    if (!oc.norm_one) {
        r.holds = false;
        r.reason = "NotNormOne";
        return r;
    }
    const double pass = tol.fixed_tol * kPropScale;
    const int d = inst.dim();
    r.holds = true;
    for (int x = 0; x < inst.outcomes(); ++x) {
        EffectClass ec = classify_effect(obs.effects[x], tol);
        const CMat& p = *ec.eig1_projection;
        // Operator basis of the block: I_x(P A P) must equal P A P.
        EigResult pe = eigh(p, 1e-6);
        std::vector<CMat> block;
        for (int i = 0; i < d; ++i)
            if (pe.w[i] >= 0.5) {
                CMat v(d, 1);
                for (int k = 0; k < d; ++k) v(k, 0) = pe.V(k, i);
                block.push_back(std::move(v));
            }
        double worst = 0.0;
        for (std::size_t i = 0; i < block.size(); ++i)
            for (std::size_t j = 0; j < block.size(); ++j) {
                CMat a = ketbra(block[i], block[j]);
                worst = std::max(worst, op_norm(apply(inst.operations[x], a) - a));
            }
        r.residuals.push_back(worst);
        if (worst > pass) r.holds = false;
    }
    return r;
}

DisturbanceReport disturbance_report(const Instrument& inst, const Tolerances& tol) {
    DisturbanceReport rep;
    rep.repeatable = is_repeatable(inst, tol);
    rep.first_kind = is_first_kind(inst, tol);
    rep.value_reproducible = is_value_reproducible(inst, tol);
    rep.ideal = is_ideal(inst, tol);
    return rep;
}

InstrumentTiers instrument_tiers(const Instrument& inst,
                                 const std::vector<HierarchyVerdict>& op_verdicts,
                                 const HierarchyVerdict& channel_verdict,
                                 const Tolerances& tol) {
    (void)tol;
    if (op_verdicts.size() != inst.operations.size())
        throw DimMismatch("instrument_tiers: verdict count != operation count");
    InstrumentTiers t;

    // A single-outcome instrument is its channel.
    if (inst.operations.size() == 1) {
        t.class_I = channel_verdict.class_I;
        t.class_II = channel_verdict.class_II;
        t.class_III = channel_verdict.class_III;
        return t;
    }

    // Tier I is an exact iff: every operation strictly positive.
    bool all_i = true, any_not_i = false;
    for (const auto& v : op_verdicts) {
        if (v.class_I != Tier::InClass) all_i = false;
        if (v.class_I == Tier::NotInClass) any_not_i = true;
    }
    t.class_I = all_i ? Tier::InClass : (any_not_i ? Tier::NotInClass : Tier::Unknown);

    // Tier II: sufficient when every operation is rank non-decreasing with an
    // indefinite effect (the pointer dilation is then rank non-decreasing).
    // A per-operation tier-II verdict reached some other way (say, through a
    // class-III witness of that operation alone) does not assemble into one
    // process for the whole instrument. Necessary that the total channel is
    // rank non-decreasing.
    bool all_ii = true, any_not_ii = false;
    for (const auto& v : op_verdicts) {
        if (!(v.rank_decision.verdict == Verdict3::Yes && v.effect_class.indefinite))
            all_ii = false;
        if (v.class_II == Tier::NotInClass) any_not_ii = true;
    }
    if (all_ii)
        t.class_II = Tier::InClass;
    else if (any_not_ii || channel_verdict.class_II == Tier::NotInClass ||
             t.class_I == Tier::NotInClass)
        t.class_II = Tier::NotInClass;
    else
        t.class_II = Tier::Unknown;

    // Tier III: necessary conditions only (channel membership and per-operation
    // membership); InClass requires a constructive witness which per-operation
    // verdicts cannot supply, except for the all-swap measuring process.
    bool any_not_iii = false;
    for (const auto& v : op_verdicts)
        if (v.class_III == Tier::NotInClass) any_not_iii = true;
    if (channel_verdict.class_III == Tier::NotInClass || any_not_iii ||
        t.class_II == Tier::NotInClass) {
        t.class_III = Tier::NotInClass;
    } else {
        // The trivial swap-built measuring process realises the instrument only
        // when every operation prepares the same strictly positive state.
        bool all_swap = !op_verdicts.empty();
        const CMat* common_xi = nullptr;
        for (const auto& v : op_verdicts) {
            if (!(v.witness_iii && v.witness_iii->kind == "swap" && v.witness_iii->swap_xi)) {
                all_swap = false;
                break;
            }
            if (common_xi == nullptr) {
                common_xi = &*v.witness_iii->swap_xi;
            } else if (max_abs_diff(*common_xi, *v.witness_iii->swap_xi) > 1e-8) {
                all_swap = false;
                break;
            }
        }
        t.class_III = all_swap ? Tier::InClass : Tier::Unknown;
    }
    // Membership propagates up the chain.
    if (t.class_III == Tier::InClass) t.class_II = Tier::InClass;
    if (t.class_II == Tier::InClass) t.class_I = Tier::InClass;
    return t;
}

std::vector<std::string> nogo_audit(const Instrument& inst,
                                    const std::vector<HierarchyVerdict>& op_verdicts,
                                    const HierarchyVerdict& channel_verdict,
                                    const DisturbanceReport& report, const Tolerances& tol) {
    std::vector<std::string> conflicts;
    Observable obs = compatible_observable(inst, tol);
    ObservableClass oc = classify_observable(obs, tol);
    if (oc.trivial) return conflicts; // the theorems speak about non-trivial observables

    InstrumentTiers tiers = instrument_tiers(inst, op_verdicts, channel_verdict, tol);

    if (tiers.class_I == Tier::InClass && report.repeatable.holds)
        conflicts.push_back("no-repeatable-in-class-I: class-I instrument is repeatable");
    if (tiers.class_I == Tier::InClass && oc.sharp &&
        (report.first_kind.holds || report.value_reproducible.holds || report.ideal.holds))
        conflicts.push_back(
            "no-sharp-nondisturbance-in-class-I: class-I instrument of a sharp observable is first-kind, "
            "value-reproducible, or ideal");
    if (tiers.class_II == Tier::InClass && report.ideal.holds)
        conflicts.push_back("no-ideal-in-class-II: class-II instrument is ideal");
    if (tiers.class_II == Tier::InClass && report.value_reproducible.holds)
        conflicts.push_back("no-value-reproducible-in-class-II: class-II instrument is value reproducible");
    if (tiers.class_II == Tier::InClass && report.first_kind.holds && !oc.indefinite)
        conflicts.push_back(
            "first-kind-needs-indefinite-in-class-II: class-II first-kind instrument of a non-indefinite observable");
    if (tiers.class_III == Tier::InClass && report.first_kind.holds &&
        !(oc.indefinite && oc.commutative))
        conflicts.push_back(
            "first-kind-needs-indefinite-commutative-in-class-III: class-III first-kind instrument whose observable is not both "
            "indefinite and commutative");

    if (tiers.class_II == Tier::InClass) {
        bool has_rank1 = false;
        for (const CMat& e : obs.effects) {
            EigResult eg = eigh(e, tol.herm_tol);
            int rank = 0;
            for (double w : eg.w)
                if (w > tol.rank_tol * std::max(1.0, eg.w.back())) ++rank;
            if (rank == 1) has_rank1 = true;
        }
        if (has_rank1) {
            AlgebraBasis dual_fixed = fixed_point_basis(dual(total_channel(inst)), tol);
            if (dual_fixed.span_dimension() != 1)
                conflicts.push_back(
                    "rank-1-effect-trivial-fixed-algebra: class-II instrument with a rank-1 effect whose dual fixed "
                    "algebra is larger than C·1");
        }
    }
    return conflicts;
}

std::vector<std::string> conserved_quantity_audit(const CPMap& interaction, const CMat& h_sys,
                                                  const CMat& h_app, const CMat& xi,
                                                  const Observable& obs, bool first_kind,
                                                  const Tolerances& tol) {
    std::vector<std::string> conflicts;
    const int ds = h_sys.rows();
    const int da = h_app.rows();
    CMat h = kron(h_sys, CMat::identity(da)) + kron(CMat::identity(ds), h_app);
    const double conserved_dev = max_abs_diff(apply(dual(interaction), h), h);
    MapClassification cls = classify_map(interaction, tol);
    const bool xi_sp = is_strictly_positive_op(xi, tol);

    // Predicate is vacuous unless the process is class III with a conserved
    // quantity and the measurement is first-kind.
    if (conserved_dev > tol.fixed_tol * 100.0 || !cls.bistochastic || !xi_sp || !first_kind)
        return conflicts;

    for (int x = 0; x < obs.outcomes(); ++x) {
        CMat comm = obs.effects[x] * h_sys - h_sys * obs.effects[x];
        if (comm.max_abs() > tol.fixed_tol * 100.0)
            conflicts.push_back("conserved-quantity: [E_" + obs.labels[x] +
                                ", H_S] != 0 for a first-kind class-III process");
    }
    return conflicts;
}

} // namespace qoptk
