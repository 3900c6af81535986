#include "qoptk/processes.hpp"

#include <algorithm>
#include <cmath>

namespace qoptk {

namespace {

void check_state(const CMat& xi, const Tolerances& tol, const char* what) {
    EigResult e = eigh(xi, tol.herm_tol);
    if (e.w.front() < -tol.psd_tol) throw NotPSD(std::string(what) + ": negative eigenvalue");
    if (std::abs(xi.trace().real() - 1.0) > tol.trace_tol * 10.0)
        throw NotNormalized(std::string(what) + ": trace != 1");
}

// Embed an operator acting on (S, a2) into S ⊗ a1 ⊗ a2 with identity on a1.
CMat embed_middle_identity(const CMat& op, int ds, int da1, int da2) {
    const int dim = ds * da1 * da2;
    CMat r(dim, dim);
    for (int s = 0; s < ds; ++s)
        for (int b = 0; b < da2; ++b)
            for (int sp = 0; sp < ds; ++sp)
                for (int bp = 0; bp < da2; ++bp) {
                    const cxd val = op(s * da2 + b, sp * da2 + bp);
                    if (val == cxd(0.0, 0.0)) continue;
                    for (int a = 0; a < da1; ++a)
                        r((s * da1 + a) * da2 + b, (sp * da1 + a) * da2 + bp) = val;
                }
    return r;
}

} // namespace

CMat swap_matrix(int d) {
    CMat s(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1.0;
    return s;
}

double trace_norm_hermitian(const CMat& h) {
    EigResult e = eigh(h, 1e-6);
    double s = 0.0;
    for (double w : e.w) s += std::abs(w);
    return s;
}

bool MeasurementProcess::pointer_complete(double tol) const {
    if (pointer.empty()) return false;
    CMat sum(app_dim, app_dim);
    for (const auto& [label, z] : pointer) sum += z;
    return max_abs_diff(sum, CMat::identity(app_dim)) <= tol;
}

void validate_process(const MeasurementProcess& p, const Tolerances& tol) {
    if (p.sys_dim <= 0 || p.app_dim <= 0) throw DimMismatch("process dimensions must be positive");
    if (p.interaction.dim_in != p.sys_dim * p.app_dim ||
        p.interaction.dim_out != p.sys_dim * p.app_dim)
        throw DimMismatch("interaction must act on sys ⊗ app");
    if (p.xi.rows() != p.app_dim || p.xi.cols() != p.app_dim)
        throw DimMismatch("apparatus state has wrong dimension");
    check_state(p.xi, tol, "apparatus state");
    if (!is_trace_preserving(p.interaction, tol.trace_tol * 10.0))
        throw NotTracePreserving("interaction is not a channel");
    if (p.pointer.empty()) throw DimMismatch("process needs at least one pointer effect");
    for (const auto& [label, z] : p.pointer) {
        if (z.rows() != p.app_dim || z.cols() != p.app_dim)
            throw DimMismatch("pointer effect dimension");
        (void)clamp_to_effect(z, tol);
    }
}

CMat evaluate_process(const MeasurementProcess& p, const std::string& outcome, const CMat& rho) {
    if (rho.rows() != p.sys_dim || rho.cols() != p.sys_dim)
        throw DimMismatch("evaluate_process: state must live on the system");
    for (const auto& [label, z] : p.pointer)
        if (label == outcome) {
            CMat joint = apply(p.interaction, kron(rho, p.xi));
            CMat weighted = embed_second(z, p.sys_dim) * joint;
            return ptrace_second(weighted, p.sys_dim, p.app_dim);
        }
    throw UnknownOutcome("evaluate_process: no pointer outcome '" + outcome + "'");
}

CPMap induced_operation(const MeasurementProcess& p, const CMat& z, const Tolerances& tol) {
    const int ds = p.sys_dim, da = p.app_dim;
    CMat sqrt_z = sqrt_psd(clamp_to_effect(z, tol), tol);
    EigResult xe = eigh(p.xi, tol.herm_tol);

    CPMap op;
    op.dim_in = ds;
    op.dim_out = ds;
    for (int j = 0; j < da; ++j) {
        if (xe.w[j] <= tol.rank_tol) continue;
        // 1_S ⊗ |psi_j> as an isometry column block: (ds*da) x ds
        CMat inj(ds * da, ds);
        for (int s = 0; s < ds; ++s)
            for (int a = 0; a < da; ++a) inj(s * da + a, s) = xe.V(a, j);
        const double rootq = std::sqrt(xe.w[j]);
        for (const CMat& m : p.interaction.kraus) {
            CMat right = m * inj;                       // (ds*da) x ds
            CMat weighted = embed_second(sqrt_z, ds) * right;
            for (int i = 0; i < da; ++i) {
                // K = sqrt(q_j) (1_S ⊗ <i| sqrt(Z)) M (1_S ⊗ |psi_j>)
                CMat k(ds, ds);
                for (int s = 0; s < ds; ++s)
                    for (int sp = 0; sp < ds; ++sp) k(s, sp) = weighted(s * da + i, sp);
                k *= cxd(rootq, 0.0);
                if (k.max_abs() > 1e-15) op.kraus.push_back(std::move(k));
            }
        }
    }
    if (op.kraus.empty()) op.kraus.push_back(CMat::zero(ds, ds));
    if (int(op.kraus.size()) > ds * ds) {
        try {
            op = kraus_from_choi(choi(op), ds, ds, tol);
        } catch (const NotPSD&) {
            // zero map: keep the explicit zero Kraus operator
        }
    }
    return op;
}

Instrument induced_instrument(const MeasurementProcess& p, const Tolerances& tol) {
    if (!p.pointer_complete(tol.eff_tol * 100.0))
        throw NotNormalized("induced_instrument: pointer does not sum to the apparatus unit");
    Instrument inst;
    for (const auto& [label, z] : p.pointer) {
        inst.labels.push_back(label);
        inst.operations.push_back(induced_operation(p, z, tol));
    }
    validate_instrument(inst, tol);
    return inst;
}

CPMap conjugate_channel(const MeasurementProcess& p, const Tolerances& tol) {
    const int ds = p.sys_dim, da = p.app_dim;
    EigResult xe = eigh(p.xi, tol.herm_tol);
    CPMap lam;
    lam.dim_in = ds;
    lam.dim_out = da;
    for (int j = 0; j < da; ++j) {
        if (xe.w[j] <= tol.rank_tol) continue;
        CMat inj(ds * da, ds);
        for (int s = 0; s < ds; ++s)
            for (int a = 0; a < da; ++a) inj(s * da + a, s) = xe.V(a, j);
        const double rootq = std::sqrt(xe.w[j]);
        for (const CMat& m : p.interaction.kraus) {
            CMat right = m * inj; // (ds*da) x ds
            for (int i = 0; i < ds; ++i) {
                // L = sqrt(q_j) (<i|_S ⊗ 1_A) M (1_S ⊗ |psi_j>)
                CMat l(da, ds);
                for (int a = 0; a < da; ++a)
                    for (int sp = 0; sp < ds; ++sp) l(a, sp) = right(i * da + a, sp);
                l *= cxd(rootq, 0.0);
                if (l.max_abs() > 1e-15) lam.kraus.push_back(std::move(l));
            }
        }
    }
    if (lam.kraus.empty()) lam.kraus.push_back(CMat::zero(da, ds));
    return lam;
}

CPMap restriction_map(const MeasurementProcess& p, const Tolerances& tol) {
    const int ds = p.sys_dim, da = p.app_dim;
    EigResult xe = eigh(p.xi, tol.herm_tol);
    CPMap gamma;
    gamma.dim_in = ds * da;
    gamma.dim_out = ds;
    for (int j = 0; j < da; ++j) {
        if (xe.w[j] < 0.0) continue;
        // K = sqrt(q_j) (1_S ⊗ <psi_j|)
        CMat k(ds, ds * da);
        for (int s = 0; s < ds; ++s)
            for (int a = 0; a < da; ++a) k(s, s * da + a) = std::sqrt(std::max(xe.w[j], 0.0)) *
                                                            std::conj(xe.V(a, j));
        if (k.max_abs() > 1e-15) gamma.kraus.push_back(std::move(k));
    }
    return gamma;
}

ProcessClassReport validate_process_class(const MeasurementProcess& p, const ScalingConfig& cfg) {
    validate_process(p, cfg.tol);
    ProcessClassReport r;
    r.xi_strictly_positive = is_strictly_positive_op(p.xi, cfg.tol, &r.xi_min_eig);
    r.interaction_class = classify_map(p.interaction, cfg.tol);
    r.interaction_rank = decide_rank_nondecreasing(p.interaction, cfg);

    if (!r.xi_strictly_positive) {
        r.tier_I = r.tier_II = r.tier_III = Tier::NotInClass;
        return r;
    }
    r.tier_I = r.interaction_class.strictly_positive ? Tier::InClass : Tier::NotInClass;
    switch (r.interaction_rank.verdict) {
        case Verdict3::Yes: r.tier_II = Tier::InClass; break;
        case Verdict3::No: r.tier_II = Tier::NotInClass; break;
        default: r.tier_II = Tier::Unknown; break;
    }
    r.tier_III = r.interaction_class.bistochastic ? Tier::InClass : Tier::NotInClass;
    return r;
}

namespace {

MeasurementProcess build_pointer_dilation(const Instrument& inst) {
    const int ds = inst.dim();
    const int n = inst.outcomes();
    MeasurementProcess p;
    p.sys_dim = ds;
    p.app_dim = n;
    p.xi = CMat::identity(n);
    p.xi *= cxd(1.0 / n, 0.0);

    p.interaction.dim_in = ds * n;
    p.interaction.dim_out = ds * n;
    for (int x = 0; x < n; ++x) {
        for (const CMat& k : inst.operations[x].kraus)
            for (int m = 0; m < n; ++m)
                p.interaction.kraus.push_back(kron(k, ketbra(basis_ket(n, x), basis_ket(n, m))));
        CMat z(n, n);
        z(x, x) = 1.0;
        p.pointer.push_back({inst.labels[x], std::move(z)});
    }
    return p;
}

} // namespace

MeasurementProcess dilate_weak_third(const Instrument& inst, const Tolerances& tol) {
    validate_instrument(inst, tol);
    for (int x = 0; x < inst.outcomes(); ++x) {
        MapClassification c = classify_map(inst.operations[x], tol);
        if (!c.strictly_positive)
            throw NotStrictlyPositiveOperation("outcome '" + inst.labels[x] +
                                               "' (min eigenvalue of Phi(1) = " +
                                               std::to_string(c.strictly_positive_margin) + ")");
    }
    return build_pointer_dilation(inst);
}

MeasurementProcess dilate_strong_third(const Instrument& inst, const ScalingConfig& cfg) {
    validate_instrument(inst, cfg.tol);
    for (int x = 0; x < inst.outcomes(); ++x) {
        RankDecision dec = decide_rank_nondecreasing(inst.operations[x], cfg);
        if (dec.verdict != Verdict3::Yes)
            throw PreconditionUnmet("outcome '" + inst.labels[x] +
                                    "' is not certified rank non-decreasing (verdict " +
                                    to_string(dec.verdict) + ")");
        EffectClass ec =
            classify_effect(clamp_to_effect(kraus_sum(inst.operations[x]), cfg.tol), cfg.tol);
        if (!ec.indefinite)
            throw PreconditionUnmet("outcome '" + inst.labels[x] +
                                    "' effect is not indefinite (spectrum [" +
                                    std::to_string(ec.min_eig) + ", " +
                                    std::to_string(ec.max_eig) + "])");
    }
    MeasurementProcess p = build_pointer_dilation(inst);
    RankDecision composite = decide_rank_nondecreasing(p.interaction, cfg);
    if (composite.verdict == Verdict3::No)
        throw PreconditionUnmet("composite interaction unexpectedly dropped rank");
    return p;
}

MeasurementProcess swap_process(const CMat& e, const CMat& xi, const Tolerances& tol) {
    const int d = e.rows();
    if (xi.rows() != d || xi.cols() != d)
        throw DimMismatch("swap_process: apparatus dim must equal system dim");
    if (!is_strictly_positive_op(xi, tol)) throw XiNotStrictlyPositive("swap_process");
    check_state(xi, tol, "swap_process xi");
    (void)clamp_to_effect(e, tol);

    MeasurementProcess p;
    p.sys_dim = d;
    p.app_dim = d;
    p.xi = xi;
    p.interaction.dim_in = d * d;
    p.interaction.dim_out = d * d;
    p.interaction.kraus.push_back(swap_matrix(d));
    p.pointer.push_back({"z", e});
    return p;
}

MeasurementProcess convex_combine_processes(const MeasurementProcess& p1,
                                            const MeasurementProcess& p2, double lambda) {
    if (p1.sys_dim != p2.sys_dim)
        throw DimMismatch("convex_combine_processes: system dimensions differ");
    if (lambda < 0.0 || lambda > 1.0)
        throw PreconditionUnmet("convex_combine_processes: lambda outside [0,1]");
    if (p1.pointer.size() != p2.pointer.size())
        throw DimMismatch("convex_combine_processes: pointer outcome counts differ");
    for (std::size_t i = 0; i < p1.pointer.size(); ++i)
        if (p1.pointer[i].first != p2.pointer[i].first)
            throw DimMismatch("convex_combine_processes: pointer labels differ");

    const int ds = p1.sys_dim, da1 = p1.app_dim, da2 = p2.app_dim;
    MeasurementProcess p;
    p.sys_dim = ds;
    p.app_dim = da1 * da2 * 2;

    CMat control(2, 2);
    control(0, 0) = lambda;
    control(1, 1) = 1.0 - lambda;
    p.xi = kron(kron(p1.xi, p2.xi), control);

    const int dim = ds * p.app_dim;
    p.interaction.dim_in = dim;
    p.interaction.dim_out = dim;
    CMat proj0 = ketbra(basis_ket(2, 0), basis_ket(2, 0));
    CMat proj1 = ketbra(basis_ket(2, 1), basis_ket(2, 1));
    for (const CMat& m : p1.interaction.kraus)
        p.interaction.kraus.push_back(kron(kron(m, CMat::identity(da2)), proj0));
    for (const CMat& m : p2.interaction.kraus)
        p.interaction.kraus.push_back(kron(embed_middle_identity(m, ds, da1, da2), proj1));

    for (std::size_t i = 0; i < p1.pointer.size(); ++i) {
        CMat z = kron(kron(p1.pointer[i].second, CMat::identity(da2)), proj0) +
                 kron(kron(CMat::identity(da1), p2.pointer[i].second), proj1);
        p.pointer.push_back({p1.pointer[i].first, std::move(z)});
    }
    return p;
}

MeasurementProcess compose_processes(const MeasurementProcess& p1,
                                     const MeasurementProcess& p2) {
    if (p1.sys_dim != p2.sys_dim)
        throw DimMismatch("compose_processes: system dimensions differ");
    if (p1.pointer.size() != 1 || p2.pointer.size() != 1)
        throw PreconditionUnmet("compose_processes expects single-effect pointers");

    const int ds = p1.sys_dim, da1 = p1.app_dim, da2 = p2.app_dim;
    MeasurementProcess p;
    p.sys_dim = ds;
    p.app_dim = da1 * da2;
    p.xi = kron(p1.xi, p2.xi);

    const int dim = ds * da1 * da2;
    p.interaction.dim_in = dim;
    p.interaction.dim_out = dim;
    // (id_{a1} ⊗ E2) ∘ (E1 ⊗ id_{a2}); Kraus products in that order
    for (const CMat& m2 : p2.interaction.kraus) {
        CMat lifted2 = embed_middle_identity(m2, ds, da1, da2);
        for (const CMat& m1 : p1.interaction.kraus)
            p.interaction.kraus.push_back(lifted2 * kron(m1, CMat::identity(da2)));
    }
    p.pointer.push_back(
        {p1.pointer[0].first + "*" + p2.pointer[0].first,
         kron(p1.pointer[0].second, p2.pointer[0].second)});
    return p;
}

std::pair<MeasurementProcess, CPMap> interior_approximation(const MeasurementProcess& p,
                                                            double eps, const CMat& omega,
                                                            const Tolerances& tol,
                                                            double* choi_distance) {
    if (eps <= 0.0) throw PreconditionUnmet("interior_approximation: eps must be positive");
    if (p.interaction.kraus.size() != 1)
        throw PreconditionUnmet("interior_approximation: interaction is not unitary");
    {
        const CMat& u = p.interaction.kraus.front();
        if (max_abs_diff(u.adjoint() * u, CMat::identity(u.cols())) > 1e-8)
            throw PreconditionUnmet("interior_approximation: interaction is not unitary");
    }
    {
        Tolerances t = tol;
        if (psd_rank(p.xi, t) != 1)
            throw PreconditionUnmet("interior_approximation: xi is not pure");
    }
    if (!is_strictly_positive_op(omega, tol))
        throw PreconditionUnmet("interior_approximation: Omega is not strictly positive");
    check_state(omega, tol, "Omega");

    MeasurementProcess out = p;
    CMat xi1 = p.xi;
    xi1 *= cxd(1.0 / (1.0 + eps), 0.0);
    CMat mix = omega;
    mix *= cxd(eps / (1.0 + eps), 0.0);
    xi1 += mix;
    out.xi = xi1;

    const CMat& z = p.pointer.front().second;
    CPMap phi1 = induced_operation(out, z, tol);
    if (choi_distance != nullptr) {
        CPMap phi = induced_operation(p, z, tol);
        *choi_distance = trace_norm_hermitian(choi(phi) - choi(phi1));
    }
    return {out, phi1};
}

} // namespace qoptk
