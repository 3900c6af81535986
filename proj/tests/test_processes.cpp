#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "qoptk/processes.hpp"

using namespace qoptk;
using namespace qoptk::test;

namespace {

const Tolerances tol;

ScalingConfig cfg() {
    ScalingConfig c;
    return c;
}

Observable indefinite_pair() {
    Observable obs;
    obs.labels = {"a", "b"};
    obs.effects = {diag({0.75, 0.25}), diag({0.25, 0.75})};
    return obs;
}

// Pure-preparation unitary dilation of the Lüders operation of a projection:
// controlled flip on the apparatus qubit, post-selected on |0>.
MeasurementProcess projective_luders_dilation(const CMat& p) {
    const int d = p.rows();
    CMat pc = CMat::identity(d) - p;
    CMat x(2, 2);
    x(0, 1) = 1.0;
    x(1, 0) = 1.0;
    CMat u = kron(p, CMat::identity(2)) + kron(pc, x);

    MeasurementProcess proc;
    proc.sys_dim = d;
    proc.app_dim = 2;
    proc.xi = projector(basis_ket(2, 0));
    proc.interaction.dim_in = 2 * d;
    proc.interaction.dim_out = 2 * d;
    proc.interaction.kraus.push_back(u);
    proc.pointer.push_back({"0", projector(basis_ket(2, 0))});
    return proc;
}

} // namespace

TEST_CASE("swap process evaluation and induced maps") {
    Rng rng(701);
    CMat e = diag({1.0, 0.0});
    CMat xi = diag({0.75, 0.25});
    MeasurementProcess p = swap_process(e, xi, tol);

    SUBCASE("evaluate: tr[E rho] xi") {
        for (int trial = 0; trial < 5; ++trial) {
            CMat rho = rng.density(2, 2);
            CMat expected = xi;
            expected *= fro_inner(e, rho);
            check_close(evaluate_process(p, "z", rho), expected, 1e-12, "swap output");
        }
        CHECK_THROWS_AS(evaluate_process(p, "missing", rng.density(2, 2)), UnknownOutcome);
    }
    SUBCASE("induced operation: rho_00 xi") {
        CPMap op = induced_operation(p, e, tol);
        CMat rho = rng.density(2, 2);
        CMat expected = xi;
        expected *= rho(0, 0);
        check_close(apply(op, rho), expected, 1e-12, "rho_00 xi");
    }
    SUBCASE("E = 1 induces the prepare channel") {
        CPMap op = induced_operation(p, CMat::identity(2), tol);
        check_close(choi(op), choi(gen::prepare_channel(xi)), 1e-10, "prepare-xi");
    }
    SUBCASE("binary pointer induces the two-outcome swap instrument") {
        MeasurementProcess p2 = p;
        p2.pointer = {{"z", e}, {"zc", CMat::identity(2) - e}};
        Instrument inst = induced_instrument(p2, tol);
        CMat rho = rng.density(2, 2);
        CMat out0 = xi;
        out0 *= fro_inner(e, rho);
        check_close(apply(inst.operations[0], rho), out0, 1e-12, "tr[Z .] xi");
    }
    SUBCASE("trivial pointer gives the reduced channel") {
        MeasurementProcess p1 = p;
        p1.pointer = {{"all", CMat::identity(2)}};
        Instrument inst = induced_instrument(p1, tol);
        REQUIRE(inst.operations.size() == 1);
        check_close(choi(inst.operations[0]), choi(gen::prepare_channel(xi)), 1e-10,
                    "no post-selection");
    }
    SUBCASE("xi must be strictly positive") {
        CHECK_THROWS_AS(swap_process(e, projector(basis_ket(2, 0)), tol),
                        XiNotStrictlyPositive);
    }
    SUBCASE("an incomplete pointer cannot induce an instrument") {
        MeasurementProcess partial = p; // single effect != 1
        CHECK_THROWS_AS(induced_instrument(partial, tol), NotNormalized);
    }
}

TEST_CASE("conjugate channel and restriction map") {
    Rng rng(702);
    SUBCASE("swap: the system state is handed to the apparatus") {
        MeasurementProcess p = swap_process(diag({1.0, 0.0}), diag({0.6, 0.4}), tol);
        CPMap lam = conjugate_channel(p, tol);
        CMat rho = rng.density(2, 2);
        check_close(apply(lam, rho), rho, 1e-12, "Lambda = id");
    }
    SUBCASE("product interaction: Lambda is constant in rho") {
        MeasurementProcess p;
        p.sys_dim = 2;
        p.app_dim = 2;
        p.xi = rng.density(2, 2);
        CPMap phi_s = gen::random_channel(2, 2, rng.integer());
        CPMap phi_a = gen::random_channel(2, 2, rng.integer());
        p.interaction = tensor(phi_s, phi_a);
        p.pointer.push_back({"z", CMat::identity(2)});
        CPMap lam = conjugate_channel(p, tol);
        CMat out1 = apply(lam, rng.density(2, 2));
        CMat out2 = apply(lam, rng.density(2, 1));
        check_close(out1, out2, 1e-10, "constant conjugate output");
        check_close(out1, apply(phi_a, p.xi), 1e-10, "Phi_A(xi)");
    }
    SUBCASE("duality: tr[Z_x Lambda(rho)] = tr[E_x rho] and Lambda*(Z_x) = E_x") {
        Instrument inst = gen::random_instrument(2, 3, 31);
        MeasurementProcess p = dilate_weak_third(inst, tol);
        CPMap lam = conjugate_channel(p, tol);
        Observable obs = compatible_observable(inst, tol);
        for (std::size_t x = 0; x < p.pointer.size(); ++x) {
            check_close(apply(dual(lam), p.pointer[x].second), obs.effects[x], 1e-10,
                        "Lambda*(Z) = E");
            for (int trial = 0; trial < 100; ++trial) {
                CMat rho = rng.density(2, 1 + int(rng.integer() % 2));
                const cxd lhs = fro_inner(p.pointer[x].second, apply(lam, rho));
                const cxd rhs = fro_inner(obs.effects[x], rho);
                CHECK(std::abs(lhs - rhs) < 1e-10);
            }
        }
    }
    SUBCASE("strictly positive process: Lambda strictly positive, E = 0 iff Z = 0") {
        Instrument inst = gen::random_instrument(2, 2, 34);
        MeasurementProcess p = dilate_weak_third(inst, tol); // xi > 0, E strictly positive
        CPMap lam = conjugate_channel(p, tol);
        CHECK(classify_map(lam, tol).strictly_positive);
        // any nonzero pointer effect induces a nonzero system effect
        CMat z = projector(basis_ket(2, 0));
        z *= cxd(0.05, 0.0);
        CHECK(kraus_sum(induced_operation(p, z, tol)).max_abs() > 1e-6);
        CHECK(kraus_sum(induced_operation(p, CMat::zero(2, 2), tol)).max_abs() < 1e-12);
    }
    SUBCASE("restriction map is unital and reproduces dual operations") {
        Instrument inst = gen::random_instrument(2, 2, 32);
        MeasurementProcess p = dilate_weak_third(inst, tol);
        CPMap gamma = restriction_map(p, tol);
        check_close(apply(gamma, CMat::identity(p.sys_dim * p.app_dim)),
                    CMat::identity(p.sys_dim), 1e-10, "Gamma_xi unital");
        // I_x*(A) = Gamma_xi(E*(A ⊗ Z_x))
        CMat a = Rng(33).hermitian(2);
        for (std::size_t x = 0; x < p.pointer.size(); ++x) {
            CMat lifted = apply(dual(p.interaction), kron(a, p.pointer[x].second));
            CMat via_gamma = apply(gamma, lifted);
            CMat direct = apply(dual(induced_operation(p, p.pointer[x].second, tol)), a);
            check_close(via_gamma, direct, 1e-10, "Gamma ∘ E* route");
        }
    }
}

TEST_CASE("validate_process_class") {
    SUBCASE("unitary swap with strictly positive xi admits all tiers") {
        MeasurementProcess p = swap_process(diag({1.0, 0.5}), diag({0.7, 0.3}), tol);
        ProcessClassReport r = validate_process_class(p, cfg());
        CHECK(r.tier_I == Tier::InClass);
        CHECK(r.tier_II == Tier::InClass);
        CHECK(r.tier_III == Tier::InClass);
    }
    SUBCASE("pure xi admits nothing") {
        MeasurementProcess p = swap_process(diag({1.0, 0.5}), diag({0.7, 0.3}), tol);
        p.xi = projector(basis_ket(2, 0));
        ProcessClassReport r = validate_process_class(p, cfg());
        CHECK_FALSE(r.xi_strictly_positive);
        CHECK(r.tier_I == Tier::NotInClass);
        CHECK(r.tier_II == Tier::NotInClass);
        CHECK(r.tier_III == Tier::NotInClass);
    }
    SUBCASE("weak-third dilation is class I") {
        Instrument inst = gen::random_instrument(2, 2, 41);
        ProcessClassReport r = validate_process_class(dilate_weak_third(inst, tol), cfg());
        CHECK(r.tier_I == Tier::InClass);
    }
}

TEST_CASE("dilate_weak_third") {
    SUBCASE("qutrit instrument: exact round-trip and class I") {
        Instrument q = gen::qutrit_remark_instrument();
        MeasurementProcess p = dilate_weak_third(q, tol);
        CHECK(p.app_dim == 2);

        // by construction I_+(|0><0|) = 1/6 comes out of the process directly
        CMat sixth = CMat::identity(3);
        sixth *= cxd(1.0 / 6.0, 0.0);
        check_close(evaluate_process(p, "+", projector(basis_ket(3, 2))), sixth, 1e-12,
                    "I_+(|0><0|)");

        Instrument back = induced_instrument(p, tol);
        for (int x = 0; x < 2; ++x)
            check_close(choi(back.operations[x]), choi(q.operations[x]), 1e-10, "round trip");
        CHECK(validate_process_class(p, cfg()).tier_I == Tier::InClass);
    }
    SUBCASE("round-trips on random strictly positive instruments") {
        Rng rng(703);
        for (int trial = 0; trial < 6; ++trial) {
            const int d = 2 + int(trial % 2);
            const int n = 2 + int(rng.integer() % 3);
            Instrument inst = gen::random_instrument(d, n, rng.integer());
            MeasurementProcess p = dilate_weak_third(inst, tol);
            Instrument back = induced_instrument(p, tol);
            for (int x = 0; x < n; ++x)
                CHECK(max_abs_diff(choi(back.operations[x]), choi(inst.operations[x])) < 1e-10);
            // probability normalisation over outcomes
            CMat rho = rng.density(d, d);
            double total = 0.0;
            for (const auto& [label, z] : p.pointer)
                total += evaluate_process(p, label, rho).trace().real();
            CHECK(std::abs(total - 1.0) < 1e-10);
        }
    }
    SUBCASE("rank-deficient operations are rejected by name") {
        Instrument bad;
        bad.labels = {"0", "1"};
        CMat e0 = diag({0.5, 0.5}), e1 = diag({0.5, 0.5});
        bad.operations = {gen::measure_and_prepare(e0, projector(basis_ket(2, 0)), tol),
                          gen::measure_and_prepare(e1, diag({0.5, 0.5}), tol)};
        CHECK_THROWS_WITH_AS(dilate_weak_third(bad, tol),
                             doctest::Contains("outcome '0'"), NotStrictlyPositiveOperation);
    }
    SUBCASE("single-outcome instrument embeds with a 1-dim apparatus") {
        Instrument single;
        single.labels = {"only"};
        single.operations = {gen::random_bistochastic(2, 2, 55)};
        MeasurementProcess p = dilate_weak_third(single, tol);
        CHECK(p.app_dim == 1);
        Instrument back = induced_instrument(p, tol);
        check_close(choi(back.operations[0]), choi(single.operations[0]), 1e-10, "N=1");
    }
}

TEST_CASE("dilate_strong_third") {
    SUBCASE("Lüders of an indefinite commutative observable reaches tier II") {
        Instrument lud = gen::luders_instrument(indefinite_pair(), tol);
        MeasurementProcess p = dilate_strong_third(lud, cfg());
        ProcessClassReport r = validate_process_class(p, cfg());
        CHECK(r.tier_I == Tier::InClass);
        CHECK(r.tier_II == Tier::InClass);
        Instrument back = induced_instrument(p, tol);
        for (int x = 0; x < 2; ++x)
            CHECK(max_abs_diff(choi(back.operations[x]), choi(lud.operations[x])) < 1e-10);
    }
    SUBCASE("qutrit instrument fails the indefiniteness precondition") {
        CHECK_THROWS_AS(dilate_strong_third(gen::qutrit_remark_instrument(), cfg()),
                        PreconditionUnmet);
    }
    SUBCASE("binary measure-and-prepare with strictly positive pieces reaches tier II") {
        Instrument inst = gen::random_strong_third_instrument(2, 2, 57);
        MeasurementProcess p = dilate_strong_third(inst, cfg());
        ProcessClassReport r = validate_process_class(p, cfg());
        CHECK(r.tier_II == Tier::InClass);
    }
    SUBCASE("Lemma F.3(i): strictly positive pointer effect gives E > 0, decide != No") {
        Instrument inst = gen::random_strong_third_instrument(2, 2, 58);
        MeasurementProcess p = dilate_strong_third(inst, cfg());
        CMat z = projector(basis_ket(2, 0));
        z *= cxd(0.8, 0.0);
        CMat lift = CMat::identity(2);
        lift *= cxd(0.1, 0.0);
        z += lift; // Z > 0 on the apparatus
        CPMap op = induced_operation(p, z, tol);
        CHECK(is_strictly_positive_op(kraus_sum(op), tol));
        CHECK(decide_rank_nondecreasing(op, cfg()).verdict != Verdict3::No);
    }
}

TEST_CASE("convex and sequential process assembly") {
    Rng rng(704);
    MeasurementProcess p1 = swap_process(diag({1.0, 0.0}), diag({0.7, 0.3}), tol);
    MeasurementProcess p2 = swap_process(diag({0.5, 0.5}), diag({0.4, 0.6}), tol);

    SUBCASE("lambda = 1 reproduces the first operation exactly") {
        MeasurementProcess p = convex_combine_processes(p1, p2, 1.0);
        CPMap got = induced_operation(p, p.pointer[0].second, tol);
        CPMap want = induced_operation(p1, p1.pointer[0].second, tol);
        check_close(choi(got), choi(want), 1e-9, "branch 1 only");
    }
    SUBCASE("two swaps at lambda = 1/2 mix the induced operations") {
        MeasurementProcess p = convex_combine_processes(p1, p2, 0.5);
        CPMap got = induced_operation(p, p.pointer[0].second, tol);
        CPMap want = convex_mix(induced_operation(p1, p1.pointer[0].second, tol),
                                induced_operation(p2, p2.pointer[0].second, tol), 0.5);
        check_close(choi(got), choi(want), 1e-9, "mixture");
        // the assembled interaction keeps every tier of the unitary inputs
        ProcessClassReport r = validate_process_class(p, cfg());
        CHECK(r.tier_III == Tier::InClass);
    }
    SUBCASE("composition realises Phi_2 ∘ Phi_1 and keeps tier III") {
        MeasurementProcess p = compose_processes(p1, p2);
        CPMap got = induced_operation(p, p.pointer[0].second, tol);
        CPMap want = compose(induced_operation(p2, p2.pointer[0].second, tol),
                             induced_operation(p1, p1.pointer[0].second, tol));
        check_close(choi(got), choi(want), 1e-9, "sequential");
        ProcessClassReport r = validate_process_class(p, cfg());
        CHECK(r.tier_III == Tier::InClass);
    }
    SUBCASE("general convex mixtures of induced operations") {
        for (int trial = 0; trial < 3; ++trial) {
            Instrument a = gen::random_instrument(2, 2, rng.integer());
            Instrument b = gen::random_instrument(2, 2, rng.integer());
            MeasurementProcess pa = dilate_weak_third(a, tol);
            MeasurementProcess pb = dilate_weak_third(b, tol);
            const double lam = rng.uniform();
            MeasurementProcess p = convex_combine_processes(pa, pb, lam);
            Instrument mixed = induced_instrument(p, tol);
            for (int x = 0; x < 2; ++x) {
                CPMap want = convex_mix(a.operations[x], b.operations[x], lam);
                CHECK(max_abs_diff(choi(mixed.operations[x]), choi(want)) < 1e-9);
            }
        }
    }
}

TEST_CASE("interior_approximation") {
    SUBCASE("projective Lüders dilation moves into class III") {
        CMat p0 = diag({1.0, 0.0});
        MeasurementProcess pure = projective_luders_dilation(p0);
        // sanity: the pure process implements the Lüders operation
        CPMap induced = induced_operation(pure, pure.pointer[0].second, tol);
        check_close(choi(induced), choi(gen::luders_operation(p0, tol)), 1e-10, "P . P");

        CMat omega = CMat::identity(2);
        omega *= cxd(0.5, 0.0);
        double dist = 0.0;
        auto [perturbed, phi1] = interior_approximation(pure, 1e-3, omega, tol, &dist);
        ProcessClassReport r = validate_process_class(perturbed, cfg());
        CHECK(r.tier_I == Tier::InClass);
        CHECK(r.tier_II == Tier::InClass);
        CHECK(r.tier_III == Tier::InClass);
        CHECK(dist <= 2.0 * 1e-3 * 2.0 + 1e-12);
        // min eigenvalue of the perturbed preparation: eps/((1+eps) d)
        EigResult e = eigh(perturbed.xi, 1e-10);
        CHECK(e.w.front() == doctest::Approx(1e-3 / (1.0 + 1e-3) / 2.0).epsilon(1e-9));
        // Phi_1 = (1/(1+eps)) Phi + (eps/(1+eps)) Phi_2 with Phi_2 the
        // Omega-prepared branch
        MeasurementProcess omega_branch = pure;
        omega_branch.xi = omega;
        CPMap phi2 = induced_operation(omega_branch, pure.pointer[0].second, tol);
        CPMap mixture = convex_mix(induced, phi2, 1.0 / (1.0 + 1e-3));
        check_close(choi(phi1), choi(mixture), 1e-10, "epsilon mixture identity");
    }
    SUBCASE("trace-preserving inputs stay trace-preserving") {
        MeasurementProcess pure = projective_luders_dilation(diag({1.0, 0.0}));
        pure.pointer[0].second = CMat::identity(2); // no post-selection: a channel
        CMat omega = Rng(705).density(2, 2);
        omega += 0.2 * CMat::identity(2);
        omega *= cxd(1.0 / omega.trace().real(), 0.0);
        auto [perturbed, phi1] = interior_approximation(pure, 1e-2, omega, tol);
        CHECK(is_trace_preserving(phi1, 1e-10));
    }
    SUBCASE("preconditions: unitary interaction and pure preparation") {
        MeasurementProcess pure = projective_luders_dilation(diag({1.0, 0.0}));
        CMat omega = CMat::identity(2);
        omega *= cxd(0.5, 0.0);
        MeasurementProcess mixed = pure;
        mixed.xi = omega;
        CHECK_THROWS_AS(interior_approximation(mixed, 1e-3, omega, tol), PreconditionUnmet);
        MeasurementProcess nonunitary = pure;
        nonunitary.interaction = tensor(gen::depolarizing_channel(2), identity_map(2));
        CHECK_THROWS_AS(interior_approximation(nonunitary, 1e-3, omega, tol),
                        PreconditionUnmet);
    }
}
