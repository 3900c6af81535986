#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "qoptk/qmaps.hpp"

using namespace qoptk;
using namespace qoptk::test;

namespace {
const Tolerances tol;
}

TEST_CASE("apply: identity, swap-prepare, qutrit example") {
    Rng rng(201);
    CMat a = rng.hermitian(2);
    check_close(apply(identity_map(2), a), a, 1e-14, "identity");

    // Phi(.) = tr[E .] xi with E = 1/2: Phi(1) = xi
    CMat xi = rng.density(2, 2);
    CMat e = CMat::identity(2);
    e *= cxd(0.5, 0.0);
    CPMap phi = gen::measure_and_prepare(e, xi, tol);
    check_close(apply(phi, CMat::identity(2)), xi, 1e-12, "tr[1/2 . 1] xi");

    // I_+(|0><0|) = 1/6 (basis order |+>, |->, |0>), so |0> is index 2
    Instrument qutrit = gen::qutrit_remark_instrument();
    CMat sixth = CMat::identity(3);
    sixth *= cxd(1.0 / 6.0, 0.0);
    check_close(apply(qutrit.operations[0], projector(basis_ket(3, 2))), sixth, 1e-14,
                "I_+(|0><0|) = 1/6");
}

TEST_CASE("dual: unitary, measure-and-prepare, involution") {
    Rng rng(202);
    CMat u = rng.haar_unitary(3);
    CPMap uch = gen::unitary_channel(u);
    CMat a = rng.hermitian(3);
    check_close(apply(dual(uch), a), u.adjoint() * a * u, 1e-12, "U† . U");

    // dual of tr[E .] xi is tr[xi .] E
    CMat e = diag({1.0, 0.5});
    CMat xi = rng.density(2, 2);
    CPMap phi = gen::measure_and_prepare(e, xi, tol);
    CMat b = rng.hermitian(2);
    CMat expected = e;
    expected *= fro_inner(xi, b); // tr[xi b] E  (xi Hermitian)
    check_close(apply(dual(phi), b), expected, 1e-12, "dual of measure-and-prepare");

    // dual ∘ dual = original (Choi comparison)
    CPMap m = gen::random_channel(2, 3, 7);
    check_close(choi(dual(dual(m))), choi(m), 1e-12, "involution");
}

TEST_CASE("trace duality holds on random triples") {
    Rng rng(203);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 2 + int(rng.integer() % 2);
        CPMap m = gen::random_channel(d, 1 + int(rng.integer() % 3), rng.integer());
        CMat a = rng.ginibre(d, d), b = rng.ginibre(d, d);
        const cxd lhs = (apply(dual(m), a) * b).trace();
        const cxd rhs = (a * apply(m, b)).trace();
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("choi: identity, depolarizing, unitary") {
    // identity qubit channel: rank-1 Choi of trace 2 (Bell projector)
    CMat j = choi(identity_map(2));
    CHECK(std::abs(j.trace().real() - 2.0) < 1e-14);
    CHECK(psd_rank(j, tol) == 1);

    // completely depolarizing qubit channel: direct evaluation on the basis
    CPMap dep = gen::depolarizing_channel(2);
    CMat expected(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int jj = 0; jj < 2; ++jj) {
            CMat out = apply(dep, ketbra(basis_ket(2, i), basis_ket(2, jj)));
            for (int m = 0; m < 2; ++m)
                for (int n = 0; n < 2; ++n) expected(m * 2 + i, n * 2 + jj) = out(m, n);
        }
    check_close(choi(dep), expected, 1e-14, "basis evaluation oracle");
    CMat half_id = CMat::identity(4);
    half_id *= cxd(0.5, 0.0);
    check_close(choi(dep), half_id, 1e-14, "1_4 / 2");

    Rng rng(204);
    CHECK(psd_rank(choi(gen::unitary_channel(rng.haar_unitary(3))), tol) == 1);

    // partial trace over the output is the transposed kraus sum (<= 1)
    CPMap m = gen::random_channel(3, 2, 11);
    check_close(ptrace_first(choi(m), 3, 3), kraus_sum(m).transpose(), 1e-12, "tr_out J");
}

TEST_CASE("kraus_from_choi canonical form") {
    // Bell projector -> the single Kraus operator 1
    CPMap id2 = kraus_from_choi(choi(identity_map(2)), 2, 2, tol);
    REQUIRE(id2.kraus.size() == 1);
    check_close(id2.kraus[0], CMat::identity(2), 1e-12, "identity recovered");

    // 1_4/2 -> 4 Kraus operators of squared norm 1/2
    CMat half_id = CMat::identity(4);
    half_id *= cxd(0.5, 0.0);
    CPMap dep = kraus_from_choi(half_id, 2, 2, tol);
    REQUIRE(dep.kraus.size() == 4);
    for (const CMat& k : dep.kraus)
        CHECK(std::abs(k.fro_norm() * k.fro_norm() - 0.5) < 1e-12);

    // dephasing map: Choi rank 2
    CPMap deph;
    deph.dim_in = 2;
    deph.dim_out = 2;
    {
        CMat k0 = diag({1.0, 0.0}), k1 = diag({0.0, 1.0});
        deph.kraus = {k0, k1};
    }
    CPMap rebuilt = kraus_from_choi(choi(deph), 2, 2, tol);
    CHECK(rebuilt.kraus.size() == 2);
    check_close(choi(rebuilt), choi(deph), 1e-12, "round trip");

    CHECK_THROWS_AS(kraus_from_choi(diag({1.0, -0.5, 0.2, 0.1}), 2, 2, tol), NotPSD);
}

TEST_CASE("choi round-trip on random maps") {
    Rng rng(205);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 2 + int(rng.integer() % 3);
        CPMap m = gen::random_channel(d, 1 + int(rng.integer() % (d * d)), rng.integer());
        CPMap back = kraus_from_choi(choi(m), d, d, tol);
        CHECK(max_abs_diff(choi(back), choi(m)) < 1e-9);
        // canonical form is stable under re-canonicalisation
        CPMap twice = canonical(back, tol);
        REQUIRE(twice.kraus.size() == back.kraus.size());
        for (std::size_t i = 0; i < twice.kraus.size(); ++i)
            CHECK(max_abs_diff(twice.kraus[i], back.kraus[i]) < 1e-8);
    }
}

TEST_CASE("canonical form is invariant under Kraus reshuffling") {
    Rng rng(211);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2 + int(rng.integer() % 2);
        CPMap m = gen::random_channel(d, 2 + int(rng.integer() % 2), rng.integer());
        CPMap shuffled = m;
        std::reverse(shuffled.kraus.begin(), shuffled.kraus.end());
        // same map under a unitary remix of the Kraus family
        for (CMat& k : shuffled.kraus) k *= cxd(std::exp(cxd(0.0, 0.4)));
        CPMap a = canonical(m, tol);
        CPMap b = canonical(shuffled, tol);
        REQUIRE(a.kraus.size() == b.kraus.size());
        for (std::size_t i = 0; i < a.kraus.size(); ++i)
            CHECK(max_abs_diff(a.kraus[i], b.kraus[i]) < 1e-8);
    }
}

TEST_CASE("tensor, compose, convex_mix") {
    check_close(choi(tensor(identity_map(2), identity_map(3))), choi(identity_map(6)), 1e-12,
                "id2 ⊗ id3 = id6");

    Rng rng(206);
    CMat u = rng.haar_unitary(3);
    CPMap round = compose(gen::unitary_channel(u.adjoint()), gen::unitary_channel(u));
    check_close(choi(round), choi(identity_map(3)), 1e-12, "U† U = id");

    // convex_mix(id, prepare-|phi>, 1/2) acts as 1/2 rho + 1/2 tr[rho]|phi><phi|
    CMat phi = ket({0.6, cxd(0.0, 0.8)});
    CPMap mix = gen::depolarize_to_pure(0.5, phi);
    CMat rho = rng.density(2, 2);
    CMat expected = apply(identity_map(2), rho);
    expected *= cxd(0.5, 0.0);
    CMat prep = projector(phi);
    prep *= cxd(0.5, 0.0);
    expected += prep;
    check_close(apply(mix, rho), expected, 1e-12, "mixture action");

    CHECK_THROWS_AS(compose(identity_map(2), identity_map(3)), DimMismatch);
}

TEST_CASE("classify_map examples") {
    Rng rng(207);
    SUBCASE("unitary channel: everything") {
        MapClassification c = classify_map(gen::unitary_channel(rng.haar_unitary(3)), tol);
        CHECK(c.trace_preserving);
        CHECK(c.unital);
        CHECK(c.bistochastic);
        CHECK(c.strictly_positive);
        CHECK(c.purity_preserving);
        check_close(c.compatible_effect, CMat::identity(3), 1e-10, "unit effect");
    }
    SUBCASE("prepare |0><0|: TP, not unital, not strictly positive") {
        CPMap prep = gen::prepare_channel(projector(basis_ket(2, 0)));
        MapClassification c = classify_map(prep, tol);
        CHECK(c.trace_preserving);
        CHECK_FALSE(c.unital);
        CHECK_FALSE(c.strictly_positive);
        CHECK_FALSE(c.bistochastic);
    }
    SUBCASE("qutrit I_+: strictly positive with effect E_+") {
        Instrument qutrit = gen::qutrit_remark_instrument();
        MapClassification c = classify_map(qutrit.operations[0], tol);
        CHECK(c.strictly_positive);
        CHECK_FALSE(c.trace_preserving);
        CMat eplus(3, 3); // basis order |+>, |->, |0>
        eplus(0, 0) = 1.0;
        eplus(2, 2) = 0.5;
        check_close(c.compatible_effect, eplus, 1e-12, "E_+ = |+><+| + |0><0|/2");
    }
    SUBCASE("kraus sum above the identity raises NotSubunital") {
        CPMap bad;
        bad.dim_in = 2;
        bad.dim_out = 2;
        CMat k = CMat::identity(2);
        k *= cxd(1.1, 0.0);
        bad.kraus = {k};
        CHECK_THROWS_AS(classify_map(bad, tol), NotSubunital);
    }
}

TEST_CASE("strict positivity agrees with full-rank sampling (Lemma equivalence)") {
    Rng rng(208);
    int positives = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + int(trial % 2);
        CPMap m = (trial % 3 == 0)
                      ? gen::measure_and_prepare(
                            CMat::identity(d), rng.density(d, 1 + int(rng.integer() % d)), tol)
                      : gen::random_channel(d, 1 + int(rng.integer() % 3), rng.integer());
        const bool sp = classify_map(m, tol).strictly_positive;
        if (sp) ++positives;
        bool sampled_sp = true;
        for (int s = 0; s < 50; ++s) {
            CMat rho = rng.density(d, d);
            if (psd_rank(apply(m, rho), tol) < d) sampled_sp = false;
        }
        CHECK(sp == sampled_sp);
    }
    CHECK(positives > 0); // corpus exercises both answers
}

TEST_CASE("rank subadditivity under partial traces") {
    Rng rng(209);
    for (int trial = 0; trial < 60; ++trial) {
        const int da = 2 + int(rng.integer() % 2);
        const int db = 2 + int(rng.integer() % 2);
        const int r = 1 + int(rng.integer() % (da * db));
        CMat rho = rng.psd(da * db, r);
        const int full = psd_rank(rho, tol);
        const int ra = psd_rank(ptrace_second(rho, da, db), tol);
        const int rb = psd_rank(ptrace_first(rho, da, db), tol);
        CHECK(full <= ra * rb);
    }
}

TEST_CASE("flag preservation under products") {
    Rng rng(210);
    for (int trial = 0; trial < 10; ++trial) {
        CPMap a = gen::random_channel(2, 2, rng.integer());
        CPMap b = gen::random_channel(2, 3, rng.integer());
        CHECK(classify_map(convex_mix(a, b, 0.3), tol).trace_preserving);
        CHECK(classify_map(compose(b, a), tol).trace_preserving);

        CPMap ba = gen::random_bistochastic(2, 2, rng.integer());
        CPMap bb = gen::random_bistochastic(3, 3, rng.integer());
        CHECK(classify_map(tensor(ba, bb), tol).bistochastic);
    }
}
