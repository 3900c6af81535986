#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "qoptk/measurements.hpp"

using namespace qoptk;
using namespace qoptk::test;

namespace {

const Tolerances tol;

ScalingConfig cfg() {
    ScalingConfig c;
    return c;
}

Observable sharp_basis_observable(int d) {
    Observable obs;
    for (int i = 0; i < d; ++i) {
        obs.labels.push_back(std::to_string(i));
        obs.effects.push_back(projector(basis_ket(d, i)));
    }
    return obs;
}

Observable indefinite_pair() {
    Observable obs;
    obs.labels = {"a", "b"};
    obs.effects = {diag({0.75, 0.25}), diag({0.25, 0.75})};
    return obs;
}

// {3/4 |0><0|, 1/4 |+><+|, complement}: a genuinely non-commutative
// observable needs at least three outcomes (binary ones always commute).
Observable noncommutative_triple() {
    CMat e0 = diag({0.75, 0.0});
    CMat e1 = projector(ket({1.0, 1.0}));
    e1 *= cxd(0.25, 0.0);
    Observable obs;
    obs.labels = {"a", "b", "c"};
    obs.effects = {e0, e1, CMat::identity(2) - e0 - e1};
    return obs;
}

std::vector<HierarchyVerdict> per_op_verdicts(const Instrument& inst) {
    std::vector<HierarchyVerdict> v;
    for (const CPMap& op : inst.operations) v.push_back(operation_hierarchy(op, cfg()));
    return v;
}

} // namespace

TEST_CASE("classify_observable") {
    SUBCASE("qutrit pair: commutative norm-1, neither sharp nor indefinite") {
        ObservableClass c = classify_observable(gen::qutrit_remark_observable(), tol);
        CHECK(c.norm_one);
        CHECK(c.commutative);
        CHECK_FALSE(c.sharp);
        CHECK_FALSE(c.indefinite);
        CHECK_FALSE(c.trivial);
    }
    SUBCASE("diagonal indefinite pair") {
        ObservableClass c = classify_observable(indefinite_pair(), tol);
        CHECK(c.indefinite);
        CHECK(c.commutative);
        CHECK_FALSE(c.norm_one);
        CHECK_FALSE(c.sharp);
    }
    SUBCASE("computational projectors are sharp") {
        ObservableClass c = classify_observable(sharp_basis_observable(3), tol);
        CHECK(c.sharp);
        CHECK(c.commutative);
        CHECK(c.norm_one);
    }
    SUBCASE("validation rejects non-normalised families") {
        Observable bad;
        bad.labels = {"x"};
        bad.effects = {diag({0.5, 0.5})};
        CHECK_THROWS_AS(validate_observable(bad, tol), NotNormalized);
    }
}

TEST_CASE("compatible_observable") {
    SUBCASE("qutrit instrument recovers E_±") {
        Observable obs = compatible_observable(gen::qutrit_remark_instrument(), tol);
        check_close(obs.effects[0], gen::qutrit_remark_observable().effects[0], 1e-12, "E_+");
        check_close(obs.effects[1], gen::qutrit_remark_observable().effects[1], 1e-12, "E_-");
    }
    SUBCASE("Lüders instruments are compatible with their observable") {
        Observable obs = gen::random_strictly_positive_povm(3, 3, 61);
        Instrument lud = gen::luders_instrument(obs, tol);
        Observable back = compatible_observable(lud, tol);
        for (int x = 0; x < 3; ++x) check_close(back.effects[x], obs.effects[x], 1e-10, "E_x");
    }
    SUBCASE("measure-and-prepare instruments recover the measured effects") {
        Rng rng(601);
        Observable obs = gen::random_strictly_positive_povm(2, 2, 62);
        Instrument inst;
        inst.labels = obs.labels;
        for (const CMat& e : obs.effects)
            inst.operations.push_back(gen::measure_and_prepare(e, rng.density(2, 2), tol));
        Observable back = compatible_observable(inst, tol);
        for (int x = 0; x < 2; ++x) check_close(back.effects[x], obs.effects[x], 1e-10, "E_x");
    }
}

TEST_CASE("the four disturbance grades on the qutrit example") {
    Instrument q = gen::qutrit_remark_instrument();
    DisturbanceReport rep = disturbance_report(q, tol);
    CHECK_FALSE(rep.repeatable.holds);
    CHECK(rep.first_kind.holds);
    CHECK(rep.value_reproducible.holds);
    CHECK(rep.ideal.holds);
    // I_+*(E_-) = (tr E_- / 6)|0><0| = (1/4)|0><0|: residual 1/4 exactly
    CHECK(rep.repeatable.residuals[0] == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("is_repeatable") {
    SUBCASE("Lüders of a sharp observable is repeatable") {
        Instrument lud = gen::luders_instrument(sharp_basis_observable(3), tol);
        CHECK(is_repeatable(lud, tol).holds);
    }
    SUBCASE("strictly positive instruments are never repeatable") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            Instrument inst = gen::random_instrument(2 + int(seed % 2), 2, seed);
            CHECK_FALSE(is_repeatable(inst, tol).holds);
        }
    }
}

TEST_CASE("is_first_kind") {
    SUBCASE("Lüders of an indefinite commutative observable") {
        Instrument lud = gen::luders_instrument(indefinite_pair(), tol);
        CHECK(is_first_kind(lud, tol).holds);
    }
    SUBCASE("Lüders of a non-commutative observable is not first-kind") {
        Instrument lud = gen::luders_instrument(noncommutative_triple(), tol);
        CHECK_FALSE(is_first_kind(lud, tol).holds);
    }
    SUBCASE("operator identity agrees with the trace route on random instruments") {
        Rng rng(602);
        for (int trial = 0; trial < 50; ++trial) {
            const int d = 2 + int(trial % 2);
            Instrument inst =
                (trial % 3 == 0)
                    ? gen::luders_instrument(
                          gen::random_indefinite_commutative_observable(d, 2, rng.integer()),
                          tol)
                    : gen::random_instrument(d, 2, rng.integer());
            const bool op_route = is_first_kind(inst, tol).holds;
            // trace route over an informationally complete family
            Observable obs = compatible_observable(inst, tol);
            CPMap total = total_channel(inst);
            bool trace_route = true;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    CMat basis = ketbra(basis_ket(d, i), basis_ket(d, j));
                    for (const CMat& e : obs.effects) {
                        const cxd lhs = (apply(total, basis) * e).trace();
                        const cxd rhs = (basis * e).trace();
                        if (std::abs(lhs - rhs) > 1e-9) trace_route = false;
                    }
                }
            CHECK(op_route == trace_route);
        }
    }
}

TEST_CASE("is_value_reproducible and is_ideal") {
    SUBCASE("projective Lüders at d=2 is value reproducible and ideal") {
        Instrument lud = gen::luders_instrument(sharp_basis_observable(2), tol);
        CHECK(is_value_reproducible(lud, tol).holds);
        CHECK(is_ideal(lud, tol).holds);
    }
    SUBCASE("sharp-observable instruments with strictly positive operations are not") {
        Rng rng(603);
        Observable sharp = sharp_basis_observable(2);
        Instrument inst;
        inst.labels = sharp.labels;
        for (const CMat& e : sharp.effects)
            inst.operations.push_back(gen::measure_and_prepare(e, rng.density(2, 2), tol));
        CHECK_FALSE(is_value_reproducible(inst, tol).holds);
        CHECK_FALSE(is_repeatable(inst, tol).holds);
    }
    SUBCASE("indefinite observables fail the norm-1 precondition") {
        Instrument lud = gen::luders_instrument(indefinite_pair(), tol);
        PropertyResult r = is_ideal(lud, tol);
        CHECK_FALSE(r.holds);
        CHECK(r.reason == "NotNormOne");
        CHECK_FALSE(is_value_reproducible(lud, tol).holds);
    }
}

TEST_CASE("implication chain on a mixed corpus") {
    Rng rng(604);
    std::vector<Instrument> corpus;
    corpus.push_back(gen::qutrit_remark_instrument());
    corpus.push_back(gen::luders_instrument(sharp_basis_observable(2), tol));
    corpus.push_back(gen::luders_instrument(indefinite_pair(), tol));
    corpus.push_back(gen::luders_instrument(noncommutative_triple(), tol));
    for (int i = 0; i < 8; ++i)
        corpus.push_back(gen::random_instrument(2 + (i % 2), 2 + (i % 2), rng.integer()));

    for (const Instrument& inst : corpus) {
        DisturbanceReport rep = disturbance_report(inst, tol);
        ObservableClass oc = classify_observable(compatible_observable(inst, tol), tol);
        if (rep.repeatable.holds) CHECK(rep.first_kind.holds);
        if (rep.first_kind.holds && oc.norm_one) CHECK(rep.value_reproducible.holds);
        if (rep.ideal.holds) CHECK(rep.value_reproducible.holds);
        if (oc.sharp) {
            CHECK(rep.repeatable.holds == rep.first_kind.holds);
            CHECK(rep.first_kind.holds == rep.value_reproducible.holds);
        }
    }
}

TEST_CASE("Thm 5 structure: first-kind with strictly positive fixed state") {
    Rng rng(605);
    for (int trial = 0; trial < 10; ++trial) {
        Observable obs =
            gen::random_indefinite_commutative_observable(2 + (trial % 2), 2, rng.integer());
        Instrument lud = gen::luders_instrument(obs, tol);
        // Lüders total channel of a commutative observable is bistochastic.
        CHECK(classify_map(total_channel(lud), tol).bistochastic);
        if (is_first_kind(lud, tol).holds) {
            ObservableClass oc = classify_observable(obs, tol);
            CHECK(oc.indefinite);
            CHECK(oc.commutative);
        }
    }
    // contrapositive exercise: non-commutative Lüders is never first-kind
    Instrument lud = gen::luders_instrument(noncommutative_triple(), tol);
    CHECK(classify_map(total_channel(lud), tol).bistochastic);
    CHECK_FALSE(is_first_kind(lud, tol).holds);
}

TEST_CASE("nogo_audit") {
    Instrument q = gen::qutrit_remark_instrument();
    std::vector<HierarchyVerdict> verdicts = per_op_verdicts(q);
    HierarchyVerdict channel_v = channel_hierarchy(total_channel(q), cfg());
    DisturbanceReport rep = disturbance_report(q, tol);

    SUBCASE("qutrit example is fully consistent") {
        InstrumentTiers tiers = instrument_tiers(q, verdicts, channel_v, tol);
        CHECK(tiers.class_I == Tier::InClass);
        CHECK(tiers.class_II == Tier::NotInClass);
        CHECK(nogo_audit(q, verdicts, channel_v, rep, tol).empty());
    }
    SUBCASE("forcing class II onto the qutrit instrument names the class-II clauses") {
        std::vector<HierarchyVerdict> corrupted = verdicts;
        for (HierarchyVerdict& v : corrupted) {
            v.class_II = Tier::InClass;
            v.rank_decision.verdict = Verdict3::Yes;
            v.effect_class.indefinite = true;
            v.has_fixed_point = false;
        }
        auto conflicts = nogo_audit(q, corrupted, channel_v, rep, tol);
        REQUIRE(conflicts.size() == 3);
        CHECK(conflicts[0].find("no-ideal-in-class-II") != std::string::npos);
        CHECK(conflicts[1].find("no-value-reproducible-in-class-II") != std::string::npos);
        CHECK(conflicts[2].find("first-kind-needs-indefinite-in-class-II") != std::string::npos);
    }
    SUBCASE("single-outcome instruments carry their channel's tiers") {
        Instrument single;
        single.labels = {"only"};
        single.operations = {gen::random_bistochastic(2, 2, 73)};
        std::vector<HierarchyVerdict> v = per_op_verdicts(single);
        HierarchyVerdict cv = channel_hierarchy(total_channel(single), cfg());
        InstrumentTiers tiers = instrument_tiers(single, v, cv, tol);
        CHECK(tiers.class_I == Tier::InClass);
        CHECK(tiers.class_II == Tier::InClass);
        CHECK(tiers.class_III == Tier::InClass);
    }
    SUBCASE("swap-built instruments reach class III only with a common preparation") {
        Rng rng(607);
        Observable povm = gen::random_strictly_positive_povm(2, 2, 71);
        CMat xi_a = rng.density(2, 2);
        xi_a += 0.2 * CMat::identity(2);
        xi_a *= cxd(1.0 / xi_a.trace().real(), 0.0);
        CMat xi_b = rng.density(2, 2);
        xi_b += 0.4 * CMat::identity(2);
        xi_b *= cxd(1.0 / xi_b.trace().real(), 0.0);

        auto build = [&](const CMat& x0, const CMat& x1) {
            Instrument inst;
            inst.labels = povm.labels;
            inst.operations = {gen::measure_and_prepare(povm.effects[0], x0, tol),
                               gen::measure_and_prepare(povm.effects[1], x1, tol)};
            return inst;
        };
        Instrument common = build(xi_a, xi_a);
        Instrument split = build(xi_a, xi_b);
        auto tiers_of = [&](const Instrument& inst) {
            std::vector<HierarchyVerdict> v = per_op_verdicts(inst);
            return instrument_tiers(inst, v, channel_hierarchy(total_channel(inst), cfg()),
                                    tol);
        };
        CHECK(tiers_of(common).class_III == Tier::InClass);
        CHECK(tiers_of(split).class_III == Tier::Unknown);
    }
    SUBCASE("class-II Lüders of an indefinite commutative observable is consistent") {
        Instrument lud = gen::luders_instrument(indefinite_pair(), tol);
        std::vector<HierarchyVerdict> lv = per_op_verdicts(lud);
        HierarchyVerdict lcv = channel_hierarchy(total_channel(lud), cfg());
        InstrumentTiers tiers = instrument_tiers(lud, lv, lcv, tol);
        CHECK(tiers.class_II == Tier::InClass);
        CHECK(nogo_audit(lud, lv, lcv, disturbance_report(lud, tol), tol).empty());
    }
}

TEST_CASE("conserved_quantity_audit mechanics") {
    Rng rng(606);
    CMat h = rng.hermitian(2);
    // SWAP conserves H ⊗ 1 + 1 ⊗ H when both parts are equal.
    CPMap swap_ch;
    swap_ch.dim_in = 4;
    swap_ch.dim_out = 4;
    {
        CMat s(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) s(i * 2 + j, j * 2 + i) = 1.0;
        swap_ch.kraus.push_back(std::move(s));
    }
    CMat xi = rng.density(2, 2);
    xi += 0.1 * CMat::identity(2);
    xi *= cxd(1.0 / xi.trace().real(), 0.0);

    SUBCASE("vacuous when the measurement is not first-kind") {
        CHECK(conserved_quantity_audit(swap_ch, h, h, xi, noncommutative_triple(), false, tol)
                  .empty());
    }
    SUBCASE("fires on non-commuting effects when first-kind is claimed") {
        auto conflicts =
            conserved_quantity_audit(swap_ch, gen::pauli_z(), gen::pauli_z(), xi,
                                     noncommutative_triple(), true, tol);
        CHECK(conflicts.size() == 2);
    }
    SUBCASE("quiet when effects commute with H_S") {
        auto conflicts = conserved_quantity_audit(swap_ch, gen::pauli_z(), gen::pauli_z(), xi,
                                                  indefinite_pair(), true, tol);
        CHECK(conflicts.empty());
    }
}
