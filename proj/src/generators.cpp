#include "qoptk/generators.hpp"

#include <cmath>

namespace qoptk {
namespace gen {

CMat pauli_x() {
    CMat m(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

CMat pauli_y() {
    CMat m(2, 2);
    m(0, 1) = cxd(0.0, -1.0);
    m(1, 0) = cxd(0.0, 1.0);
    return m;
}

CMat pauli_z() {
    CMat m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

CMat hadamard() {
    const double s = 1.0 / std::sqrt(2.0);
    CMat m(2, 2);
    m(0, 0) = s;
    m(0, 1) = s;
    m(1, 0) = s;
    m(1, 1) = -s;
    return m;
}

CPMap unitary_channel(const CMat& u) {
    if (!u.is_square()) throw DimMismatch("unitary_channel");
    CPMap m;
    m.dim_in = u.rows();
    m.dim_out = u.rows();
    m.kraus.push_back(u);
    return m;
}

CPMap luders_operation(const CMat& e, const Tolerances& tol) {
    CPMap m;
    m.dim_in = e.rows();
    m.dim_out = e.rows();
    m.kraus.push_back(sqrt_psd(clamp_to_effect(e, tol), tol));
    return m;
}

Instrument luders_instrument(const Observable& obs, const Tolerances& tol) {
    validate_observable(obs, tol);
    Instrument inst;
    inst.labels = obs.labels;
    for (const CMat& e : obs.effects) inst.operations.push_back(luders_operation(e, tol));
    return inst;
}

CPMap prepare_channel(const CMat& sigma) {
    const int d = sigma.rows();
    EigResult e = eigh(sigma, 1e-6);
    CPMap m;
    m.dim_in = d;
    m.dim_out = d;
    for (int i = 0; i < d; ++i) {
        if (e.w[i] <= 1e-15) continue;
        CMat v(d, 1);
        for (int k = 0; k < d; ++k) v(k, 0) = e.V(k, i);
        for (int j = 0; j < d; ++j) {
            CMat k = ketbra(v, basis_ket(d, j));
            k *= cxd(std::sqrt(e.w[i]), 0.0);
            m.kraus.push_back(std::move(k));
        }
    }
    return m;
}

CPMap measure_and_prepare(const CMat& e, const CMat& sigma, const Tolerances& tol) {
    // tr[E .] sigma = prepare_sigma ∘ sqrt(E) . sqrt(E) completed: Kraus
    // sqrt(w_i) |v_i><u| with |u> running over sqrt(E)-weighted basis.
    const int d = e.rows();
    CMat root_e = sqrt_psd(clamp_to_effect(e, tol), tol);
    EigResult se = eigh(sigma, tol.herm_tol);
    CPMap m;
    m.dim_in = d;
    m.dim_out = d;
    for (int i = 0; i < d; ++i) {
        if (se.w[i] <= 1e-15) continue;
        CMat v(d, 1);
        for (int k = 0; k < d; ++k) v(k, 0) = se.V(k, i);
        for (int j = 0; j < d; ++j) {
            // <row j of sqrt(E)|
            CMat u(d, 1);
            for (int k = 0; k < d; ++k) u(k, 0) = std::conj(root_e(j, k));
            CMat kr = ketbra(v, u);
            kr *= cxd(std::sqrt(se.w[i]), 0.0);
            if (kr.max_abs() > 1e-16) m.kraus.push_back(std::move(kr));
        }
    }
    return m;
}

CPMap depolarizing_channel(int d) {
    CMat mixed = CMat::identity(d);
    mixed *= cxd(1.0 / d, 0.0);
    return prepare_channel(mixed);
}

CPMap depolarize_to_pure(double lambda, const CMat& phi) {
    const int d = phi.rows();
    CMat rho = projector(phi);
    return convex_mix(identity_map(d), prepare_channel(rho), lambda);
}

Observable qutrit_remark_observable() {
    // Basis ordering (|+>, |->, |0>): E_± = |±><±| + (1/2)|0><0|.
    Observable obs;
    obs.labels = {"+", "-"};
    for (int a = 0; a < 2; ++a) {
        CMat e(3, 3);
        e(a, a) = 1.0;
        e(2, 2) = 0.5;
        obs.effects.push_back(std::move(e));
    }
    return obs;
}

Instrument qutrit_remark_instrument() {
    // I_±(.) = <±|.|±> |±><±| + <0|.|0> 1/6.
    Instrument inst;
    inst.labels = {"+", "-"};
    for (int a = 0; a < 2; ++a) {
        CPMap op;
        op.dim_in = 3;
        op.dim_out = 3;
        op.kraus.push_back(ketbra(basis_ket(3, a), basis_ket(3, a)));
        for (int i = 0; i < 3; ++i) {
            CMat k = ketbra(basis_ket(3, i), basis_ket(3, 2));
            k *= cxd(1.0 / std::sqrt(6.0), 0.0);
            op.kraus.push_back(std::move(k));
        }
        inst.operations.push_back(std::move(op));
    }
    return inst;
}

CPMap rank_drop_d3() {
    CPMap m;
    m.dim_in = 3;
    m.dim_out = 3;
    // tr[P01 .]|0><0|
    m.kraus.push_back(ketbra(basis_ket(3, 0), basis_ket(3, 0)));
    m.kraus.push_back(ketbra(basis_ket(3, 0), basis_ket(3, 1)));
    // tr[|2><2| .] 1/3
    for (int i = 0; i < 3; ++i) {
        CMat k = ketbra(basis_ket(3, i), basis_ket(3, 2));
        k *= cxd(1.0 / std::sqrt(3.0), 0.0);
        m.kraus.push_back(std::move(k));
    }
    return m;
}

CPMap random_channel(int d, int kraus_rank, std::uint64_t seed) {
    // Stinespring: isometry column-block of a Haar unitary on d * kraus_rank.
    Rng rng(seed);
    CMat u = rng.haar_unitary(d * kraus_rank);
    CPMap m;
    m.dim_in = d;
    m.dim_out = d;
    for (int e = 0; e < kraus_rank; ++e) {
        CMat k(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) k(i, j) = u(i * kraus_rank + e, j * kraus_rank + 0);
        m.kraus.push_back(std::move(k));
    }
    return m;
}

CPMap random_bistochastic(int d, int n_unitaries, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> p = rng.probability_vector(n_unitaries);
    CPMap m;
    m.dim_in = d;
    m.dim_out = d;
    for (int i = 0; i < n_unitaries; ++i) {
        CMat u = rng.haar_unitary(d);
        u *= cxd(std::sqrt(p[i]), 0.0);
        m.kraus.push_back(std::move(u));
    }
    return m;
}

Observable random_strictly_positive_povm(int d, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CMat> raw;
    CMat total(d, d);
    for (int x = 0; x < n; ++x) {
        CMat a = rng.psd(d, d);
        a += 0.2 * CMat::identity(d);
        total += a;
        raw.push_back(std::move(a));
    }
    CMat norm = inv_sqrt_psd(total, 1e-6);
    Observable obs;
    for (int x = 0; x < n; ++x) {
        obs.labels.push_back(std::to_string(x));
        obs.effects.push_back(norm * raw[x] * norm);
    }
    return obs;
}

Observable random_indefinite_commutative_observable(int d, int n, std::uint64_t seed) {
    Rng rng(seed);
    CMat u = rng.haar_unitary(d);
    std::vector<std::vector<double>> probs(d);
    for (int i = 0; i < d; ++i) {
        probs[i] = rng.probability_vector(n);
        for (double& p : probs[i]) p = 0.1 / n + 0.9 * p; // keep clear of 0 and 1
        double s = 0.0;
        for (double p : probs[i]) s += p;
        for (double& p : probs[i]) p /= s;
    }
    Observable obs;
    for (int x = 0; x < n; ++x) {
        CMat e(d, d);
        for (int i = 0; i < d; ++i) {
            CMat v(d, 1);
            for (int k = 0; k < d; ++k) v(k, 0) = u(k, i);
            kernels::active().rank1_acc(e.data(), cxd(probs[i][x], 0.0), v.data(), v.data(), d,
                                        d);
        }
        obs.labels.push_back(std::to_string(x));
        obs.effects.push_back(std::move(e));
    }
    return obs;
}

Instrument random_instrument(int d, int outcomes, std::uint64_t seed, InstrumentKind kind) {
    Tolerances tol;
    Rng rng(seed ^ 0xabcdef12u);
    Observable obs = random_strictly_positive_povm(d, outcomes, seed);
    Instrument inst;
    inst.labels = obs.labels;
    for (int x = 0; x < outcomes; ++x) {
        const bool luders = kind == InstrumentKind::Luders ||
                            (kind == InstrumentKind::Mixed && x % 2 == 1);
        if (luders) {
            inst.operations.push_back(luders_operation(obs.effects[x], tol));
        } else {
            CMat sigma = rng.density(d, d);
            sigma += 0.05 * CMat::identity(d);
            sigma *= cxd(1.0 / sigma.trace().real(), 0.0);
            inst.operations.push_back(measure_and_prepare(obs.effects[x], sigma, tol));
        }
    }
    return inst;
}

Instrument random_strong_third_instrument(int d, int outcomes, std::uint64_t seed) {
    // tr[E_x .] sigma_x with E_x indefinite and sigma_x strictly positive is
    // rank non-decreasing on both sides.
    Tolerances tol;
    Rng rng(seed ^ 0x5eed5eedu);
    Observable obs = random_strictly_positive_povm(d, outcomes, seed);
    Instrument inst;
    inst.labels = obs.labels;
    for (int x = 0; x < outcomes; ++x) {
        CMat sigma = rng.density(d, d);
        sigma += 0.05 * CMat::identity(d);
        sigma *= cxd(1.0 / sigma.trace().real(), 0.0);
        inst.operations.push_back(measure_and_prepare(obs.effects[x], sigma, tol));
    }
    return inst;
}

std::vector<std::string> generator_names() {
    return {"identity",          "unitary",
            "luders",            "prepare",
            "swap_process",      "depolarize_to_pure",
            "qutrit_remark_instrument", "rank_drop_d3",
            "random_channel",    "random_bistochastic",
            "random_instrument"};
}

} // namespace gen
} // namespace qoptk
