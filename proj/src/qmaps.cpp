#include "qoptk/qmaps.hpp"

#include <algorithm>
#include <cmath>

namespace qoptk {

CPMap identity_map(int d) {
    CPMap m;
    m.dim_in = d;
    m.dim_out = d;
    m.kraus.push_back(CMat::identity(d));
    return m;
}

CPMap cpmap_from_kraus(std::vector<CMat> kraus) {
    if (kraus.empty()) throw DimMismatch("cpmap_from_kraus: empty Kraus list");
    CPMap m;
    m.dim_out = kraus.front().rows();
    m.dim_in = kraus.front().cols();
    for (const CMat& k : kraus)
        if (k.rows() != m.dim_out || k.cols() != m.dim_in)
            throw DimMismatch("cpmap_from_kraus: inconsistent Kraus shapes");
    m.kraus = std::move(kraus);
    return m;
}

CMat apply(const CPMap& map, const CMat& a) {
    if (a.rows() != map.dim_in || a.cols() != map.dim_in)
        throw DimMismatch("apply: operand must be dim_in square");
    CMat out(map.dim_out, map.dim_out);
    for (const CMat& k : map.kraus) {
        CMat ka = k * a;
        CMat kadj = k.adjoint();
        kernels::active().matmul_acc(out.data(), ka.data(), kadj.data(), map.dim_out, map.dim_in,
                                     map.dim_out);
    }
    return out;
}

CPMap dual(const CPMap& map) {
    CPMap d;
    d.dim_in = map.dim_out;
    d.dim_out = map.dim_in;
    d.kraus.reserve(map.kraus.size());
    for (const CMat& k : map.kraus) d.kraus.push_back(k.adjoint());
    return d;
}

CMat kraus_sum(const CPMap& map) {
    CMat s(map.dim_in, map.dim_in);
    for (const CMat& k : map.kraus) {
        CMat kadj = k.adjoint();
        kernels::active().matmul_acc(s.data(), kadj.data(), k.data(), map.dim_in, map.dim_out,
                                     map.dim_in);
    }
    return s;
}

CMat choi(const CPMap& map) {
    const int n = map.dim_out * map.dim_in;
    CMat j(n, n);
    for (const CMat& k : map.kraus) {
        CMat v = vec(k); // index (m, i) -> m*dim_in + i
        kernels::active().rank1_acc(j.data(), cxd(1.0, 0.0), v.data(), v.data(), n, n);
    }
    return j;
}

CMat superoperator_matrix(const CPMap& map) {
    CMat s(map.dim_out * map.dim_out, map.dim_in * map.dim_in);
    for (const CMat& k : map.kraus) s += kron(k, k.conj());
    return s;
}

CMat superop_to_choi(const CMat& s, int dim_in, int dim_out) {
    if (s.rows() != dim_out * dim_out || s.cols() != dim_in * dim_in)
        throw DimMismatch("superop_to_choi");
    CMat j(dim_out * dim_in, dim_out * dim_in);
    for (int m = 0; m < dim_out; ++m)
        for (int n = 0; n < dim_out; ++n)
            for (int i = 0; i < dim_in; ++i)
                for (int jj = 0; jj < dim_in; ++jj)
                    j(m * dim_in + i, n * dim_in + jj) = s(m * dim_out + n, i * dim_in + jj);
    return j;
}

CMat choi_to_superop(const CMat& j, int dim_in, int dim_out) {
    if (j.rows() != dim_out * dim_in || j.cols() != dim_out * dim_in)
        throw DimMismatch("choi_to_superop");
    CMat s(dim_out * dim_out, dim_in * dim_in);
    for (int m = 0; m < dim_out; ++m)
        for (int n = 0; n < dim_out; ++n)
            for (int i = 0; i < dim_in; ++i)
                for (int jj = 0; jj < dim_in; ++jj)
                    s(m * dim_out + n, i * dim_in + jj) = j(m * dim_in + i, n * dim_in + jj);
    return s;
}

namespace {

// Deterministic eigenvector phase: first entry of significant magnitude made
// real positive.
void fix_phase(CMat& v) {
    const double scale = v.max_abs();
    for (int i = 0; i < v.rows(); ++i) {
        const cxd z = v(i, 0);
        if (std::abs(z) > 1e-9 * scale) {
            const cxd ph = std::conj(z) / std::abs(z);
            for (int k = 0; k < v.rows(); ++k) v(k, 0) *= ph;
            return;
        }
    }
}

bool lex_less(const CMat& a, const CMat& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cxd x = a.data()[i], y = b.data()[i];
        if (std::abs(x.real() - y.real()) > 1e-12) return x.real() < y.real();
        if (std::abs(x.imag() - y.imag()) > 1e-12) return x.imag() < y.imag();
    }
    return false;
}

} // namespace

CPMap kraus_from_choi(const CMat& j, int dim_in, int dim_out, const Tolerances& tol) {
    if (j.rows() != dim_out * dim_in || j.cols() != dim_out * dim_in)
        throw DimMismatch("kraus_from_choi");
    EigResult e = eigh(j, tol.herm_tol);
    const int n = j.rows();
    const double wmax = e.w.empty() ? 0.0 : e.w.back();
    if (!e.w.empty() && e.w.front() < -tol.psd_tol * std::max(1.0, wmax))
        throw NotPSD("kraus_from_choi: Choi min eigenvalue " + std::to_string(e.w.front()));
    const double thresh = tol.rank_tol * std::max(1.0, wmax);

    struct Item {
        double w;
        CMat k;
    };
    std::vector<Item> items;
    for (int i = n - 1; i >= 0; --i) {
        if (e.w[i] <= thresh) break;
        CMat v(n, 1);
        for (int r = 0; r < n; ++r) v(r, 0) = e.V(r, i);
        fix_phase(v);
        CMat k = unvec(v, dim_out, dim_in);
        k *= cxd(std::sqrt(e.w[i]), 0.0);
        items.push_back({e.w[i], std::move(k)});
    }
    if (items.empty()) throw NotPSD("kraus_from_choi: zero map (no eigenvalue above threshold)");
    std::stable_sort(items.begin(), items.end(), [&](const Item& a, const Item& b) {
        if (std::abs(a.w - b.w) > 1e-11 * std::max(1.0, wmax)) return a.w > b.w;
        return lex_less(a.k, b.k);
    });

    CPMap m;
    m.dim_in = dim_in;
    m.dim_out = dim_out;
    for (Item& it : items) m.kraus.push_back(std::move(it.k));
    return m;
}

CPMap canonical(const CPMap& map, const Tolerances& tol) {
    return kraus_from_choi(choi(map), map.dim_in, map.dim_out, tol);
}

CPMap tensor(const CPMap& m1, const CPMap& m2) {
    CPMap r;
    r.dim_in = m1.dim_in * m2.dim_in;
    r.dim_out = m1.dim_out * m2.dim_out;
    for (const CMat& a : m1.kraus)
        for (const CMat& b : m2.kraus) r.kraus.push_back(kron(a, b));
    return r;
}

CPMap compose(const CPMap& m2, const CPMap& m1) {
    if (m1.dim_out != m2.dim_in) throw DimMismatch("compose: m1.dim_out != m2.dim_in");
    CPMap r;
    r.dim_in = m1.dim_in;
    r.dim_out = m2.dim_out;
    for (const CMat& l : m2.kraus)
        for (const CMat& k : m1.kraus) r.kraus.push_back(l * k);
    return r;
}

CPMap convex_mix(const CPMap& m1, const CPMap& m2, double lambda) {
    if (m1.dim_in != m2.dim_in || m1.dim_out != m2.dim_out)
        throw DimMismatch("convex_mix: dimension mismatch");
    if (lambda < 0.0 || lambda > 1.0) throw PreconditionUnmet("convex_mix: lambda outside [0,1]");
    CPMap r;
    r.dim_in = m1.dim_in;
    r.dim_out = m1.dim_out;
    for (const CMat& k : m1.kraus) {
        CMat s = k;
        s *= cxd(std::sqrt(lambda), 0.0);
        r.kraus.push_back(std::move(s));
    }
    for (const CMat& k : m2.kraus) {
        CMat s = k;
        s *= cxd(std::sqrt(1.0 - lambda), 0.0);
        r.kraus.push_back(std::move(s));
    }
    return r;
}

bool is_trace_preserving(const CPMap& map, double trace_tol) {
    CMat s = kraus_sum(map);
    CMat diff = s - CMat::identity(map.dim_in);
    return diff.max_abs() <= trace_tol;
}

bool is_operation(const CPMap& map, double psd_tol) {
    CMat s = kraus_sum(map);
    CMat gap = CMat::identity(map.dim_in) - s;
    EigResult e = eigh(gap, 1e-6);
    return e.w.empty() || e.w.front() >= -psd_tol;
}

CMat clamp_to_effect(const CMat& e, const Tolerances& tol) {
    EigResult eg = eigh(e, tol.herm_tol);
    const int n = e.rows();
    for (double w : eg.w)
        if (w < -tol.eff_tol || w > 1.0 + tol.eff_tol)
            throw NotSubunital("effect eigenvalue " + std::to_string(w) + " outside [0,1]");
    CMat r(n, n);
    for (int i = 0; i < n; ++i) {
        const double w = std::clamp(eg.w[i], 0.0, 1.0);
        if (w == 0.0) continue;
        CMat v(n, 1);
        for (int k = 0; k < n; ++k) v(k, 0) = eg.V(k, i);
        kernels::active().rank1_acc(r.data(), cxd(w, 0.0), v.data(), v.data(), n, n);
    }
    return r;
}

MapClassification classify_map(const CPMap& map, const Tolerances& tol) {
    MapClassification c;

    CMat s = kraus_sum(map);
    CMat tp_diff = s - CMat::identity(map.dim_in);
    c.trace_preserving_margin = -tp_diff.max_abs();
    c.trace_preserving = tp_diff.max_abs() <= tol.trace_tol;
    c.compatible_effect = clamp_to_effect(s, tol);

    CMat phi1 = apply(map, CMat::identity(map.dim_in));
    c.strictly_positive = is_strictly_positive_op(phi1, tol, &c.strictly_positive_margin);
    if (map.is_square()) {
        CMat un_diff = phi1 - CMat::identity(map.dim_out);
        c.unital_margin = -un_diff.max_abs();
        c.unital = un_diff.max_abs() <= tol.trace_tol;
    }
    c.bistochastic = c.trace_preserving && c.unital;

    EigResult ce = eigh(choi(map), tol.herm_tol);
    const double wmax = ce.w.empty() ? 0.0 : ce.w.back();
    const double thresh = tol.rank_tol * std::max(1.0, wmax);
    int choi_rank = 0;
    for (double w : ce.w)
        if (w > thresh) ++choi_rank;
    c.purity_preserving = (choi_rank == 1);
    c.purity_margin = ce.w.size() >= 2 ? ce.w[ce.w.size() - 2] : 0.0;
    return c;
}

} // namespace qoptk
