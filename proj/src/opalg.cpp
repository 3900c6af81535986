#include "qoptk/opalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qoptk {

namespace {

double hermiticity_defect(const CMat& a) {
    double m = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i; j < a.cols(); ++j)
            m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
    return m;
}

} // namespace

EigResult eigh(const CMat& a, double herm_tol) {
    if (!a.is_square()) throw DimMismatch("eigh: matrix not square");
    const int n = a.rows();
    const double scale = std::max(1.0, a.max_abs());
    if (hermiticity_defect(a) > herm_tol * scale)
        throw NotHermitian("eigh: ||A - A'|| exceeds herm_tol");

    // Symmetrise, then cyclic complex Jacobi sweeps.
    CMat h(n, n);
    for (int i = 0; i < n; ++i) {
        h(i, i) = cxd(a(i, i).real(), 0.0);
        for (int j = i + 1; j < n; ++j) {
            const cxd v = 0.5 * (a(i, j) + std::conj(a(j, i)));
            h(i, j) = v;
            h(j, i) = std::conj(v);
        }
    }
    // Eigenvectors as rows (w = V^T) so every rotation touches contiguous
    // memory; with H' Hermitian, the column halves of the two-sided update
    // follow from the row halves by conjugation.
    CMat w = CMat::identity(n);

    const double fro = std::max(1.0, h.fro_norm());
    const double stop = 1e-15 * fro;
    const double skip = 1e-18 * fro;
    const auto& kern = kernels::active();

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(h(p, q));
        if (std::sqrt(2.0 * off) <= stop) break;

        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const cxd b = h(p, q);
                const double ab = std::abs(b);
                if (ab <= skip) continue;

                const cxd phase = b / ab;
                const double hpp = h(p, p).real(), hqq = h(q, q).real();
                const double tau = (hqq - hpp) / (2.0 * ab);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const cxd sig = (t * c) * phase;

                kern.rot(h.data() + std::size_t(p) * n, h.data() + std::size_t(q) * n,
                         std::size_t(n), c, -sig);
                h(p, p) = hpp - t * ab;
                h(q, q) = hqq + t * ab;
                h(p, q) = 0.0;
                h(q, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    h(k, p) = std::conj(h(p, k));
                    h(k, q) = std::conj(h(q, k));
                }
                kern.rot(w.data() + std::size_t(p) * n, w.data() + std::size_t(q) * n,
                         std::size_t(n), c, -std::conj(sig));
            }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return h(x, x).real() < h(y, y).real(); });

    EigResult r;
    r.w.resize(n);
    r.V = CMat(n, n);
    for (int col = 0; col < n; ++col) {
        r.w[col] = h(order[col], order[col]).real();
        for (int k = 0; k < n; ++k) r.V(k, col) = w(order[col], k);
    }
    return r;
}

SvdResult svd(const CMat& m) {
    const int rows = m.rows(), cols = m.cols();
    const int n = rows + cols;
    CMat h(n, n);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            h(i, rows + j) = m(i, j);
            h(rows + j, i) = std::conj(m(i, j));
        }
    EigResult e = eigh(h, 1.0);

    SvdResult r;
    const double smax = e.w.empty() ? 0.0 : std::max(std::abs(e.w.front()), std::abs(e.w.back()));
    const double floor = 1e-13 * std::max(1.0, smax);
    std::vector<int> keep;
    for (int i = n - 1; i >= 0; --i)
        if (e.w[i] > floor) keep.push_back(i); // descending positives
    const int rank = int(keep.size());
    r.s.resize(rank);
    r.U = CMat(rows, rank);
    r.V = CMat(cols, rank);
    const double rt2 = std::sqrt(2.0);
    for (int c = 0; c < rank; ++c) {
        r.s[c] = e.w[keep[c]];
        for (int i = 0; i < rows; ++i) r.U(i, c) = rt2 * e.V(i, keep[c]);
        for (int j = 0; j < cols; ++j) r.V(j, c) = rt2 * e.V(rows + j, keep[c]);
    }
    return r;
}

CMat nullspace(const CMat& m, double tol) {
    const int rows = m.rows(), cols = m.cols();
    const int n = rows + cols;
    CMat h(n, n);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            h(i, rows + j) = m(i, j);
            h(rows + j, i) = std::conj(m(i, j));
        }
    EigResult e = eigh(h, 1.0);
    const double smax = e.w.empty() ? 0.0 : std::max(std::abs(e.w.front()), std::abs(e.w.back()));
    const double thresh = tol * std::max(1.0, smax);

    std::vector<CMat> vparts;
    for (int i = 0; i < n; ++i) {
        if (std::abs(e.w[i]) > thresh) continue;
        CMat v(cols, 1);
        for (int j = 0; j < cols; ++j) v(j, 0) = e.V(rows + j, i);
        vparts.push_back(std::move(v));
    }
    std::vector<CMat> onb = orthonormalize_span(vparts, 1e-8);
    CMat r(cols, int(onb.size()));
    for (int c = 0; c < int(onb.size()); ++c)
        for (int j = 0; j < cols; ++j) r(j, c) = onb[c](j, 0);
    return r;
}

int psd_rank(const CMat& a, const Tolerances& tol) {
    EigResult e = eigh(a, tol.herm_tol);
    const double wmax = e.w.empty() ? 0.0 : e.w.back();
    if (!e.w.empty() && e.w.front() < -tol.psd_tol * std::max(1.0, wmax))
        throw NotPSD("psd_rank: min eigenvalue " + std::to_string(e.w.front()));
    const double thresh = tol.rank_tol * std::max(1.0, wmax);
    int r = 0;
    for (double w : e.w)
        if (w > thresh) ++r;
    return r;
}

CMat support_projection(const CMat& a, const Tolerances& tol) {
    EigResult e = eigh(a, tol.herm_tol);
    const int n = a.rows();
    const double wmax = e.w.empty() ? 0.0 : e.w.back();
    if (!e.w.empty() && e.w.front() < -tol.psd_tol * std::max(1.0, wmax))
        throw NotPSD("support_projection: min eigenvalue " + std::to_string(e.w.front()));
    const double thresh = tol.rank_tol * std::max(1.0, wmax);
    CMat p(n, n);
    for (int i = 0; i < n; ++i) {
        if (e.w[i] <= thresh) continue;
        CMat v(n, 1);
        for (int k = 0; k < n; ++k) v(k, 0) = e.V(k, i);
        kernels::active().rank1_acc(p.data(), cxd(1.0, 0.0), v.data(), v.data(), n, n);
    }
    return p;
}

bool is_strictly_positive_op(const CMat& a, const Tolerances& tol, double* margin) {
    EigResult e = eigh(a, tol.herm_tol);
    const double wmin = e.w.empty() ? 0.0 : e.w.front();
    const double wmax = e.w.empty() ? 0.0 : e.w.back();
    if (margin != nullptr) *margin = wmin;
    return wmin > tol.rank_tol * std::max(1.0, wmax);
}

CMat sqrt_psd(const CMat& a, const Tolerances& tol) {
    EigResult e = eigh(a, tol.herm_tol);
    const int n = a.rows();
    const double wmax = e.w.empty() ? 0.0 : e.w.back();
    if (!e.w.empty() && e.w.front() < -tol.psd_tol * std::max(1.0, wmax))
        throw NotPSD("sqrt_psd: min eigenvalue " + std::to_string(e.w.front()));
    CMat r(n, n);
    for (int i = 0; i < n; ++i) {
        const double w = std::max(e.w[i], 0.0);
        if (w == 0.0) continue;
        CMat v(n, 1);
        for (int k = 0; k < n; ++k) v(k, 0) = e.V(k, i);
        kernels::active().rank1_acc(r.data(), cxd(std::sqrt(w), 0.0), v.data(), v.data(), n, n);
    }
    return r;
}

CMat inv_sqrt_psd(const CMat& a, double herm_tol, double floor) {
    EigResult e = eigh(a, herm_tol);
    const int n = a.rows();
    CMat r(n, n);
    for (int i = 0; i < n; ++i) {
        if (e.w[i] < floor)
            throw SingularNormalizer("inv_sqrt_psd: eigenvalue " + std::to_string(e.w[i]) +
                                     " below floor");
        CMat v(n, 1);
        for (int k = 0; k < n; ++k) v(k, 0) = e.V(k, i);
        kernels::active().rank1_acc(r.data(), cxd(1.0 / std::sqrt(e.w[i]), 0.0), v.data(),
                                    v.data(), n, n);
    }
    return r;
}

bool AlgebraBasis::contains(const CMat& m, double tol) const {
    return span_residual(m, basis) <= tol * std::max(1.0, m.fro_norm());
}

std::vector<CMat> hermitian_basis(const std::vector<CMat>& span, double tol) {
    std::vector<CMat> parts;
    parts.reserve(2 * span.size());
    for (const CMat& b : span) {
        CMat h = b + b.adjoint();
        h *= cxd(0.5, 0.0);
        CMat k = b - b.adjoint();
        k *= cxd(0.0, -0.5);
        parts.push_back(std::move(h));
        parts.push_back(std::move(k));
    }
    std::vector<CMat> onb = orthonormalize_span(parts, tol);
    // Numerical cleanup: enforce exact hermiticity entrywise.
    for (CMat& m : onb) {
        CMat h = m + m.adjoint();
        h *= cxd(0.5, 0.0);
        m = std::move(h);
    }
    return onb;
}

AlgebraBasis algebra_closure(const std::vector<CMat>& generators, int dim,
                             const Tolerances& tol) {
    for (const CMat& g : generators)
        if (g.rows() != dim || g.cols() != dim)
            throw DimMismatch("algebra_closure: generator size");

    std::vector<CMat> seed;
    seed.push_back(CMat::identity(dim));
    for (const CMat& g : generators) {
        seed.push_back(g);
        seed.push_back(g.adjoint());
    }
    std::vector<CMat> onb = orthonormalize_span(seed, tol.span_tol);

    const int cap = dim * dim;
    std::size_t fresh_from = 0; // elements at index >= fresh_from are new this pass
    while (int(onb.size()) < cap) {
        const std::size_t old_size = onb.size();
        const std::size_t scan_from = fresh_from;
        bool grew = false;
        for (std::size_t i = 0; i < old_size && int(onb.size()) < cap; ++i)
            for (std::size_t j = 0; j < old_size && int(onb.size()) < cap; ++j) {
                if (scan_from > 0 && i < scan_from && j < scan_from) continue;
                CMat p = onb[i] * onb[j];
                const double pn = p.fro_norm();
                if (pn <= tol.span_tol) continue;
                for (int rep = 0; rep < 2; ++rep)
                    for (const CMat& b : onb) {
                        const cxd ov = fro_inner(b, p);
                        kernels::active().axpy(p.data(), -ov, b.data(), p.size());
                    }
                const double res = p.fro_norm();
                if (res > tol.span_tol * std::max(1.0, pn)) {
                    p *= cxd(1.0 / res, 0.0);
                    onb.push_back(std::move(p));
                    grew = true;
                }
            }
        if (!grew) break;
        fresh_from = old_size;
    }

    AlgebraBasis r;
    r.dim = dim;
    r.basis = hermitian_basis(onb, tol.span_tol);
    return r;
}

AlgebraBasis commutant(const AlgebraBasis& alg, const Tolerances& tol) {
    const int d = alg.dim;
    const int n = d * d;
    const CMat id = CMat::identity(d);
    CMat nmat(n, n);
    for (const CMat& a : alg.basis) {
        CMat c = kron(id, a.transpose()) - kron(a, id);
        CMat cc = c.adjoint() * c;
        nmat += cc;
    }
    EigResult e = eigh(nmat, 1e-6);
    const double wmax = e.w.empty() ? 0.0 : std::max(0.0, e.w.back());
    const double thresh = tol.span_tol * std::max(1.0, wmax);

    std::vector<CMat> null_mats;
    for (int i = 0; i < n; ++i) {
        if (e.w[i] > thresh) continue;
        CMat v(n, 1);
        for (int k = 0; k < n; ++k) v(k, 0) = e.V(k, i);
        null_mats.push_back(unvec(v, d, d));
    }
    AlgebraBasis r;
    r.dim = d;
    r.basis = hermitian_basis(null_mats, tol.span_tol);
    return r;
}

AlgebraBasis span_intersection(const AlgebraBasis& a, const AlgebraBasis& b,
                               const Tolerances& tol) {
    if (a.dim != b.dim) throw DimMismatch("span_intersection");
    const int d = a.dim;
    const int n = d * d;
    // null((1-Pa) + (1-Pb)) = range(Pa) ∩ range(Pb)
    CMat nmat = 2.0 * CMat::identity(n);
    for (const CMat& m : a.basis) {
        CMat v = vec(m);
        kernels::active().rank1_acc(nmat.data(), cxd(-1.0, 0.0), v.data(), v.data(), n, n);
    }
    for (const CMat& m : b.basis) {
        CMat v = vec(m);
        kernels::active().rank1_acc(nmat.data(), cxd(-1.0, 0.0), v.data(), v.data(), n, n);
    }
    EigResult e = eigh(nmat, 1e-6);
    std::vector<CMat> null_mats;
    for (int i = 0; i < n; ++i) {
        if (e.w[i] > tol.span_tol) continue;
        CMat v(n, 1);
        for (int k = 0; k < n; ++k) v(k, 0) = e.V(k, i);
        null_mats.push_back(unvec(v, d, d));
    }
    AlgebraBasis r;
    r.dim = d;
    r.basis = hermitian_basis(null_mats, tol.span_tol);
    return r;
}

std::vector<CMat> center_projections(const AlgebraBasis& alg, const Tolerances& tol,
                                     std::uint64_t seed) {
    const int d = alg.dim;
    AlgebraBasis z = span_intersection(alg, commutant(alg, tol), tol);
    if (z.basis.empty()) throw DegenerateCenter("center is empty (algebra lacks a unit?)");

    Rng rng(seed);
    std::string last_issue;
    for (int attempt = 0; attempt < 3; ++attempt) {
        CMat g(d, d);
        for (const CMat& h : z.basis) {
            CMat t = h;
            t *= cxd(rng.normal(), 0.0);
            g += t;
        }
        EigResult e = eigh(g, 1e-6);
        const double spread = std::max(1.0, std::abs(e.w.back() - e.w.front()));
        const double split = 1e-7 * spread;

        // Redraw when some gap sits in the ambiguous band around the split point.
        bool ambiguous = false;
        for (int i = 0; i + 1 < d; ++i) {
            const double gap = e.w[i + 1] - e.w[i];
            if (gap > split && gap < 10.0 * split) ambiguous = true;
        }
        if (ambiguous) {
            last_issue = "eigenvalue gap in ambiguous band";
            continue;
        }

        std::vector<CMat> projs;
        int lo = 0;
        bool valid = true;
        for (int i = 0; i < d; ++i) {
            if (i + 1 < d && e.w[i + 1] - e.w[i] <= split) continue;
            CMat p(d, d);
            for (int c = lo; c <= i; ++c) {
                CMat v(d, 1);
                for (int k = 0; k < d; ++k) v(k, 0) = e.V(k, c);
                kernels::active().rank1_acc(p.data(), cxd(1.0, 0.0), v.data(), v.data(), d, d);
            }
            if (!z.contains(p, 1e-5)) valid = false;
            projs.push_back(std::move(p));
            lo = i + 1;
        }
        if (!valid) {
            last_issue = "eigen-grouping left the center span";
            continue;
        }
        if (int(projs.size()) != z.span_dimension()) {
            last_issue = "cluster count != center dimension";
            continue;
        }
        std::sort(projs.begin(), projs.end(), [](const CMat& x, const CMat& y) {
            const double tx = x.trace().real(), ty = y.trace().real();
            if (std::abs(tx - ty) > 1e-9) return tx > ty;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double dr = x.data()[i].real() - y.data()[i].real();
                if (std::abs(dr) > 1e-9) return dr > 0.0;
            }
            return false;
        });
        return projs;
    }
    throw DegenerateCenter("center eigen-grouping ambiguous after 3 draws: " + last_issue);
}

} // namespace qoptk
