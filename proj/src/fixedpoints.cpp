#include "qoptk/fixedpoints.hpp"

#include <algorithm>
#include <cmath>

namespace qoptk {

namespace {

// Gaussian elimination with partial pivoting; A is n x n, B n x m; returns X
// with A X = B.
CMat solve_linear(CMat a, CMat b) {
    const int n = a.rows();
    const int m = b.cols();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a(col, col));
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > best) {
                best = std::abs(a(r, col));
                piv = r;
            }
        if (best < 1e-12) throw Error("solve_linear: singular system");
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
            for (int c = 0; c < m; ++c) std::swap(b(col, c), b(piv, c));
        }
        const cxd inv = 1.0 / a(col, col);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const cxd f = a(r, col) * inv;
            if (f == cxd(0.0, 0.0)) continue;
            for (int c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            for (int c = 0; c < m; ++c) b(r, c) -= f * b(col, c);
        }
    }
    CMat x(n, m);
    for (int r = 0; r < n; ++r) {
        const cxd inv = 1.0 / a(r, r);
        for (int c = 0; c < m; ++c) x(r, c) = b(r, c) * inv;
    }
    return x;
}

CMat shifted_superop(const CPMap& map) {
    CMat s = superoperator_matrix(map);
    return s - CMat::identity(s.rows());
}

std::vector<CMat> columns_to_matrices(const CMat& cols, int d) {
    std::vector<CMat> mats;
    for (int c = 0; c < cols.cols(); ++c) {
        CMat v(cols.rows(), 1);
        for (int r = 0; r < cols.rows(); ++r) v(r, 0) = cols(r, c);
        mats.push_back(unvec(v, d, d));
    }
    return mats;
}

} // namespace

AlgebraBasis fixed_point_basis(const CPMap& map, const Tolerances& tol) {
    if (!map.is_square()) throw DimMismatch("fixed_point_basis: map must be square");
    const int d = map.dim_in;
    CMat null_cols = nullspace(shifted_superop(map), tol.fixed_tol);
    AlgebraBasis r;
    r.dim = d;
    r.basis = hermitian_basis(columns_to_matrices(null_cols, d), tol.span_tol);
    return r;
}

CPMap average_channel(const CPMap& ch, const Tolerances& tol) {
    if (!ch.is_square()) throw DimMismatch("average_channel: channel must be square");
    if (!is_trace_preserving(ch, tol.trace_tol))
        throw NotTracePreserving("average_channel requires a channel");
    const int d = ch.dim_in;

    CMat shifted = shifted_superop(ch);
    CMat right = nullspace(shifted, tol.fixed_tol);            // S v = v
    CMat left = nullspace(shifted.adjoint(), tol.fixed_tol);   // l† S = l†
    if (right.cols() == 0 || left.cols() != right.cols())
        throw Error("average_channel: eigenvalue-1 spaces inconsistent (" +
                    std::to_string(left.cols()) + " vs " + std::to_string(right.cols()) + ")");

    // Spectral projection onto the (semisimple) eigenvalue-1 eigenspace:
    // P = R (L† R)^{-1} L†.
    CMat m = left.adjoint() * right;
    CMat coeff = solve_linear(m, left.adjoint()); // (L†R)^{-1} L†
    CMat p_super = right * coeff;

    // Cesàro-limit sanity: idempotence and absorption of the channel.
    {
        CMat s = superoperator_matrix(ch);
        if (max_abs_diff(p_super * p_super, p_super) > 1e-8)
            throw Error("average_channel: projection not idempotent");
        if (max_abs_diff(p_super * s, p_super) > 1e-8 ||
            max_abs_diff(s * p_super, p_super) > 1e-8)
            throw Error("average_channel: projection does not absorb the channel");
    }

    CMat j = superop_to_choi(p_super, d, d);
    CMat jh = j + j.adjoint();
    jh *= cxd(0.5, 0.0);
    return kraus_from_choi(jh, d, d, tol);
}

CMat minimal_support_projection(const CPMap& ch, const Tolerances& tol) {
    CPMap av = average_channel(ch, tol);
    CMat mixed = CMat::identity(ch.dim_in);
    mixed *= cxd(1.0 / ch.dim_in, 0.0);
    return support_projection(apply(av, mixed), tol);
}

ClassicalAction classical_action(const CPMap& ch, const std::vector<CMat>& basis,
                                 const Tolerances& tol) {
    if (!ch.is_square()) throw DimMismatch("classical_action: map must be square");
    const int d = ch.dim_in;
    if (int(basis.size()) != d) throw DimMismatch("classical_action: basis size != dim");

    ClassicalAction ca;
    ca.dim = d;
    ca.basis = basis;
    ca.t.assign(std::size_t(d) * d, 0.0);
    for (int n = 0; n < d; ++n) {
        CMat out = apply(ch, projector(basis[n]));
        for (int m = 0; m < d; ++m) {
            CMat bm = basis[m];
            const cxd val = fro_inner(projector(bm), out); // <m|out|m>
            ca.t[std::size_t(m) * d + n] = val.real();
        }
    }

    // Cross-check against the Hadamard form sum_a K ⊙ conj(K) in this basis.
    CMat b(d, d);
    for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r) b(r, c) = basis[c](r, 0);
    double worst = 0.0;
    std::vector<double> had(std::size_t(d) * d, 0.0);
    for (const CMat& k : ch.kraus) {
        CMat kb = b.adjoint() * k * b;
        for (int m = 0; m < d; ++m)
            for (int n = 0; n < d; ++n) had[std::size_t(m) * d + n] += std::norm(kb(m, n));
    }
    for (std::size_t i = 0; i < had.size(); ++i)
        worst = std::max(worst, std::abs(had[i] - ca.t[i]));
    if (worst > 1e-10)
        throw Error("classical_action: Hadamard cross-check failed (dev " +
                    std::to_string(worst) + ")");
    (void)tol;
    return ca;
}

bool is_irreducible(const ClassicalAction& t, double tol) {
    const int d = t.dim;
    if (d == 0) return false;
    if (d == 1) return true;

    // Kosaraju: one DFS pass for order, one on the transposed graph.
    auto reach = [&](int start, bool transposed) {
        std::vector<char> seen(d, 0);
        std::vector<int> stack{start};
        seen[start] = 1;
        int count = 0;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            ++count;
            for (int v = 0; v < d; ++v) {
                // edge n->m when T[m][n] > tol; from u we can go to every m
                // with T[m][u] > tol (or T[u][m] in the transpose)
                const double w = transposed ? t.at(u, v) : t.at(v, u);
                if (w > tol && !seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        return count;
    };
    return reach(0, false) == d && reach(0, true) == d;
}

namespace {

struct BlockSplitter {
    const Tolerances& tol;
    Rng rng;

    // Commutant of the (*-closed) Kraus generator set inside an m-dim block.
    AlgebraBasis kraus_commutant(const std::vector<CMat>& kraus_block, int m) {
        std::vector<CMat> gens;
        for (const CMat& k : kraus_block) {
            gens.push_back(k);
            gens.push_back(k.adjoint());
        }
        const CMat id = CMat::identity(m);
        CMat nmat(m * m, m * m);
        for (const CMat& a : gens) {
            CMat c = kron(id, a.transpose()) - kron(a, id);
            nmat += c.adjoint() * c;
        }
        EigResult e = eigh(nmat, 1e-6);
        const double wmax = e.w.empty() ? 0.0 : std::max(0.0, e.w.back());
        const double thresh = tol.span_tol * std::max(1.0, wmax);
        std::vector<CMat> null_mats;
        for (int i = 0; i < m * m; ++i) {
            if (e.w[i] > thresh) continue;
            CMat v(m * m, 1);
            for (int k = 0; k < m * m; ++k) v(k, 0) = e.V(k, i);
            null_mats.push_back(unvec(v, m, m));
        }
        AlgebraBasis r;
        r.dim = m;
        r.basis = hermitian_basis(null_mats, tol.span_tol);
        return r;
    }

    // Split the block spanned by the columns of iso (d x m) into eigen-clusters
    // of a generic Hermitian commutant element. Returns sub-isometries; empty
    // when no split was found.
    std::vector<CMat> split_once(const CPMap& ch, const CMat& iso) {
        const int m = iso.cols();
        std::vector<CMat> kraus_block;
        kraus_block.reserve(ch.kraus.size());
        for (const CMat& k : ch.kraus) kraus_block.push_back(iso.adjoint() * k * iso);

        AlgebraBasis comm = kraus_commutant(kraus_block, m);
        if (comm.span_dimension() <= 1) return {};

        for (int attempt = 0; attempt < 3; ++attempt) {
            CMat g(m, m);
            for (const CMat& h : comm.basis) {
                CMat t = h;
                t *= cxd(rng.normal(), 0.0);
                g += t;
            }
            EigResult e = eigh(g, 1e-6);
            const double spread = std::max(1.0, std::abs(e.w.back() - e.w.front()));
            const double split = 1e-7 * spread;

            std::vector<std::pair<int, int>> clusters; // [lo, hi] column ranges
            int lo = 0;
            for (int i = 0; i < m; ++i) {
                if (i + 1 < m && e.w[i + 1] - e.w[i] <= split) continue;
                clusters.push_back({lo, i});
                lo = i + 1;
            }
            if (clusters.size() <= 1) continue; // degenerate draw

            std::vector<CMat> subs;
            bool ok = true;
            for (auto [a, b] : clusters) {
                const int width = b - a + 1;
                CMat cols(m, width);
                for (int c = 0; c < width; ++c)
                    for (int r = 0; r < m; ++r) cols(r, c) = e.V(r, a + c);
                // The cluster projection must commute with every block Kraus op.
                CMat q(m, m);
                for (int c = 0; c < width; ++c) {
                    CMat v(m, 1);
                    for (int r = 0; r < m; ++r) v(r, 0) = cols(r, c);
                    kernels::active().rank1_acc(q.data(), cxd(1.0, 0.0), v.data(), v.data(), m,
                                                m);
                }
                for (const CMat& k : kraus_block)
                    if (max_abs_diff(k * q, q * k) > 1e-6) ok = false;
                subs.push_back(iso * cols);
            }
            if (ok) return subs;
        }
        return {};
    }

    void refine(const CPMap& ch, const CMat& iso, int depth, std::vector<CMat>& out) {
        if (depth > ch.dim_in)
            throw RefinementStall("block refinement exceeded depth cap");
        std::vector<CMat> subs = split_once(ch, iso);
        if (subs.empty()) {
            out.push_back(iso);
            return;
        }
        for (const CMat& s : subs) refine(ch, s, depth + 1, out);
    }
};

} // namespace

BlockDecomposition kraus_block_decomposition(const CPMap& ch, const Tolerances& tol,
                                             std::uint64_t seed) {
    if (!ch.is_square()) throw DimMismatch("kraus_block_decomposition: map must be square");
    if (!is_trace_preserving(ch, tol.trace_tol))
        throw NotTracePreserving("kraus_block_decomposition requires a channel");
    const int d = ch.dim_in;

    BlockSplitter splitter{tol, Rng(seed)};
    std::vector<CMat> isometries;
    splitter.refine(ch, CMat::identity(d), 0, isometries);

    BlockDecomposition bd;
    for (const CMat& iso : isometries) {
        const int m = iso.cols();

        CMat proj(d, d);
        for (int c = 0; c < m; ++c) {
            CMat v(d, 1);
            for (int r = 0; r < d; ++r) v(r, 0) = iso(r, c);
            kernels::active().rank1_acc(proj.data(), cxd(1.0, 0.0), v.data(), v.data(), d, d);
        }
        // Every Kraus operator must commute with the block projection.
        for (const CMat& k : ch.kraus)
            if (max_abs_diff(k * proj, proj * k) > tol.span_tol * 10.0)
                throw RefinementStall("block projection fails to commute with a Kraus operator");

        CPMap block;
        block.dim_in = m;
        block.dim_out = m;
        for (const CMat& k : ch.kraus) block.kraus.push_back(iso.adjoint() * k * iso);

        std::vector<CMat> basis;
        for (int c = 0; c < m; ++c) {
            CMat v(d, 1);
            for (int r = 0; r < d; ++r) v(r, 0) = iso(r, c);
            basis.push_back(std::move(v));
        }
        std::vector<CMat> block_basis;
        for (int c = 0; c < m; ++c) block_basis.push_back(basis_ket(m, c));
        ClassicalAction ca = classical_action(block, block_basis, tol);
        ca.basis = basis; // report in full-space kets
        if (!is_irreducible(ca, tol.rank_tol))
            throw RefinementStall("block of size " + std::to_string(m) +
                                  " has a reducible classical action and no finer commuting "
                                  "projection");

        CMat mixed = CMat::identity(m);
        mixed *= cxd(1.0 / m, 0.0);
        CPMap block_av = average_channel(block, tol);
        CMat sigma_block = apply(block_av, mixed);
        CMat sigma = iso * sigma_block * iso.adjoint();

        bd.projections.push_back(std::move(proj));
        bd.isometries.push_back(iso);
        bd.block_actions.push_back(std::move(ca));
        bd.block_fixed_states.push_back(std::move(sigma));
    }
    return bd;
}

std::optional<CMat> strictly_positive_fixed_state(const CPMap& ch,
                                                  const std::vector<double>* weights,
                                                  const Tolerances& tol, std::uint64_t seed,
                                                  std::string* diagnostics) {
    BlockDecomposition bd;
    try {
        bd = kraus_block_decomposition(ch, tol, seed);
    } catch (const RefinementStall& e) {
        // No maximal irreducible family exists (channel outside the block-form
        // hypothesis). The whole-space stationary state still settles the
        // question: full rank means it is itself the sought state.
        const int d = ch.dim_in;
        CMat mixed = CMat::identity(d);
        mixed *= cxd(1.0 / d, 0.0);
        CMat sigma = apply(average_channel(ch, tol), mixed);
        const int rank = psd_rank(sigma, tol);
        if (rank == d) return sigma;
        if (diagnostics != nullptr)
            *diagnostics = "stationary state has rank " + std::to_string(rank) + " < " +
                           std::to_string(d) + " (refinement stalled: " + e.what() + ")";
        return std::nullopt;
    }
    const std::size_t nblocks = bd.projections.size();
    std::vector<double> p;
    if (weights != nullptr) {
        if (weights->size() != nblocks)
            throw DimMismatch("strictly_positive_fixed_state: weight count != block count");
        p = *weights;
    } else {
        p.assign(nblocks, 1.0 / double(nblocks));
    }

    const int d = ch.dim_in;
    CMat rho(d, d);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const int m = bd.isometries[b].cols();
        CMat sigma_block = bd.isometries[b].adjoint() * bd.block_fixed_states[b] *
                           bd.isometries[b];
        if (psd_rank(sigma_block, tol) < m) {
            if (diagnostics != nullptr)
                *diagnostics = "block " + std::to_string(b) + " stationary state has rank " +
                               std::to_string(psd_rank(sigma_block, tol)) + " < " +
                               std::to_string(m);
            return std::nullopt;
        }
        CMat term = bd.block_fixed_states[b];
        term *= cxd(p[b], 0.0);
        rho += term;
    }
    if (max_abs_diff(apply(ch, rho), rho) > tol.fixed_tol * 100.0)
        throw Error("strictly_positive_fixed_state: assembled state is not fixed");
    return rho;
}

FixedPointStructure fixed_algebra_decomposition(const CPMap& ch, const Tolerances& tol,
                                                std::uint64_t seed) {
    if (!ch.is_square()) throw DimMismatch("fixed_algebra_decomposition: map must be square");
    if (!is_trace_preserving(ch, tol.trace_tol))
        throw NotTracePreserving("fixed_algebra_decomposition requires a channel");
    const int d = ch.dim_in;

    CPMap av = average_channel(ch, tol);
    CMat mixed = CMat::identity(d);
    mixed *= cxd(1.0 / d, 0.0);
    CMat rho0 = apply(av, mixed);

    // Isometry onto the minimal support.
    EigResult er = eigh(rho0, tol.herm_tol);
    const double wmax = er.w.empty() ? 0.0 : er.w.back();
    const double thresh = tol.rank_tol * std::max(1.0, wmax);
    std::vector<int> keep;
    for (int i = d - 1; i >= 0; --i)
        if (er.w[i] > thresh) keep.push_back(i);
    const int p = int(keep.size());
    CMat w(d, p);
    for (int c = 0; c < p; ++c)
        for (int r = 0; r < d; ++r) w(r, c) = er.V(r, keep[c]);
    CMat min_support = w * w.adjoint();

    // Compress the dual's fixed points by the support and close to an algebra.
    AlgebraBasis dual_fixed = fixed_point_basis(dual(ch), tol);
    std::vector<CMat> compressed;
    for (const CMat& a : dual_fixed.basis) compressed.push_back(w.adjoint() * a * w);
    const int pre_dim = int(orthonormalize_span(compressed, tol.span_tol).size());
    AlgebraBasis alg = algebra_closure(compressed, p, tol);
    if (alg.span_dimension() != pre_dim)
        throw FactorizationFailed("compressed fixed-point set is not multiplicatively closed (" +
                                  std::to_string(pre_dim) + " -> " +
                                  std::to_string(alg.span_dimension()) + ")");

    std::vector<CMat> centers = center_projections(alg, tol, seed);

    FixedPointStructure fs;
    fs.min_support = min_support;

    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    int dim_check = 0;
    for (const CMat& pa : centers) {
        // Isometry onto the central block (within the compressed space).
        EigResult ep = eigh(pa, 1e-6);
        std::vector<int> cols;
        for (int i = p - 1; i >= 0; --i)
            if (ep.w[i] > 0.5) cols.push_back(i);
        const int block_dim = int(cols.size());
        CMat wa(p, block_dim);
        for (int c = 0; c < block_dim; ++c)
            for (int r = 0; r < p; ++r) wa(r, c) = ep.V(r, cols[c]);

        // The block algebra L(K) ⊗ 1_R: k from its span dimension, r from rank.
        std::vector<CMat> block_alg;
        for (const CMat& h : alg.basis) block_alg.push_back(wa.adjoint() * h * wa);
        block_alg = orthonormalize_span(block_alg, tol.span_tol);
        block_alg = hermitian_basis(block_alg, tol.span_tol);
        const int ksq = int(block_alg.size());
        const int k = int(std::lround(std::sqrt(double(ksq))));
        if (k * k != ksq)
            throw FactorizationFailed("block algebra dimension " + std::to_string(ksq) +
                                      " is not a perfect square");
        if (block_dim % k != 0)
            throw FactorizationFailed("block rank " + std::to_string(block_dim) +
                                      " not divisible by factor dimension " + std::to_string(k));
        const int r = block_dim / k;

        // Minimal projections p_1..p_k from a generic Hermitian algebra element.
        std::vector<CMat> minimal;
        for (int attempt = 0; attempt < 3 && minimal.empty(); ++attempt) {
            CMat g(block_dim, block_dim);
            for (const CMat& h : block_alg) {
                CMat tmat = h;
                tmat *= cxd(rng.normal(), 0.0);
                g += tmat;
            }
            EigResult eg = eigh(g, 1e-6);
            const double spread = std::max(1.0, std::abs(eg.w.back() - eg.w.front()));
            const double split = 1e-7 * spread;
            std::vector<std::pair<int, int>> clusters;
            int lo = 0;
            for (int i = 0; i < block_dim; ++i) {
                if (i + 1 < block_dim && eg.w[i + 1] - eg.w[i] <= split) continue;
                clusters.push_back({lo, i});
                lo = i + 1;
            }
            if (int(clusters.size()) != k) continue;
            bool ok = true;
            std::vector<CMat> projs;
            for (auto [a, b] : clusters) {
                if (b - a + 1 != r) {
                    ok = false;
                    break;
                }
                CMat q(block_dim, block_dim);
                for (int c = a; c <= b; ++c) {
                    CMat v(block_dim, 1);
                    for (int i = 0; i < block_dim; ++i) v(i, 0) = eg.V(i, c);
                    kernels::active().rank1_acc(q.data(), cxd(1.0, 0.0), v.data(), v.data(),
                                                block_dim, block_dim);
                }
                projs.push_back(std::move(q));
            }
            if (ok) minimal = std::move(projs);
        }
        if (minimal.empty())
            throw FactorizationFailed("could not isolate minimal projections in a block");

        // Partial isometries s_i : range(p_1) -> range(p_i) inside the algebra.
        std::vector<CMat> isom(k);
        isom[0] = minimal[0];
        for (int i = 1; i < k; ++i) {
            bool built = false;
            for (int attempt = 0; attempt < 4 && !built; ++attempt) {
                CMat y0(block_dim, block_dim);
                for (const CMat& h : block_alg) {
                    CMat tmat = h;
                    tmat *= cxd(rng.normal(), rng.normal());
                    y0 += tmat;
                }
                CMat y = minimal[i] * y0 * minimal[0];
                SvdResult sv = svd(y);
                int rk = 0;
                for (double s : sv.s)
                    if (s > 1e-9 * std::max(1.0, sv.s.empty() ? 0.0 : sv.s.front())) ++rk;
                if (rk < r) continue;
                CMat u(block_dim, r), v(block_dim, r);
                for (int c = 0; c < r; ++c)
                    for (int row = 0; row < block_dim; ++row) {
                        u(row, c) = sv.U(row, c);
                        v(row, c) = sv.V(row, c);
                    }
                isom[i] = u * v.adjoint();
                built = true;
            }
            if (!built)
                throw FactorizationFailed("partial isometry construction failed in a block");
        }

        // ONB of range(p_1), then columns s_i |w_j> in (i, j) = K ⊗ R order.
        EigResult e1 = eigh(minimal[0], 1e-6);
        std::vector<int> w1cols;
        for (int i = block_dim - 1; i >= 0; --i)
            if (e1.w[i] > 0.5) w1cols.push_back(i);
        if (int(w1cols.size()) != r)
            throw FactorizationFailed("minimal projection rank mismatch");

        CMat viso_block(block_dim, k * r);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < r; ++j) {
                CMat wj(block_dim, 1);
                for (int row = 0; row < block_dim; ++row) wj(row, 0) = e1.V(row, w1cols[j]);
                CMat col = isom[i] * wj;
                for (int row = 0; row < block_dim; ++row) viso_block(row, i * r + j) = col(row, 0);
            }

        CMat viso_full = w * (wa * viso_block); // d x (k*r)

        // Validate: algebra elements become M ⊗ 1_r in the factor basis.
        for (const CMat& h : block_alg) {
            CMat b = viso_block.adjoint() * h * viso_block;
            CMat msmall = ptrace_second(b, k, r);
            msmall *= cxd(1.0 / r, 0.0);
            if (max_abs_diff(b, kron(msmall, CMat::identity(r))) > 1e-6)
                throw FactorizationFailed("block algebra element is not of the form M ⊗ 1");
        }

        // omega_alpha from the averaged complete mixture.
        CMat b0 = viso_full.adjoint() * rho0 * viso_full;
        CMat omega = ptrace_first(b0, k, r);
        const double tr_omega = omega.trace().real();
        if (tr_omega <= 0.0) throw FactorizationFailed("block state has non-positive trace");
        omega *= cxd(1.0 / tr_omega, 0.0);
        {
            CMat expected = kron(CMat::identity(k), omega);
            expected *= cxd(b0.trace().real() / double(k), 0.0);
            if (max_abs_diff(b0, expected) > 1e-6)
                throw FactorizationFailed("averaged mixture is not 1_K ⊗ omega on a block");
        }

        fs.central_projections.push_back(w * pa * w.adjoint());
        fs.factor_dims.push_back({k, r});
        fs.block_states.push_back(std::move(omega));
        fs.factor_isometries.push_back(std::move(viso_full));
        dim_check += k * r;
    }
    if (dim_check != p)
        throw FactorizationFailed("factor dimensions do not add up to rank(P)");

    // Validate the factorised reconstruction of the average channel. The
    // factorised form describes the action on operators supported in P H (the
    // average of mass entering from outside the support is not captured by the
    // compressions), so inputs are compressed first; when P = 1 this is the
    // unrestricted comparison.
    {
        Rng vr(seed ^ 0x2545f4914f6cdd1dULL);
        for (int trial = 0; trial < 8; ++trial) {
            CMat x = min_support * vr.ginibre(d, d) * min_support;
            CMat lhs = apply(av, x);
            CMat rhs(d, d);
            for (std::size_t a = 0; a < fs.factor_isometries.size(); ++a) {
                const auto [k, r] = fs.factor_dims[a];
                const CMat& viso = fs.factor_isometries[a];
                CMat y = viso.adjoint() * x * viso;
                CMat mpart = ptrace_second(y, k, r);
                rhs += viso * kron(mpart, fs.block_states[a]) * viso.adjoint();
            }
            if (max_abs_diff(lhs, rhs) > 1e-8 * std::max(1.0, x.max_abs()))
                throw FactorizationFailed("factorised average-channel form mismatch");
        }
    }
    return fs;
}

} // namespace qoptk
