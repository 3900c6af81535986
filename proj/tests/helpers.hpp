#pragma once

#include <doctest.h>

#include "qoptk/generators.hpp"
#include "qoptk/matrix.hpp"
#include "qoptk/qmaps.hpp"

namespace qoptk::test {

inline void check_close(const CMat& a, const CMat& b, double tol, const char* what = "") {
    INFO("matrix comparison: " << what);
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    CHECK(max_abs_diff(a, b) <= tol);
}

inline CMat diag(std::initializer_list<double> entries) {
    CMat m(int(entries.size()), int(entries.size()));
    int i = 0;
    for (double v : entries) {
        m(i, i) = v;
        ++i;
    }
    return m;
}

inline CMat ket(std::initializer_list<cxd> amps) {
    CMat v(int(amps.size()), 1);
    int i = 0;
    for (cxd a : amps) v(i++, 0) = a;
    return v;
}

// Brute-force map application through the superoperator, as an independent
// route for cross-checks.
inline CMat apply_via_superop(const CPMap& m, const CMat& a) {
    CMat s = superoperator_matrix(m);
    CMat v = s * vec(a);
    return unvec(v, m.dim_out, m.dim_out);
}

} // namespace qoptk::test
