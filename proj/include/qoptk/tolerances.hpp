#pragma once

namespace qoptk {

// Numerical thresholds used throughout. rank_tol is relative: an eigenvalue
// counts toward the rank when it exceeds rank_tol * max(1, lambda_max).
// ds_eps is the epsilon of the scaling decision (converged <=> DS <= ds_eps^2).
struct Tolerances {
    double herm_tol = 1e-8;
    double psd_tol = 1e-8;
    double trace_tol = 1e-8;
    double proj_tol = 1e-7;
    double span_tol = 1e-7;
    double rank_tol = 1e-9;
    double fixed_tol = 1e-8;
    double eff_tol = 1e-8;
    double ds_eps = 1e-3;
};

} // namespace qoptk
