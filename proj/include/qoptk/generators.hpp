// generators.hpp — named builders for bundled example objects and seeded
// random ensembles, shared by the CLI and the test suites.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qoptk/measurements.hpp"

namespace qoptk {
namespace gen {

CMat pauli_x();
CMat pauli_y();
CMat pauli_z();
CMat hadamard();

CPMap unitary_channel(const CMat& u);
// Single Kraus sqrt(E).
CPMap luders_operation(const CMat& e, const Tolerances& tol);
Instrument luders_instrument(const Observable& obs, const Tolerances& tol);
// Phi(.) = tr[.] sigma.
CPMap prepare_channel(const CMat& sigma);
// Phi(.) = tr[E .] sigma.
CPMap measure_and_prepare(const CMat& e, const CMat& sigma, const Tolerances& tol);
CPMap depolarizing_channel(int d);

// lambda id + (1 - lambda) tr[.]|phi><phi|: rank non-decreasing, fixed set C|phi><phi|.
CPMap depolarize_to_pure(double lambda, const CMat& phi);

// The qutrit example: E_± = |±><±| + (1/2)|0><0|,
// I_±(.) = <±|.|±> |±><±| + <0|.|0> 1/6.
Instrument qutrit_remark_instrument();
Observable qutrit_remark_observable();

// d = 3 channel rho -> tr[P01 rho]|0><0| + tr[|2><2| rho] 1/3: strictly
// positive but drops rank 2 -> 1 on P01/2.
CPMap rank_drop_d3();

CPMap random_channel(int d, int kraus_rank, std::uint64_t seed);
CPMap random_bistochastic(int d, int n_unitaries, std::uint64_t seed);

// Strictly positive POVM with n outcomes; effects are automatically indefinite
// when n >= 2.
Observable random_strictly_positive_povm(int d, int n, std::uint64_t seed);
Observable random_indefinite_commutative_observable(int d, int n, std::uint64_t seed);

enum class InstrumentKind {
    MeasureAndPrepare, // I_x = tr[E_x .] sigma_x with sigma_x > 0
    Luders,            // I_x = sqrt(E_x) . sqrt(E_x) of a strictly positive POVM
    Mixed,             // alternating of the two
};

// Instrument with strictly positive operations.
Instrument random_instrument(int d, int outcomes, std::uint64_t seed,
                             InstrumentKind kind = InstrumentKind::Mixed);

// Instrument whose operations are rank non-decreasing with indefinite effects
// (valid input to the strong-third dilation).
Instrument random_strong_third_instrument(int d, int outcomes, std::uint64_t seed);

std::vector<std::string> generator_names();

} // namespace gen
} // namespace qoptk
