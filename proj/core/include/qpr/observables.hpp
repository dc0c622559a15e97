#pragma once

#include "qpr/statevec.hpp"

namespace qpr {

// Sites [start, end] inclusive, 0-based, with the two halves I1 = [start,
// split-1] and I2 = [split, end]. Even total length, at most 12 sites.
struct IntervalSpec {
    int start = 0;
    int end = 0;
    int split = 0;
};

// Centered even-length interval split in half; the default Z_R window.
IntervalSpec centered_interval(int n, int length = 6);

// Per-site transverse magnetization (1/n) sum_i <X_i>.
double magnetization_x(const StateVector& psi);

// SPT string order <Z_i X_{i+1} X_{i+3} ... X_{j-1} Z_j> with 0-based sites.
// The alternating X pattern fills i+1, i+3, ..., j-1, which requires j - i
// even and >= 2; at the exact cluster point this string is a stabilizer
// product with expectation +1.
double string_order(const StateVector& psi, int i, int j);

// Partial-reflection many-body invariant
//   Z_R = Tr(rho_I R_I) / sqrt[(Tr rho_I1^2 + Tr rho_I2^2) / 2],
// R_I the site-reversal permutation on the interval. Near +1 in the trivial
// phase, -1 in the topological phase, 0 in the symmetry-broken phase.
double partial_reflection_invariant(const StateVector& psi, const IntervalSpec& interval);

// clamp((o - lo) / (hi - lo), 0, 1); bridges observables to [0,1] labels.
double label_encode(double o, double lo, double hi);

}  // namespace qpr
