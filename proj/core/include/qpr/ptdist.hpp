#pragma once

#include <vector>

#include "qpr/statevec.hpp"

namespace qpr {

// The 2^n computational-basis probabilities |amps_j|^2.
std::vector<double> probability_spectrum(const StateVector& psi);

// Porter-Thomas density in the scaled variable u = 2^n p: e^{-u}.
double pt_density(double u);

// Histogram of the scaled probability spectrum over the fixed window
// [0, 10]; mass beyond the window is implicit (1 - sum of bin masses) and
// enters the distance through the tail term.
struct SpectrumHistogram {
    int n = 0;
    int bins = 0;
    double u_max = 0.0;           // uniform bins over [0, u_max]
    std::vector<double> masses;   // empirical mass per bin, sums to <= 1
};

SpectrumHistogram make_spectrum_histogram(const std::vector<double>& probs, int n, int bins);

// Total-variation distance between the histogram and the PT density:
// (1/2) sum_b |empirical_b - integral_b e^{-u} du| + (1/2) |tail_emp -
// e^{-u_max}| with tail_emp = 1 - sum_b empirical_b.
double pt_distance_from_histogram(const SpectrumHistogram& hist);

// Convenience composition of the two steps above, default 50 bins.
double pt_trace_distance(const StateVector& psi, int bins = 50);

// Hardness window of the sampling-hardness criterion: epsilon <= 1/n
// (boundary inclusive).
bool hardness_window_check(double epsilon, int n);

}  // namespace qpr
