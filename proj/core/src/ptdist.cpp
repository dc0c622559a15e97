#include "qpr/ptdist.hpp"

#include <algorithm>
#include <cmath>

#include "qpr/errors.hpp"

namespace qpr {

std::vector<double> probability_spectrum(const StateVector& psi) {
    std::vector<double> probs(psi.amps.size());
    for (std::size_t j = 0; j < probs.size(); ++j) probs[j] = std::norm(psi.amps[j]);
    return probs;
}

double pt_density(double u) {
    if (u < 0.0) throw InvalidModelError("pt_density: u must be >= 0");
    return std::exp(-u);
}

SpectrumHistogram make_spectrum_histogram(const std::vector<double>& probs, int n, int bins) {
    if (bins < 10) throw InvalidModelError("make_spectrum_histogram: bins must be >= 10");
    SpectrumHistogram hist;
    hist.n = n;
    hist.bins = bins;
    // Fixed window: the PT density e^{-u} carries all but e^{-10} of its mass
    // below 10, so resolving [0, 10] is what discriminates spectra. Scaled
    // probabilities beyond the window are accounted by the tail term.
    hist.u_max = 10.0;
    hist.masses.assign(bins, 0.0);
    const double scale = std::ldexp(1.0, n);  // 2^n
    const double weight = 1.0 / probs.size();
    for (double p : probs) {
        const double u = scale * p;
        if (u > hist.u_max) continue;  // tail mass = 1 - sum(masses)
        const int b = std::min(static_cast<int>(u / hist.u_max * bins), bins - 1);
        hist.masses[b] += weight;
    }
    return hist;
}

double pt_distance_from_histogram(const SpectrumHistogram& hist) {
    const double width = hist.u_max / hist.bins;
    double dist = 0.0;
    double emp_total = 0.0;
    for (int b = 0; b < hist.bins; ++b) {
        const double pt_mass = std::exp(-b * width) - std::exp(-(b + 1) * width);
        dist += std::abs(hist.masses[b] - pt_mass);
        emp_total += hist.masses[b];
    }
    const double emp_tail = std::max(0.0, 1.0 - emp_total);
    dist += std::abs(emp_tail - std::exp(-hist.u_max));
    return 0.5 * dist;
}

double pt_trace_distance(const StateVector& psi, int bins) {
    return pt_distance_from_histogram(
        make_spectrum_histogram(probability_spectrum(psi), psi.n, bins));
}

bool hardness_window_check(double epsilon, int n) {
    if (n < 1) throw InvalidModelError("hardness_window_check: n must be >= 1");
    return epsilon <= 1.0 / n;
}

}  // namespace qpr
