#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "generators.hpp"
#include "oracles.hpp"
#include "qpr/errors.hpp"
#include "qpr/ptdist.hpp"
#include "qpr/varcirc.hpp"

using namespace qpr;

namespace {

StateVector haar_state(int n, int depth, uint64_t seed) {
    return apply_haar_circuit(haar_random_circuit(make_brickwork(n, depth), seed),
                              StateVector::zero_state(n));
}

StateVector uniform_state(int n) {
    StateVector psi;
    psi.n = n;
    psi.amps.assign(std::size_t(1) << n, cplx(std::pow(2.0, -n / 2.0), 0));
    return psi;
}

}  // namespace

TEST_CASE("probability spectra") {
    const auto basis = probability_spectrum(StateVector::basis_state(4, 9));
    CHECK(basis[9] == doctest::Approx(1.0));
    CHECK(std::accumulate(basis.begin(), basis.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));

    for (double p : probability_spectrum(uniform_state(4))) CHECK(p == doctest::Approx(1.0 / 16));

    const auto hs = probability_spectrum(haar_state(8, 16, 3));
    CHECK(std::accumulate(hs.begin(), hs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Porter-Thomas density") {
    CHECK(pt_density(0.0) == 1.0);
    CHECK(pt_density(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(pt_density(-0.1), InvalidModelError);

    // Bin masses plus the tail integrate to exactly 1 (analytic check of the
    // closed-form bin integral).
    double total = 0.0;
    const int bins = 50;
    const double u_max = 10.0;
    for (int b = 0; b < bins; ++b)
        total += oracle::pt_bin_mass(b * u_max / bins, (b + 1) * u_max / bins);
    total += std::exp(-u_max);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("uniform-state distance matches the closed form and is large") {
    const int n = 8, bins = 50;
    const StateVector psi = uniform_state(n);
    // All scaled mass sits at u = 1, i.e. bin 5 of [0, 10) at 50 bins.
    const double u_max = 10.0;
    const int hot = static_cast<int>(1.0 / u_max * bins);
    double expected = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double m = oracle::pt_bin_mass(b * u_max / bins, (b + 1) * u_max / bins);
        expected += std::abs((b == hot ? 1.0 : 0.0) - m);
    }
    expected += std::exp(-u_max);
    expected *= 0.5;
    const double d = pt_trace_distance(psi, bins);
    CHECK(d == doctest::Approx(expected).epsilon(1e-12));
    CHECK(d > 0.5);
}

TEST_CASE("distances live in [0,1] and are permutation invariant") {
    Rng rng(7);
    for (int trial = 0; trial < 4; ++trial) {
        StateVector psi = testgen::random_state(6, rng);
        const double d = pt_trace_distance(psi);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        // Relabeling basis states does not move the histogram.
        std::vector<cplx> shuffled = psi.amps;
        for (std::size_t j = shuffled.size() - 1; j > 0; --j)
            std::swap(shuffled[j], shuffled[rng.uniform_int(j + 1)]);
        StateVector perm;
        perm.n = psi.n;
        perm.amps = std::move(shuffled);
        CHECK(pt_trace_distance(perm) == doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("haar-circuit states approach Porter-Thomas") {
    const StateVector haar = haar_state(10, 20, 11);
    const double d_haar = pt_trace_distance(haar);
    CHECK(d_haar < 0.1);

    // Any product state sits much further away.
    CHECK(pt_trace_distance(StateVector::basis_state(10, 37)) > d_haar);
    CHECK(pt_trace_distance(uniform_state(10)) > d_haar);
    Rng rng(13);
    StateVector prod;
    prod.n = 10;
    prod.amps.assign(1 << 10, cplx(1, 0));
    for (int site = 0; site < 10; ++site) {
        const cplx a(rng.gaussian(), rng.gaussian()), b(rng.gaussian(), rng.gaussian());
        const double nrm = std::sqrt(std::norm(a) + std::norm(b));
        for (std::size_t j = 0; j < prod.amps.size(); ++j)
            prod.amps[j] *= ((j >> (9 - site)) & 1u) ? b / nrm : a / nrm;
    }
    CHECK(pt_trace_distance(prod) > d_haar);

    // Deeper brickwork gets closer than a single layer.
    CHECK(d_haar < pt_trace_distance(haar_state(10, 1, 11)));
}

TEST_CASE("bin refinement is stable for smooth spectra") {
    const StateVector haar = haar_state(8, 16, 17);
    const double d50 = pt_trace_distance(haar, 50);
    const double d100 = pt_trace_distance(haar, 100);
    CHECK(std::abs(d50 - d100) < 0.02);
}

TEST_CASE("injecting the PT masses reproduces zero distance") {
    SpectrumHistogram hist;
    hist.n = 8;
    hist.bins = 50;
    hist.u_max = 12.0;
    hist.masses.resize(hist.bins);
    for (int b = 0; b < hist.bins; ++b)
        hist.masses[b] = oracle::pt_bin_mass(b * hist.u_max / hist.bins,
                                             (b + 1) * hist.u_max / hist.bins);
    CHECK(pt_distance_from_histogram(hist) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("hardness window") {
    CHECK(hardness_window_check(0.05, 10));
    CHECK(!hardness_window_check(0.2, 10));
    CHECK(hardness_window_check(0.1, 10));  // boundary inclusive
    CHECK_THROWS_AS(hardness_window_check(0.1, 0), InvalidModelError);
}

TEST_CASE("histogram preconditions") {
    CHECK_THROWS_AS(pt_trace_distance(uniform_state(4), 5), InvalidModelError);
}
