#include "qpr/observables.hpp"

#include <algorithm>
#include <cmath>

#include "qpr/errors.hpp"

namespace qpr {

IntervalSpec centered_interval(int n, int length) {
    if (length < 2 || length % 2 != 0) throw InvalidModelError("interval length must be even >= 2");
    if (length > n) throw InvalidModelError("interval longer than the chain");
    IntervalSpec spec;
    spec.start = (n - length) / 2;
    spec.end = spec.start + length - 1;
    spec.split = spec.start + length / 2;
    return spec;
}

double magnetization_x(const StateVector& psi) {
    const int n = psi.n;
    double total = 0.0;
    for (int site = 0; site < n; ++site) {
        const uint64_t mask = 1ull << (n - 1 - site);
        double m = 0.0;
        // <X_site> = sum_j Re(conj(a_{j^mask}) a_j)
        for (std::size_t j = 0; j < psi.amps.size(); ++j)
            m += (std::conj(psi.amps[j ^ mask]) * psi.amps[j]).real();
        total += m;
    }
    return total / n;
}

double string_order(const StateVector& psi, int i, int j) {
    if (i < 0 || j >= psi.n || i >= j) throw InvalidModelError("string_order: need 0 <= i < j < n");
    if ((j - i) % 2 != 0 || j - i < 2)
        throw InvalidModelError("string_order: j - i must be even and >= 2");
    Hamiltonian s(psi.n);
    LetterString letters;
    letters.emplace_back(i, PauliLetter::Z);
    for (int x = i + 1; x < j; x += 2) letters.emplace_back(x, PauliLetter::X);
    letters.emplace_back(j, PauliLetter::Z);
    s.add_term(1.0, std::move(letters));
    return expectation(psi, s);
}

double partial_reflection_invariant(const StateVector& psi, const IntervalSpec& interval) {
    const int len = interval.end - interval.start + 1;
    if (interval.start < 0 || interval.end >= psi.n)
        throw InvalidModelError("partial_reflection_invariant: interval out of range");
    if (!(interval.start < interval.split && interval.split <= interval.end))
        throw InvalidModelError("partial_reflection_invariant: need start < split <= end");
    if (len % 2 != 0) throw InvalidModelError("partial_reflection_invariant: odd interval length");
    if (len > 12) throw ResourceError("partial_reflection_invariant: interval longer than 12");

    std::vector<int> sites(len), left, right;
    for (int s = 0; s < len; ++s) sites[s] = interval.start + s;
    for (int s = interval.start; s < interval.split; ++s) left.push_back(s);
    for (int s = interval.split; s <= interval.end; ++s) right.push_back(s);

    const DenseOperator rho = reduced_density_matrix(psi, sites);
    const DenseOperator rho1 = reduced_density_matrix(psi, left);
    const DenseOperator rho2 = reduced_density_matrix(psi, right);

    // Tr(rho R) with R the bit-reversal permutation of the interval.
    const std::size_t dim = std::size_t(1) << len;
    cplx tr(0, 0);
    for (std::size_t s = 0; s < dim; ++s) {
        std::size_t rev = 0;
        for (int b = 0; b < len; ++b)
            if ((s >> b) & 1u) rev |= std::size_t(1) << (len - 1 - b);
        tr += rho(s, rev);
    }
    if (std::abs(tr.imag()) >= 1e-8)
        throw NumericalError("partial_reflection_invariant: imaginary residue");

    const double p1 = (rho1 * rho1).trace().real();
    const double p2 = (rho2 * rho2).trace().real();
    return tr.real() / std::sqrt(0.5 * (p1 + p2));
}

double label_encode(double o, double lo, double hi) {
    if (lo >= hi) throw InvalidModelError("label_encode: lo must be < hi");
    return std::clamp((o - lo) / (hi - lo), 0.0, 1.0);
}

}  // namespace qpr
