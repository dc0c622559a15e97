#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpr/pauli.hpp"

namespace qpr {

using cplx = std::complex<double>;

// Dense operators only ever appear for small subsystems (reduced density
// matrices, few-qubit gates); dim <= 2^12 by contract.
using DenseOperator = Eigen::MatrixXcd;

// Normalized complex amplitudes of length 2^n. Basis index convention: site 0
// is the most significant bit, so |j> at n=6 with j=5 reads bitstring 000101
// site-by-site. Bitstring outputs and string-order site labels rely on this.
struct StateVector {
    int n = 0;
    std::vector<cplx> amps;

    static StateVector zero_state(int n);              // |0...0>
    static StateVector basis_state(int n, uint64_t j);  // |j>

    std::size_t dim() const { return amps.size(); }
    double norm() const;
    void normalize();
};

struct GroundStateResult {
    double energy = 0.0;
    StateVector state;
    int iterations = 0;
    double residual = 0.0;  // ||H psi - E psi||
    bool converged = false;
};

// Matrix-free H*v; terms act site-wise through bit flips and phases. in and
// out must both have length 2^H.n and must not alias.
void apply_hamiltonian(const Hamiltonian& h, std::span<const cplx> in, std::span<cplx> out);
StateVector apply_hamiltonian(const Hamiltonian& h, const StateVector& v);

// Lanczos with full reorthogonalization against the stored basis. The start
// vector is drawn from the seeded RNG, so results are deterministic per seed
// (including the representative picked inside a degenerate ground space).
// Non-convergence is reported through converged=false with the best iterate.
GroundStateResult lanczos_ground_state(const Hamiltonian& h, double tol = 1e-10,
                                       int max_iter = 500, uint64_t seed = 1);

// Re<psi|O|psi>; throws NumericalError if the imaginary residue exceeds 1e-9.
double expectation(const StateVector& psi, const Hamiltonian& o);

// Conjugate-linear in the first argument.
cplx inner_product(const StateVector& a, const StateVector& b);

// Partial trace over the complement of `sites` (distinct, < n, at most 12).
// Row/column index packs the kept sites in the order given, first site most
// significant.
DenseOperator reduced_density_matrix(const StateVector& psi, const std::vector<int>& sites);

// i.i.d. computational-basis samples with Pr(j) = |amps[j]|^2.
std::vector<uint64_t> sample_computational_basis(const StateVector& psi, long long shots,
                                                 uint64_t seed);

std::string to_bitstring(uint64_t j, int n);

// Multiplies state by a unit phase so that <reference|state> is real >= 0.
// No-op when the overlap is numerically zero.
void align_phase(const StateVector& reference, StateVector& state);

// Binary cache format: 8-byte magic, u32 version, u32 n, then 2^n
// little-endian (re, im) double pairs.
void save_state(const StateVector& psi, const std::string& path);
StateVector load_state(const std::string& path);

}  // namespace qpr
