// Test-only oracles, independent of the library's evaluation paths: dense
// Kronecker materialization of Pauli sums, a dense eigensolver, and a dense
// circuit composer. These never call apply_hamiltonian / apply_circuit, so
// agreement between the two routes is evidence, not tautology.
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "qpr/pauli.hpp"
#include "qpr/statevec.hpp"
#include "qpr/varcirc.hpp"

namespace oracle {

inline Eigen::Matrix2cd pauli_matrix(qpr::PauliLetter p) {
    Eigen::Matrix2cd m;
    const std::complex<double> i(0, 1);
    switch (p) {
        case qpr::PauliLetter::I: m << 1, 0, 0, 1; break;
        case qpr::PauliLetter::X: m << 0, 1, 1, 0; break;
        case qpr::PauliLetter::Y: m << 0, -i, i, 0; break;
        case qpr::PauliLetter::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

// Site 0 is the leftmost Kronecker factor, matching the library's
// most-significant-bit convention.
inline Eigen::MatrixXcd dense_matrix(const qpr::Hamiltonian& h) {
    const int n = h.n();
    const std::size_t dim = std::size_t(1) << n;
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& term : h.terms()) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
        for (int site = 0; site < n; ++site) {
            qpr::PauliLetter letter = qpr::PauliLetter::I;
            for (const auto& [s, l] : term.letters) {
                if (s == site) letter = l;
            }
            acc = Eigen::kroneckerProduct(acc, pauli_matrix(letter)).eval();
        }
        total += term.coefficient * acc;
    }
    return total;
}

struct DenseGround {
    double energy;
    Eigen::VectorXcd state;
};

inline DenseGround dense_ground_state(const qpr::Hamiltonian& h) {
    const Eigen::MatrixXcd m = dense_matrix(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    int gi = 0;
    es.eigenvalues().minCoeff(&gi);
    return {es.eigenvalues()[gi], es.eigenvectors().col(gi)};
}

// Orthonormal basis of the (quasi-)degenerate ground space: all eigenvectors
// within gap_tol of the lowest eigenvalue. Needed wherever "the" ground state
// is ill-conditioned (edge-mode manifolds of open SPT chains).
inline Eigen::MatrixXcd dense_ground_space(const qpr::Hamiltonian& h, double gap_tol) {
    const Eigen::MatrixXcd m = dense_matrix(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    const double e0 = es.eigenvalues().minCoeff();
    int count = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] - e0 <= gap_tol) ++count;
    Eigen::MatrixXcd basis(m.rows(), count);
    int k = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] - e0 <= gap_tol) basis.col(k++) = es.eigenvectors().col(i);
    return basis;
}

// Squared projection of a state onto the ground space: the well-posed
// "fidelity with the exact ground state" under quasi-degeneracy.
inline double ground_space_fidelity(const Eigen::MatrixXcd& basis, const qpr::StateVector& psi) {
    return (basis.adjoint() * to_eigen(psi)).squaredNorm();
}

// Normalized projection of a reference state onto the ground space: the
// exact ground state nearest the reference (a smooth branch choice).
inline qpr::StateVector ground_space_representative(const Eigen::MatrixXcd& basis,
                                                    const qpr::StateVector& reference) {
    Eigen::VectorXcd proj = basis * (basis.adjoint() * to_eigen(reference));
    proj.normalize();
    qpr::StateVector out;
    out.n = reference.n;
    out.amps.assign(proj.data(), proj.data() + proj.size());
    return out;
}

inline Eigen::VectorXcd to_eigen(const qpr::StateVector& psi) {
    return Eigen::Map<const Eigen::VectorXcd>(psi.amps.data(), psi.amps.size());
}

inline qpr::StateVector from_eigen(int n, const Eigen::VectorXcd& v) {
    qpr::StateVector psi;
    psi.n = n;
    psi.amps.assign(v.data(), v.data() + v.size());
    return psi;
}

// General (non-Hermitian-safe) matrix exponential of the gate generator;
// a different algorithm than the library's eigendecomposition route.
inline Eigen::Matrix4cd dense_gate(const Eigen::Matrix4cd& generator) {
    const std::complex<double> i(0, 1);
    return (-i * generator).exp();
}

// Full 2^n x 2^n unitary of a brickwork circuit assembled gate by gate with
// Kronecker products and dense matrix multiplication.
inline Eigen::MatrixXcd dense_circuit_unitary(const qpr::BrickworkArchitecture& arch,
                                              const std::vector<Eigen::Matrix4cd>& gates) {
    const int n = arch.n;
    const std::size_t dim = std::size_t(1) << n;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    std::size_t g = 0;
    for (const auto& layer : arch.placements) {
        for (int s : layer) {
            Eigen::MatrixXcd left = Eigen::MatrixXcd::Identity(std::size_t(1) << s, std::size_t(1) << s);
            Eigen::MatrixXcd right = Eigen::MatrixXcd::Identity(std::size_t(1) << (n - s - 2),
                                                                std::size_t(1) << (n - s - 2));
            Eigen::MatrixXcd full =
                Eigen::kroneckerProduct(left, Eigen::kroneckerProduct(gates[g], right).eval())
                    .eval();
            u = full * u;
            ++g;
        }
    }
    return u;
}

// Closed-form Porter-Thomas bin mass over [lo, hi].
inline double pt_bin_mass(double lo, double hi) { return std::exp(-lo) - std::exp(-hi); }

}  // namespace oracle
