#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "qpr/errors.hpp"
#include "qpr/varcirc.hpp"

using namespace qpr;

namespace {

// Parameter slot of the pair (j1, j2); k = 4*j1 + j2, slot k-1.
constexpr int kXX = 4 * 1 + 1 - 1;
constexpr int kYY = 4 * 2 + 2 - 1;
constexpr int kZZ = 4 * 3 + 3 - 1;

Eigen::Matrix4cd generator_of(const GateParams& g) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    for (int k = 1; k < 16; ++k) {
        const auto p1 = static_cast<PauliLetter>(k >> 2);
        const auto p2 = static_cast<PauliLetter>(k & 3);
        Eigen::Matrix4cd pp;
        const Eigen::Matrix2cd a = oracle::pauli_matrix(p1);
        const Eigen::Matrix2cd b = oracle::pauli_matrix(p2);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) pp(r, c) = a(r >> 1, c >> 1) * b(r & 1, c & 1);
        m += g.theta[k - 1] * pp;
    }
    return m;
}

std::vector<Eigen::Matrix4cd> dense_gates(const VariationalCircuit& c) {
    std::vector<Eigen::Matrix4cd> gates;
    for (const auto& g : c.gates) gates.push_back(oracle::dense_gate(generator_of(g)));
    return gates;
}

}  // namespace

TEST_CASE("brickwork layout alternates offsets") {
    const BrickworkArchitecture arch = make_brickwork(6, 3);
    CHECK(arch.placements[0] == std::vector<int>{0, 2, 4});
    CHECK(arch.placements[1] == std::vector<int>{1, 3});
    CHECK(arch.placements[2] == std::vector<int>{0, 2, 4});
    CHECK(arch.gate_count() == 8);
    CHECK_THROWS_AS(make_brickwork(5, 2), InvalidModelError);
}

TEST_CASE("zero parameters give the identity circuit") {
    const VariationalCircuit c = make_circuit(make_brickwork(4, 2));
    Rng rng(1);
    const StateVector in = testgen::random_state(4, rng);
    const StateVector out = apply_circuit(c, in);
    for (std::size_t j = 0; j < in.amps.size(); ++j)
        CHECK(std::abs(out.amps[j] - in.amps[j]) < 1e-12);
}

TEST_CASE("gate matrix matches the general matrix-exponential oracle") {
    Rng rng(2);
    for (int trial = 0; trial < 6; ++trial) {
        GateParams g;
        for (auto& t : g.theta) t = rng.uniform(0.0, 2 * M_PI);
        const Eigen::Matrix4cd u = gate_matrix(g);
        const Eigen::Matrix4cd expect = oracle::dense_gate(generator_of(g));
        CHECK((u - expect).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((u.adjoint() * u - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("the XX+YY+ZZ quarter-turn is a SWAP") {
    VariationalCircuit c = make_circuit(make_brickwork(2, 1));
    c.gates[0].theta[kXX] = M_PI / 4;
    c.gates[0].theta[kYY] = M_PI / 4;
    c.gates[0].theta[kZZ] = M_PI / 4;
    const StateVector out = apply_circuit(c, StateVector::basis_state(2, 1));  // |01>
    CHECK(std::abs(out.amps[2]) == doctest::Approx(1.0).epsilon(1e-12));       // |10>
}

TEST_CASE("circuits preserve the norm") {
    Rng rng(3);
    const VariationalCircuit c = make_random_circuit(make_brickwork(6, 4), 1.0, 7);
    const StateVector out = apply_circuit(c, testgen::random_state(6, rng));
    CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("haar gates are unitary and seed-dependent") {
    const BrickworkArchitecture arch = make_brickwork(4, 2);
    const HaarCircuit a = haar_random_circuit(arch, 1);
    const HaarCircuit b = haar_random_circuit(arch, 2);
    for (const auto& g : a.gates)
        CHECK((g.adjoint() * g - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a.gates[0] - b.gates[0]).cwiseAbs().maxCoeff() > 1e-6);
    const StateVector out = apply_haar_circuit(a, StateVector::zero_state(4));
    CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("derivative at the origin matches the analytic generator action") {
    // d/dtheta_ZZ exp(-i theta Z(x)Z)|00> at 0 is -i|00>.
    const VariationalCircuit c = make_circuit(make_brickwork(2, 1));
    const auto derivs = state_derivatives(c);
    REQUIRE(derivs.size() == 15);
    CHECK(std::abs(derivs[kZZ].amps[0] - cplx(0, -1)) < 1e-8);
    for (std::size_t j = 1; j < 4; ++j) CHECK(std::abs(derivs[kZZ].amps[j]) < 1e-8);
}

TEST_CASE("derivatives pass the step-halving check") {
    const VariationalCircuit c = make_random_circuit(make_brickwork(4, 2), 0.7, 11);
    const auto d1 = state_derivatives(c, 1e-5);
    const auto d2 = state_derivatives(c, 5e-6);
    for (std::size_t k = 0; k < d1.size(); ++k)
        for (std::size_t j = 0; j < d1[k].amps.size(); ++j)
            CHECK(std::abs(d1[k].amps[j] - d2[k].amps[j]) < 1e-7);
}

TEST_CASE("derivatives agree with the dense composition oracle") {
    const VariationalCircuit c = make_random_circuit(make_brickwork(4, 2), 0.9, 13);
    const auto derivs = state_derivatives(c);
    const Eigen::VectorXcd zero = oracle::to_eigen(StateVector::zero_state(4));
    const double h = 1e-5;
    for (int k : {0, 20, 44}) {  // parameters across both layers
        VariationalCircuit plus = c, minus = c;
        plus.gates[k / 15].theta[k % 15] += h;
        minus.gates[k / 15].theta[k % 15] -= h;
        const Eigen::VectorXcd expect =
            (oracle::dense_circuit_unitary(c.arch, dense_gates(plus)) * zero -
             oracle::dense_circuit_unitary(c.arch, dense_gates(minus)) * zero) /
            (2 * h);
        CHECK((oracle::to_eigen(derivs[k]) - expect).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("derivative Gram matrices are symmetric PSD and reproducible") {
    const VariationalCircuit c = make_random_circuit(make_brickwork(4, 2), 0.5, 17);
    const auto derivs = state_derivatives(c);
    const int p = static_cast<int>(derivs.size());
    Eigen::MatrixXcd d(derivs[0].amps.size(), p);
    for (int k = 0; k < p; ++k) d.col(k) = oracle::to_eigen(derivs[k]);
    const Eigen::MatrixXd gram = (d.adjoint() * d).real();
    CHECK((gram - gram.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);

    // Zero-parameter circuit: the Gram of the identity point is finite and
    // bit-reproducible.
    const VariationalCircuit zero = make_circuit(make_brickwork(4, 2));
    const auto da = state_derivatives(zero);
    const auto db = state_derivatives(zero);
    for (std::size_t k = 0; k < da.size(); ++k)
        for (std::size_t j = 0; j < da[k].amps.size(); ++j) {
            CHECK(std::isfinite(da[k].amps[j].real()));
            CHECK(da[k].amps[j] == db[k].amps[j]);
        }
}

TEST_CASE("imaginary-time evolution sinks to the ground state of Z+Z") {
    Hamiltonian h(2);
    h.add_string(1.0, {0}, PauliLetter::Z);
    h.add_string(1.0, {1}, PauliLetter::Z);
    const VariationalCircuit c = make_random_circuit(make_brickwork(2, 2), 0.1, 19);
    const ItePath path = run_ite(c, h, 5.0, 0.05);
    REQUIRE(!path.energy_trace.empty());
    CHECK(path.energy_trace.back() == doctest::Approx(-2.0).epsilon(1e-3));
    // Rejection rule keeps the trace non-increasing (up to the tolerance).
    for (std::size_t s = 1; s < path.energy_trace.size(); ++s)
        CHECK(path.energy_trace[s] <= path.energy_trace[s - 1] + 1e-8);
    CHECK(path.energy_trace.back() <= path.energy_trace.front());
}

TEST_CASE("ite reaches the Lanczos energy on a 1x4 transverse-field line") {
    const Hamiltonian h = build_tfim_lattice(1, 4, 0.0, 1.0, 1.0);
    const GroundStateResult exact = lanczos_ground_state(h, 1e-10, 300, 5);
    REQUIRE(exact.converged);
    const VariationalCircuit c = make_random_circuit(make_brickwork(4, 2), 0.1, 23);
    const ItePath path = run_ite(c, h, 6.0, 0.05);
    CHECK(path.energy_trace.back() == doctest::Approx(exact.energy).epsilon(1e-2));
}

TEST_CASE("zero-length evolution is a no-op") {
    Hamiltonian h(2);
    h.add_string(1.0, {0}, PauliLetter::Z);
    const VariationalCircuit c = make_random_circuit(make_brickwork(2, 1), 0.3, 29);
    const ItePath path = run_ite(c, h, 0.0, 0.1);
    CHECK(path.steps == 0);
    CHECK(path.energy_trace.empty());
    REQUIRE(path.final_params.size() == c.gates.size());
    for (std::size_t g = 0; g < c.gates.size(); ++g)
        CHECK(path.final_params[g].theta == c.gates[g].theta);
}

TEST_CASE("tracking returns zero update for an unchanged target") {
    const Hamiltonian h = build_cluster_chain(4, 1.0, 0.2, 0.0);
    const VariationalCircuit c0 = make_random_circuit(make_brickwork(4, 2), 0.1, 31);
    const ItePath warm = run_ite(c0, h, 4.0, 0.05);
    VariationalCircuit c = make_circuit(make_brickwork(4, 2));
    c.gates = warm.final_params;

    StateVector psi = apply_to_zero(c);
    const Eigen::VectorXd dtheta = track_ground_state(c, psi, psi);
    CHECK(dtheta.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("tracking follows a short parameter path at n=6") {
    // 150-parameter circuit: the Gram matrices are badly rank-deficient, so
    // the solves get the larger ridge. The open cluster chain's lowest four
    // levels stay quasi-degenerate (edge modes) along the whole path, so
    // fidelity is measured against the ground space via the dense oracle and
    // the tracked target is the space's representative nearest the circuit.
    const double ridge = 1e-6;
    const BrickworkArchitecture arch = make_brickwork(6, 4);
    const Hamiltonian h0 = build_cluster_chain(6, 1.0, 0.0, 0.0);
    const VariationalCircuit c0 = make_random_circuit(arch, 0.1, 37);
    const ItePath warm = run_ite(c0, h0, 6.0, 0.05, ridge);
    VariationalCircuit c = make_circuit(arch);
    c.gates = warm.final_params;

    const int steps = 10;
    for (int s = 1; s <= steps; ++s) {
        const double h1 = 0.1 * s / steps;
        StateVector curr = apply_to_zero(c);
        const Eigen::MatrixXcd space =
            oracle::dense_ground_space(build_cluster_chain(6, 1.0, h1, 0.0), 0.1);
        StateVector target = oracle::ground_space_representative(space, curr);
        align_phase(curr, target);
        const Eigen::VectorXd dtheta = track_ground_state(c, target, curr, ridge);
        shift_parameters(c, dtheta);
        CHECK(oracle::ground_space_fidelity(space, apply_to_zero(c)) >= 0.99);
    }
}

TEST_CASE("tracking rejects a bad starting fidelity") {
    const VariationalCircuit c = make_circuit(make_brickwork(4, 2));
    const StateVector far = StateVector::basis_state(4, 9);
    CHECK_THROWS_AS(track_ground_state(c, far, far), ConvergenceError);
}

TEST_CASE("parameter-count ceiling is enforced") {
    // depth 8 on n=6 gives 20 gates = 300 parameters > 200.
    const VariationalCircuit c = make_circuit(make_brickwork(6, 8));
    CHECK_THROWS_AS(state_derivatives(c), ResourceError);
}

TEST_CASE("circuit text round trip") {
    const VariationalCircuit c = make_random_circuit(make_brickwork(4, 3), 1.5, 43);
    const VariationalCircuit back = circuit_from_text(circuit_to_text(c));
    CHECK(back.arch.n == 4);
    CHECK(back.arch.depth == 3);
    REQUIRE(back.gates.size() == c.gates.size());
    for (std::size_t g = 0; g < c.gates.size(); ++g)
        for (int k = 0; k < 15; ++k) CHECK(back.gates[g].theta[k] == c.gates[g].theta[k]);
}
