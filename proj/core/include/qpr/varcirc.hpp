#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpr/pauli.hpp"
#include "qpr/statevec.hpp"

namespace qpr {

// Alternating layers of nearest-neighbour two-qubit gates: even-offset pairs
// (0,1),(2,3),... on the first layer, odd-offset pairs (1,2),(3,4),... on the
// next, repeating.
struct BrickworkArchitecture {
    int n = 0;
    int depth = 0;
    std::vector<std::vector<int>> placements;  // per layer: first site of each (s, s+1) pair
    int gate_count() const;
};

BrickworkArchitecture make_brickwork(int n, int depth);

// 15 real coefficients of the (j1,j2) != (I,I) Pauli pairs, ordered
// lexicographically with I < X < Y < Z: (I,X), (I,Y), (I,Z), (X,I), (X,X),
// ..., (Z,Z). The gate is exp(-i sum_k theta_k P_{j1} (x) P_{j2}).
struct GateParams {
    std::array<double, 15> theta{};
};

struct VariationalCircuit {
    BrickworkArchitecture arch;
    std::vector<GateParams> gates;  // layer-major, matching arch.placements
    int parameter_count() const { return 15 * static_cast<int>(gates.size()); }
};

VariationalCircuit make_circuit(const BrickworkArchitecture& arch);
// Uniform random parameters in [-scale, scale), deterministic per seed.
VariationalCircuit make_random_circuit(const BrickworkArchitecture& arch, double scale,
                                       uint64_t seed);

// Dense 4x4 unitary exp(-i G) of the Hermitian generator, via
// eigendecomposition.
Eigen::Matrix4cd gate_matrix(const GateParams& params);

StateVector apply_circuit(const VariationalCircuit& c, const StateVector& input);
StateVector apply_to_zero(const VariationalCircuit& c);  // U(theta)|0^n>

// Brickwork circuit with each gate drawn Haar-uniformly from U(4) (QR of
// a complex Ginibre matrix with the R diagonal phase-fixed).
struct HaarCircuit {
    BrickworkArchitecture arch;
    std::vector<Eigen::Matrix4cd> gates;
};
HaarCircuit haar_random_circuit(const BrickworkArchitecture& arch, uint64_t seed);
StateVector apply_haar_circuit(const HaarCircuit& c, const StateVector& input);

// Unnormalized d|Psi(theta)>/d theta_k at input |0^n>, central finite
// differences with the given step. Columns are computed concurrently.
std::vector<StateVector> state_derivatives(const VariationalCircuit& c, double step = 1e-5,
                                           int threads = 0);

// One McLachlan imaginary-time step: assembles A_ij = Re<d_i|d_j> and
// C_i = Re<d_i|H|Psi>, solves (A + ridge I) thetadot = -C, and accepts
// theta + thetadot*d_beta only if the energy does not rise by more than 1e-8
// (otherwise d_beta is halved, up to 5 retries).
struct IteStepResult {
    std::vector<GateParams> params;
    double energy = 0.0;
    double accepted_d_beta = 0.0;
    int halvings = 0;
};
IteStepResult ite_step(const VariationalCircuit& c, const Hamiltonian& h, double d_beta,
                       double ridge = 1e-8, int threads = 0);

struct ItePath {
    double d_beta = 0.0;
    int steps = 0;
    std::vector<double> energy_trace;  // one entry per accepted step
    std::vector<GateParams> final_params;
};
ItePath run_ite(VariationalCircuit c, const Hamiltonian& h, double beta, double d_beta,
                double ridge = 1e-8, int threads = 0);

// Ground-state tracking along a parameter path: solves
// (B + ridge I) dtheta = E with B_sm = Re<d_s|d_m> and
// E_m = Re<d_m|(psi_next - psi_curr)>. psi_curr must match the circuit state
// with fidelity >= 0.99 and both inputs must be phase-aligned to it.
Eigen::VectorXd track_ground_state(const VariationalCircuit& c, const StateVector& psi_next,
                                   const StateVector& psi_curr, double ridge = 1e-8,
                                   int threads = 0);

// Adds dtheta (length 15 * gate count) onto the circuit parameters.
void shift_parameters(VariationalCircuit& c, const Eigen::VectorXd& dtheta);

// Text format: header "n,depth", then one line of 15 decimals per gate in
// layer-major order.
std::string circuit_to_text(const VariationalCircuit& c);
VariationalCircuit circuit_from_text(const std::string& text);

}  // namespace qpr
