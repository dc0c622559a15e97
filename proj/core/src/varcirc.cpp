#include "qpr/varcirc.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qpr/errors.hpp"
#include "qpr/parallel.hpp"
#include "qpr/rng.hpp"

namespace qpr {

namespace {

constexpr int kMaxParameters = 200;  // desk-scale cap for derivative-based methods

const Eigen::Matrix2cd& pauli_matrix(int j) {
    static const std::array<Eigen::Matrix2cd, 4> mats = [] {
        std::array<Eigen::Matrix2cd, 4> m;
        const cplx i(0, 1);
        m[0] << 1, 0, 0, 1;
        m[1] << 0, 1, 1, 0;
        m[2] << 0, -i, i, 0;
        m[3] << 1, 0, 0, -1;
        return m;
    }();
    return mats[j];
}

// kron(P_{k>>2}, P_{k&3}) for k = 1..15.
const Eigen::Matrix4cd& pauli_pair_matrix(int k) {
    static const std::array<Eigen::Matrix4cd, 16> mats = [] {
        std::array<Eigen::Matrix4cd, 16> m;
        for (int k = 0; k < 16; ++k) {
            const auto& a = pauli_matrix(k >> 2);
            const auto& b = pauli_matrix(k & 3);
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c)
                    m[k](r, c) = a(r >> 1, c >> 1) * b(r & 1, c & 1);
        }
        return m;
    }();
    return mats[k];
}

// In-place two-qubit gate on adjacent sites (s, s+1); the 4x4 row index is
// 2*q_s + q_{s+1} with the global MSB site convention.
void apply_gate(std::vector<cplx>& amps, int n, int s, const Eigen::Matrix4cd& u) {
    const uint64_t m1 = 1ull << (n - 1 - s);
    const uint64_t m2 = 1ull << (n - 2 - s);
    const std::size_t dim = amps.size();
    for (std::size_t j = 0; j < dim; ++j) {
        if ((j & m1) || (j & m2)) continue;
        const std::size_t i00 = j, i01 = j | m2, i10 = j | m1, i11 = j | m1 | m2;
        const cplx a00 = amps[i00], a01 = amps[i01], a10 = amps[i10], a11 = amps[i11];
        amps[i00] = u(0, 0) * a00 + u(0, 1) * a01 + u(0, 2) * a10 + u(0, 3) * a11;
        amps[i01] = u(1, 0) * a00 + u(1, 1) * a01 + u(1, 2) * a10 + u(1, 3) * a11;
        amps[i10] = u(2, 0) * a00 + u(2, 1) * a01 + u(2, 2) * a10 + u(2, 3) * a11;
        amps[i11] = u(3, 0) * a00 + u(3, 1) * a01 + u(3, 2) * a10 + u(3, 3) * a11;
    }
}

StateVector apply_gates(const BrickworkArchitecture& arch,
                        const std::vector<Eigen::Matrix4cd>& gates, const StateVector& input) {
    if (input.n != arch.n) throw SizeMismatchError("circuit/state qubit mismatch");
    StateVector out = input;
    std::size_t g = 0;
    for (const auto& layer : arch.placements) {
        for (int s : layer) apply_gate(out.amps, arch.n, s, gates[g++]);
    }
    return out;
}

Eigen::VectorXd solve_ridge(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs, double ridge,
                            const char* what) {
    Eigen::MatrixXd reg = m;
    reg.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    if (ldlt.info() != Eigen::Success) throw SolverError(std::string(what) + ": factorization failed");
    Eigen::VectorXd x = ldlt.solve(rhs);
    if (!x.allFinite()) throw SolverError(std::string(what) + ": singular system after ridge");
    return x;
}

}  // namespace

int BrickworkArchitecture::gate_count() const {
    int g = 0;
    for (const auto& layer : placements) g += static_cast<int>(layer.size());
    return g;
}

BrickworkArchitecture make_brickwork(int n, int depth) {
    if (n < 2 || n % 2 != 0) throw InvalidModelError("brickwork needs even n >= 2");
    if (depth < 1) throw InvalidModelError("brickwork needs depth >= 1");
    BrickworkArchitecture arch;
    arch.n = n;
    arch.depth = depth;
    arch.placements.resize(depth);
    for (int d = 0; d < depth; ++d) {
        const int first = (d % 2 == 0) ? 0 : 1;
        for (int s = first; s + 1 < n; s += 2) arch.placements[d].push_back(s);
    }
    return arch;
}

VariationalCircuit make_circuit(const BrickworkArchitecture& arch) {
    VariationalCircuit c;
    c.arch = arch;
    c.gates.resize(arch.gate_count());
    return c;
}

VariationalCircuit make_random_circuit(const BrickworkArchitecture& arch, double scale,
                                       uint64_t seed) {
    VariationalCircuit c = make_circuit(arch);
    Rng rng(seed);
    for (auto& g : c.gates)
        for (auto& t : g.theta) t = rng.uniform(-scale, scale);
    return c;
}

Eigen::Matrix4cd gate_matrix(const GateParams& params) {
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
    for (int k = 1; k < 16; ++k) g += params.theta[k - 1] * pauli_pair_matrix(k);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(g);
    const Eigen::Vector4d& ev = es.eigenvalues();
    Eigen::Vector4cd phases;
    for (int i = 0; i < 4; ++i) phases[i] = std::exp(cplx(0, -ev[i]));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

StateVector apply_circuit(const VariationalCircuit& c, const StateVector& input) {
    std::vector<Eigen::Matrix4cd> gates;
    gates.reserve(c.gates.size());
    for (const auto& g : c.gates) gates.push_back(gate_matrix(g));
    return apply_gates(c.arch, gates, input);
}

StateVector apply_to_zero(const VariationalCircuit& c) {
    return apply_circuit(c, StateVector::zero_state(c.arch.n));
}

HaarCircuit haar_random_circuit(const BrickworkArchitecture& arch, uint64_t seed) {
    HaarCircuit c;
    c.arch = arch;
    c.gates.reserve(arch.gate_count());
    Rng rng(seed);
    for (int g = 0; g < arch.gate_count(); ++g) {
        Eigen::Matrix4cd z;
        for (int r = 0; r < 4; ++r)
            for (int col = 0; col < 4; ++col) z(r, col) = cplx(rng.gaussian(), rng.gaussian());
        Eigen::HouseholderQR<Eigen::Matrix4cd> qr(z);
        Eigen::Matrix4cd q = qr.householderQ();
        const Eigen::Matrix4cd r = qr.matrixQR().triangularView<Eigen::Upper>();
        // Phase-fix the R diagonal to make the distribution Haar.
        Eigen::Vector4cd d;
        for (int i = 0; i < 4; ++i) d[i] = r(i, i) / std::abs(r(i, i));
        c.gates.push_back(q * d.asDiagonal());
    }
    return c;
}

StateVector apply_haar_circuit(const HaarCircuit& c, const StateVector& input) {
    return apply_gates(c.arch, c.gates, input);
}

std::vector<StateVector> state_derivatives(const VariationalCircuit& c, double step,
                                           int threads) {
    const int p = c.parameter_count();
    if (p > kMaxParameters)
        throw ResourceError("state_derivatives: parameter count " + std::to_string(p) +
                            " exceeds " + std::to_string(kMaxParameters));
    std::vector<StateVector> derivs(p);
    parallel_for(p, [&](std::size_t k) {
        VariationalCircuit plus = c, minus = c;
        plus.gates[k / 15].theta[k % 15] += step;
        minus.gates[k / 15].theta[k % 15] -= step;
        const StateVector sp = apply_to_zero(plus);
        const StateVector sm = apply_to_zero(minus);
        StateVector d;
        d.n = c.arch.n;
        d.amps.resize(sp.amps.size());
        const double inv = 1.0 / (2.0 * step);
        for (std::size_t j = 0; j < d.amps.size(); ++j) d.amps[j] = (sp.amps[j] - sm.amps[j]) * inv;
        derivs[k] = std::move(d);
    }, threads);
    return derivs;
}

namespace {

// Gram matrix A_ij = Re<d_i|d_j> and the current state, shared by ITE and
// tracking.
struct DerivativeSystem {
    Eigen::MatrixXd gram;
    std::vector<StateVector> derivs;
    StateVector psi;
};

DerivativeSystem build_system(const VariationalCircuit& c, int threads) {
    DerivativeSystem sys;
    sys.derivs = state_derivatives(c, 1e-5, threads);
    sys.psi = apply_to_zero(c);
    const int p = static_cast<int>(sys.derivs.size());
    Eigen::MatrixXcd d(sys.psi.amps.size(), p);
    for (int k = 0; k < p; ++k)
        d.col(k) = Eigen::Map<const Eigen::VectorXcd>(sys.derivs[k].amps.data(),
                                                      sys.derivs[k].amps.size());
    sys.gram = (d.adjoint() * d).real();
    return sys;
}

}  // namespace

IteStepResult ite_step(const VariationalCircuit& c, const Hamiltonian& h, double d_beta,
                       double ridge, int threads) {
    if (d_beta <= 0.0) throw InvalidModelError("ite_step: d_beta must be positive");
    if (h.n() != c.arch.n) throw SizeMismatchError("ite_step: qubit count mismatch");

    const DerivativeSystem sys = build_system(c, threads);
    const StateVector hpsi = apply_hamiltonian(h, sys.psi);
    const double energy = inner_product(sys.psi, hpsi).real();

    const int p = static_cast<int>(sys.derivs.size());
    Eigen::VectorXd cvec(p);
    for (int k = 0; k < p; ++k) cvec[k] = inner_product(sys.derivs[k], hpsi).real();

    const Eigen::VectorXd thetadot = solve_ridge(sys.gram, -cvec, ridge, "ite_step");

    double db = d_beta;
    for (int halvings = 0; halvings <= 5; ++halvings) {
        VariationalCircuit trial = c;
        shift_parameters(trial, thetadot * db);
        const StateVector trial_psi = apply_to_zero(trial);
        const double trial_energy = expectation(trial_psi, h);
        if (trial_energy <= energy + 1e-8) {
            IteStepResult res;
            res.params = std::move(trial.gates);
            res.energy = trial_energy;
            res.accepted_d_beta = db;
            res.halvings = halvings;
            return res;
        }
        db *= 0.5;
    }
    throw ConvergenceError("ite_step: energy increased after 5 halvings (E=" +
                           std::to_string(energy) + ")");
}

ItePath run_ite(VariationalCircuit c, const Hamiltonian& h, double beta, double d_beta,
                double ridge, int threads) {
    if (beta < 0.0) throw InvalidModelError("run_ite: beta must be >= 0");
    if (d_beta <= 0.0) throw InvalidModelError("run_ite: d_beta must be positive");
    ItePath path;
    path.d_beta = d_beta;
    path.steps = static_cast<int>(std::llround(beta / d_beta));
    for (int s = 0; s < path.steps; ++s) {
        IteStepResult step = ite_step(c, h, d_beta, ridge, threads);
        c.gates = std::move(step.params);
        path.energy_trace.push_back(step.energy);
    }
    path.final_params = std::move(c.gates);
    return path;
}

Eigen::VectorXd track_ground_state(const VariationalCircuit& c, const StateVector& psi_next,
                                   const StateVector& psi_curr, double ridge, int threads) {
    const DerivativeSystem sys = build_system(c, threads);
    const double fidelity = std::norm(inner_product(sys.psi, psi_curr));
    if (fidelity < 0.99)
        throw ConvergenceError("track_ground_state: circuit/state fidelity " +
                               std::to_string(fidelity) + " < 0.99");
    const int p = static_cast<int>(sys.derivs.size());
    Eigen::VectorXd e(p);
    for (int k = 0; k < p; ++k) {
        cplx s(0, 0);
        for (std::size_t j = 0; j < psi_curr.amps.size(); ++j)
            s += std::conj(sys.derivs[k].amps[j]) * (psi_next.amps[j] - psi_curr.amps[j]);
        e[k] = s.real();
    }
    return solve_ridge(sys.gram, e, ridge, "track_ground_state");
}

void shift_parameters(VariationalCircuit& c, const Eigen::VectorXd& dtheta) {
    if (dtheta.size() != c.parameter_count())
        throw SizeMismatchError("shift_parameters: length mismatch");
    for (Eigen::Index k = 0; k < dtheta.size(); ++k) c.gates[k / 15].theta[k % 15] += dtheta[k];
}

std::string circuit_to_text(const VariationalCircuit& c) {
    std::ostringstream out;
    out << c.arch.n << "," << c.arch.depth << "\n";
    char buf[64];
    for (const auto& g : c.gates) {
        for (int k = 0; k < 15; ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", g.theta[k]);
            out << buf << (k < 14 ? " " : "");
        }
        out << "\n";
    }
    return out.str();
}

VariationalCircuit circuit_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("circuit_from_text: empty input");
    int n = 0, depth = 0;
    if (std::sscanf(line.c_str(), "%d,%d", &n, &depth) != 2)
        throw ConfigError("circuit_from_text: bad header: " + line);
    VariationalCircuit c = make_circuit(make_brickwork(n, depth));
    for (auto& g : c.gates) {
        if (!std::getline(in, line)) throw ConfigError("circuit_from_text: truncated");
        std::istringstream ls(line);
        for (auto& t : g.theta) {
            if (!(ls >> t)) throw ConfigError("circuit_from_text: short gate line");
        }
    }
    return c;
}

}  // namespace qpr
