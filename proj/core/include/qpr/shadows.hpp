#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpr/statevec.hpp"

namespace qpr {

// Post-measurement single-qubit stabilizer labels.
enum class StabLabel : uint8_t { Z0 = 0, Z1 = 1, Xp = 2, Xm = 3, Yp = 4, Ym = 5 };

std::string stab_label_name(StabLabel s);      // "0", "1", "+", "-", "i+", "i-"
StabLabel stab_label_from_name(const std::string& name);

enum class MeasureBasis : uint8_t { X = 0, Y = 1, Z = 2 };

// n x T classical shadow: outcome labels of T snapshots of randomized
// single-qubit Pauli measurements.
struct ShadowRecord {
    int n = 0;
    int T = 0;
    uint64_t seed = 0;
    std::vector<StabLabel> outcomes;  // snapshot-major: outcomes[t*n + i]
    StabLabel at(int t, int i) const { return outcomes[std::size_t(t) * n + i]; }
};

struct ShadowKernelParams {
    double tau = 1.0;
    double gamma = 1.0;
};

// One snapshot with the measurement bases fixed by the caller: sequential
// projective measurement qubit by qubit on the collapsing state, exact
// conditional probabilities. Exposed for tests that pin the bases.
std::vector<StabLabel> sample_shadow_snapshot(const StateVector& psi,
                                              const std::vector<MeasureBasis>& bases,
                                              uint64_t seed);

// T snapshots with per-qubit bases drawn uniformly from {X, Y, Z}; snapshot t
// and qubit i use a sub-stream derived from (seed, t, i).
ShadowRecord sample_shadows(const StateVector& psi, int T, uint64_t seed);

// sigma = 3|s><s| - I for one label.
Eigen::Matrix2cd snapshot_operator(StabLabel s);

// Mean over snapshots of snapshot_operator on one qubit; unbiased estimator
// of the single-qubit marginal.
Eigen::Matrix2cd shadow_single_qubit_estimate(const ShadowRecord& record, int qubit);

// Tr(sigma_a sigma_b) = 9 |<a|b>|^2 - 4, precomputed for the 36 label pairs:
// 5 on the diagonal, -4 for orthogonal same-basis pairs, 0.5 across bases.
const std::array<std::array<double, 6>, 6>& stab_trace_table();

// k_shadow = exp((tau/T^2) sum_{t1,t2} exp((gamma/n) sum_i Tr(sigma_i^{t1}
// sigma_i^{t2}))).
double shadow_kernel(const ShadowRecord& s1, const ShadowRecord& s2,
                     const ShadowKernelParams& params);

// k(rho1, rho2) = exp(tau Tr(rho1 rho2)) = exp(tau |<psi1|psi2>|^2) for pure
// states.
double direct_kernel(const StateVector& psi1, const StateVector& psi2, double tau);

// Kernel PCA: double-center K, eigendecompose, project onto the top
// eigenvectors scaled by 1/sqrt(eigenvalue). Eigenvalues below 1e-10 are
// rejected; valid reports how many components survived.
struct KernelPcaResult {
    Eigen::MatrixXd coords;  // N x valid
    int requested = 0;
    int valid = 0;
};
KernelPcaResult kernel_pca(const Eigen::MatrixXd& k, int components);

// Text format: header "n=<int> T=<int> seed=<int>", then T lines of n labels.
std::string shadows_to_text(const ShadowRecord& record);
ShadowRecord shadows_from_text(const std::string& text);

}  // namespace qpr
