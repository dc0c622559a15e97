#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpr/statevec.hpp"

namespace qpr {

enum class KernelMode { Exact, Estimated };

// Symmetric Gram matrix of fidelity-kernel values. Diagonal is pinned to 1
// without measurement (Q(a,a) = 1 is an identity); estimated entries are
// clamped to [0,1].
struct KernelMatrix {
    Eigen::MatrixXd entries;
    KernelMode mode = KernelMode::Exact;
    int shots_per_entry = 0;  // 0 for exact
    uint64_t seed = 0;
    int size() const { return static_cast<int>(entries.rows()); }
};

// Measurement budget for one training kernel: total_budget = ceil(mult *
// N^{5/2}) split uniformly over the N(N-1)/2 off-diagonal entries, at least
// one shot each.
struct ShotPlan {
    long long total_budget = 0;
    int per_entry = 1;
    double delta = 0.1;
};

// Q(x, x') = |<psi(x)|psi(x')>|^2, clipped to [0,1] against roundoff.
double exact_kernel(const StateVector& psi1, const StateVector& psi2);

// Destructive-SWAP-test estimator: per-shot outcomes o in {+1,-1} with
// Pr(+1) = (1+Q)/2, so E[mean o] = Q. Returns the shot mean clamped to [0,1].
double swap_test_estimate(const StateVector& psi1, const StateVector& psi2, long long shots,
                          uint64_t seed);

ShotPlan shots_for(int N, double delta, double multiplier = 1.0);

// Upper triangle computed concurrently, mirrored down; entry (i,j) draws its
// RNG stream from (seed, i, j) so the result is independent of scheduling.
KernelMatrix build_kernel_matrix(const std::vector<StateVector>& states, KernelMode mode,
                                 const ShotPlan& plan, uint64_t seed, int threads = 0);

// Row of kernel values between one test state and the training set. Entry i
// draws its stream from (seed, i); pass a distinct seed per test point.
std::vector<double> kernel_vector(const std::vector<StateVector>& train_states,
                                  const StateVector& test_state, KernelMode mode,
                                  const ShotPlan& plan, uint64_t seed, int threads = 0);

// CSV with one-line header "# n=<int> N=<int> mode=<exact|estimated>
// shots=<int> seed=<int>".
std::string kernel_to_csv(const KernelMatrix& k, int n);
KernelMatrix kernel_from_csv(const std::string& csv);

}  // namespace qpr
