#include "qpr/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qpr/errors.hpp"
#include "qpr/parallel.hpp"
#include "qpr/rng.hpp"

namespace qpr {

double exact_kernel(const StateVector& psi1, const StateVector& psi2) {
    const double q = std::norm(inner_product(psi1, psi2));
    return std::clamp(q, 0.0, 1.0);
}

double swap_test_estimate(const StateVector& psi1, const StateVector& psi2, long long shots,
                          uint64_t seed) {
    if (shots < 1) throw InvalidModelError("swap_test_estimate: shots must be >= 1");
    const double q = exact_kernel(psi1, psi2);
    const double p_plus = 0.5 * (1.0 + q);
    Rng rng(seed);
    long long plus = 0;
    for (long long s = 0; s < shots; ++s) {
        if (rng.bernoulli(p_plus)) ++plus;
    }
    const double mean = static_cast<double>(2 * plus - shots) / static_cast<double>(shots);
    return std::clamp(mean, 0.0, 1.0);
}

ShotPlan shots_for(int N, double delta, double multiplier) {
    if (N < 1) throw InvalidModelError("shots_for: N must be >= 1");
    if (delta <= 0.0 || delta >= 1.0) throw InvalidModelError("shots_for: delta in (0,1)");
    if (multiplier <= 0.0) throw InvalidModelError("shots_for: multiplier must be positive");
    ShotPlan plan;
    plan.delta = delta;
    plan.total_budget = static_cast<long long>(std::ceil(multiplier * std::pow(N, 2.5)));
    const long long pairs = std::max<long long>(1, static_cast<long long>(N) * (N - 1) / 2);
    plan.per_entry = static_cast<int>(std::max<long long>(1, plan.total_budget / pairs));
    return plan;
}

KernelMatrix build_kernel_matrix(const std::vector<StateVector>& states, KernelMode mode,
                                 const ShotPlan& plan, uint64_t seed, int threads) {
    if (states.empty()) throw InvalidModelError("build_kernel_matrix: empty state list");
    const int N = static_cast<int>(states.size());
    for (const auto& s : states) {
        if (s.n != states[0].n) throw SizeMismatchError("build_kernel_matrix: qubit mismatch");
    }
    KernelMatrix k;
    k.mode = mode;
    k.shots_per_entry = (mode == KernelMode::Estimated) ? plan.per_entry : 0;
    k.seed = seed;
    k.entries = Eigen::MatrixXd::Identity(N, N);

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(std::size_t(N) * (N - 1) / 2);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) pairs.emplace_back(i, j);

    parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        const double q = (mode == KernelMode::Exact)
                             ? exact_kernel(states[i], states[j])
                             : swap_test_estimate(states[i], states[j], plan.per_entry,
                                                  derive_seed(seed, i, j));
        k.entries(i, j) = q;
        k.entries(j, i) = q;
    }, threads);
    return k;
}

std::vector<double> kernel_vector(const std::vector<StateVector>& train_states,
                                  const StateVector& test_state, KernelMode mode,
                                  const ShotPlan& plan, uint64_t seed, int threads) {
    if (train_states.empty()) throw InvalidModelError("kernel_vector: empty training set");
    const int N = static_cast<int>(train_states.size());
    std::vector<double> row(N, 0.0);
    parallel_for(N, [&](std::size_t i) {
        row[i] = (mode == KernelMode::Exact)
                     ? exact_kernel(train_states[i], test_state)
                     : swap_test_estimate(train_states[i], test_state, plan.per_entry,
                                          derive_seed(seed, i));
    }, threads);
    return row;
}

std::string kernel_to_csv(const KernelMatrix& k, int n) {
    std::ostringstream out;
    out << "# n=" << n << " N=" << k.size()
        << " mode=" << (k.mode == KernelMode::Exact ? "exact" : "estimated")
        << " shots=" << k.shots_per_entry << " seed=" << k.seed << "\n";
    char buf[64];
    for (int i = 0; i < k.size(); ++i) {
        for (int j = 0; j < k.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", k.entries(i, j));
            out << buf << (j + 1 < k.size() ? "," : "");
        }
        out << "\n";
    }
    return out.str();
}

KernelMatrix kernel_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# n=", 0) != 0)
        throw ConfigError("kernel_from_csv: missing header");
    KernelMatrix k;
    int n = 0, N = 0;
    char mode_buf[16] = {0};
    unsigned long long seed = 0;
    if (std::sscanf(line.c_str(), "# n=%d N=%d mode=%15s shots=%d seed=%llu", &n, &N, mode_buf,
                    &k.shots_per_entry, &seed) != 5)
        throw ConfigError("kernel_from_csv: bad header: " + line);
    k.seed = seed;
    k.mode = std::string(mode_buf) == "exact" ? KernelMode::Exact : KernelMode::Estimated;
    k.entries.resize(N, N);
    for (int i = 0; i < N; ++i) {
        if (!std::getline(in, line)) throw ConfigError("kernel_from_csv: truncated");
        std::istringstream ls(line);
        std::string cell;
        for (int j = 0; j < N; ++j) {
            if (!std::getline(ls, cell, ',')) throw ConfigError("kernel_from_csv: short row");
            k.entries(i, j) = std::stod(cell);
        }
    }
    return k;
}

}  // namespace qpr
