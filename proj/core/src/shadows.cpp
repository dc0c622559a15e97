#include "qpr/shadows.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qpr/errors.hpp"
#include "qpr/kernel.hpp"
#include "qpr/rng.hpp"

namespace qpr {

namespace {

// Eigenvector |s> of each stabilizer label.
Eigen::Vector2cd stab_vector(StabLabel s) {
    const double r = 1.0 / std::sqrt(2.0);
    const cplx i(0, 1);
    switch (s) {
        case StabLabel::Z0: return {cplx(1, 0), cplx(0, 0)};
        case StabLabel::Z1: return {cplx(0, 0), cplx(1, 0)};
        case StabLabel::Xp: return {cplx(r, 0), cplx(r, 0)};
        case StabLabel::Xm: return {cplx(r, 0), cplx(-r, 0)};
        case StabLabel::Yp: return {cplx(r, 0), i * r};
        case StabLabel::Ym: return {cplx(r, 0), -i * r};
    }
    throw InvalidModelError("bad stabilizer label");
}

StabLabel label_for(MeasureBasis basis, bool plus) {
    switch (basis) {
        case MeasureBasis::X: return plus ? StabLabel::Xp : StabLabel::Xm;
        case MeasureBasis::Y: return plus ? StabLabel::Yp : StabLabel::Ym;
        case MeasureBasis::Z: return plus ? StabLabel::Z0 : StabLabel::Z1;
    }
    throw InvalidModelError("bad basis");
}

}  // namespace

std::string stab_label_name(StabLabel s) {
    switch (s) {
        case StabLabel::Z0: return "0";
        case StabLabel::Z1: return "1";
        case StabLabel::Xp: return "+";
        case StabLabel::Xm: return "-";
        case StabLabel::Yp: return "i+";
        case StabLabel::Ym: return "i-";
    }
    return "?";
}

StabLabel stab_label_from_name(const std::string& name) {
    if (name == "0") return StabLabel::Z0;
    if (name == "1") return StabLabel::Z1;
    if (name == "+") return StabLabel::Xp;
    if (name == "-") return StabLabel::Xm;
    if (name == "i+") return StabLabel::Yp;
    if (name == "i-") return StabLabel::Ym;
    throw ConfigError("unknown stabilizer label: " + name);
}

std::vector<StabLabel> sample_shadow_snapshot(const StateVector& psi,
                                              const std::vector<MeasureBasis>& bases,
                                              uint64_t seed) {
    const int n = psi.n;
    if (static_cast<int>(bases.size()) != n)
        throw SizeMismatchError("sample_shadow_snapshot: one basis per qubit");
    std::vector<cplx> amps = psi.amps;
    std::vector<StabLabel> labels(n);
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, 0x5ead, i));
        const uint64_t mask = 1ull << (n - 1 - i);
        const Eigen::Vector2cd vp = stab_vector(label_for(bases[i], true));
        // Probability of the + outcome, exact from the collapsed state.
        double p_plus = 0.0, total = 0.0;
        for (std::size_t j = 0; j < amps.size(); ++j) {
            if (j & mask) continue;
            const cplx a0 = amps[j], a1 = amps[j | mask];
            const cplx coef = std::conj(vp[0]) * a0 + std::conj(vp[1]) * a1;
            p_plus += std::norm(coef);
            total += std::norm(a0) + std::norm(a1);
        }
        const bool plus = rng.uniform() * total < p_plus;
        const StabLabel outcome = label_for(bases[i], plus);
        labels[i] = outcome;
        // Collapse onto the observed eigenvector; renormalization is deferred
        // to the probability ratio above.
        const Eigen::Vector2cd v = stab_vector(outcome);
        for (std::size_t j = 0; j < amps.size(); ++j) {
            if (j & mask) continue;
            const cplx a0 = amps[j], a1 = amps[j | mask];
            const cplx coef = std::conj(v[0]) * a0 + std::conj(v[1]) * a1;
            amps[j] = coef * v[0];
            amps[j | mask] = coef * v[1];
        }
    }
    return labels;
}

ShadowRecord sample_shadows(const StateVector& psi, int T, uint64_t seed) {
    if (T < 1) throw InvalidModelError("sample_shadows: T must be >= 1");
    ShadowRecord record;
    record.n = psi.n;
    record.T = T;
    record.seed = seed;
    record.outcomes.resize(std::size_t(T) * psi.n);
    for (int t = 0; t < T; ++t) {
        std::vector<MeasureBasis> bases(psi.n);
        for (int i = 0; i < psi.n; ++i) {
            Rng rng(derive_seed(seed, 0xba5e, t, i));
            bases[i] = static_cast<MeasureBasis>(rng.uniform_int(3));
        }
        const auto labels = sample_shadow_snapshot(psi, bases, derive_seed(seed, 0x07c0, t));
        for (int i = 0; i < psi.n; ++i) record.outcomes[std::size_t(t) * psi.n + i] = labels[i];
    }
    return record;
}

Eigen::Matrix2cd snapshot_operator(StabLabel s) {
    const Eigen::Vector2cd v = stab_vector(s);
    return 3.0 * (v * v.adjoint()) - Eigen::Matrix2cd::Identity();
}

Eigen::Matrix2cd shadow_single_qubit_estimate(const ShadowRecord& record, int qubit) {
    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    for (int t = 0; t < record.T; ++t) acc += snapshot_operator(record.at(t, qubit));
    return acc / record.T;
}

const std::array<std::array<double, 6>, 6>& stab_trace_table() {
    static const auto table = [] {
        std::array<std::array<double, 6>, 6> t{};
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                t[a][b] = (snapshot_operator(static_cast<StabLabel>(a)) *
                           snapshot_operator(static_cast<StabLabel>(b)))
                              .trace()
                              .real();
        return t;
    }();
    return table;
}

double shadow_kernel(const ShadowRecord& s1, const ShadowRecord& s2,
                     const ShadowKernelParams& params) {
    if (s1.n != s2.n) throw SizeMismatchError("shadow_kernel: qubit count mismatch");
    // Canonical argument order pins the floating-point summation order, and
    // with it k(s1,s2) == k(s2,s1), exact.
    if (s2.T < s1.T || (s2.T == s1.T && s2.outcomes < s1.outcomes))
        return shadow_kernel(s2, s1, params);
    const auto& table = stab_trace_table();
    const int n = s1.n;
    double outer = 0.0;
    for (int t1 = 0; t1 < s1.T; ++t1) {
        const StabLabel* row1 = &s1.outcomes[std::size_t(t1) * n];
        for (int t2 = 0; t2 < s2.T; ++t2) {
            const StabLabel* row2 = &s2.outcomes[std::size_t(t2) * n];
            double inner = 0.0;
            for (int i = 0; i < n; ++i)
                inner += table[static_cast<int>(row1[i])][static_cast<int>(row2[i])];
            outer += std::exp(params.gamma / n * inner);
        }
    }
    return std::exp(params.tau / (double(s1.T) * s2.T) * outer);
}

double direct_kernel(const StateVector& psi1, const StateVector& psi2, double tau) {
    return std::exp(tau * exact_kernel(psi1, psi2));
}

KernelPcaResult kernel_pca(const Eigen::MatrixXd& k, int components) {
    const Eigen::Index n = k.rows();
    if (k.cols() != n) throw SizeMismatchError("kernel_pca: matrix not square");
    if (components < 1 || components > n)
        throw InvalidModelError("kernel_pca: components out of range");

    const Eigen::VectorXd row_mean = k.rowwise().mean();
    const double total_mean = k.mean();
    Eigen::MatrixXd centered = k;
    centered.colwise() -= row_mean;
    centered.rowwise() -= row_mean.transpose();
    centered.array() += total_mean;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(centered);
    // Eigen sorts ascending; walk from the top.
    KernelPcaResult result;
    result.requested = components;
    std::vector<Eigen::Index> picked;
    for (Eigen::Index i = n - 1; i >= 0 && static_cast<int>(picked.size()) < components; --i) {
        if (es.eigenvalues()[i] > 1e-10) picked.push_back(i);
    }
    result.valid = static_cast<int>(picked.size());
    result.coords.resize(n, result.valid);
    for (int c = 0; c < result.valid; ++c) {
        const double lam = es.eigenvalues()[picked[c]];
        // Projection of the centered feature vectors: K_c v / sqrt(lam) =
        // sqrt(lam) v.
        result.coords.col(c) = std::sqrt(lam) * es.eigenvectors().col(picked[c]);
    }
    return result;
}

std::string shadows_to_text(const ShadowRecord& record) {
    std::ostringstream out;
    out << "n=" << record.n << " T=" << record.T << " seed=" << record.seed << "\n";
    for (int t = 0; t < record.T; ++t) {
        for (int i = 0; i < record.n; ++i)
            out << stab_label_name(record.at(t, i)) << (i + 1 < record.n ? " " : "");
        out << "\n";
    }
    return out.str();
}

ShadowRecord shadows_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("shadows_from_text: empty input");
    ShadowRecord record;
    unsigned long long seed = 0;
    if (std::sscanf(line.c_str(), "n=%d T=%d seed=%llu", &record.n, &record.T, &seed) != 3)
        throw ConfigError("shadows_from_text: bad header: " + line);
    record.seed = seed;
    record.outcomes.resize(std::size_t(record.T) * record.n);
    for (int t = 0; t < record.T; ++t) {
        if (!std::getline(in, line)) throw ConfigError("shadows_from_text: truncated");
        std::istringstream ls(line);
        std::string tok;
        for (int i = 0; i < record.n; ++i) {
            if (!(ls >> tok)) throw ConfigError("shadows_from_text: short line");
            record.outcomes[std::size_t(t) * record.n + i] = stab_label_from_name(tok);
        }
    }
    return record;
}

}  // namespace qpr
