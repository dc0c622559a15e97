#include "qpr/statevec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "qpr/errors.hpp"
#include "qpr/rng.hpp"

namespace qpr {

namespace {

constexpr int kMaxQubits = 24;

// One Pauli string lowered to bit masks: P = phase * X(xmask) * Z(zmask),
// phase = i^{#Y}. Site s maps to bit (n-1-s).
struct CompiledTerm {
    uint64_t xmask = 0;
    uint64_t zmask = 0;
    cplx weight;  // coefficient * i^{#Y}
};

std::vector<CompiledTerm> compile_terms(const Hamiltonian& h) {
    const int n = h.n();
    std::vector<CompiledTerm> out;
    out.reserve(h.terms().size());
    for (const auto& term : h.terms()) {
        CompiledTerm ct;
        int ny = 0;
        for (const auto& [site, letter] : term.letters) {
            const uint64_t bit = 1ull << (n - 1 - site);
            switch (letter) {
                case PauliLetter::X: ct.xmask |= bit; break;
                case PauliLetter::Y: ct.xmask |= bit; ct.zmask |= bit; ++ny; break;
                case PauliLetter::Z: ct.zmask |= bit; break;
                case PauliLetter::I: break;
            }
        }
        static const cplx i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        ct.weight = term.coefficient * i_pow[ny % 4];
        out.push_back(ct);
    }
    return out;
}

void apply_compiled(const std::vector<CompiledTerm>& terms, std::span<const cplx> in,
                    std::span<cplx> out) {
    std::fill(out.begin(), out.end(), cplx(0, 0));
    const std::size_t dim = in.size();
    for (const auto& t : terms) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double sign = (std::popcount(j & t.zmask) & 1) ? -1.0 : 1.0;
            out[j ^ t.xmask] += t.weight * sign * in[j];
        }
    }
}

double vec_norm(std::span<const cplx> v) {
    double s = 0.0;
    for (const auto& a : v) s += std::norm(a);
    return std::sqrt(s);
}

}  // namespace

StateVector StateVector::zero_state(int n) { return basis_state(n, 0); }

StateVector StateVector::basis_state(int n, uint64_t j) {
    if (n < 1 || n > kMaxQubits) throw ResourceError("qubit count out of range");
    StateVector psi;
    psi.n = n;
    psi.amps.assign(std::size_t(1) << n, cplx(0, 0));
    psi.amps.at(j) = cplx(1, 0);
    return psi;
}

double StateVector::norm() const { return vec_norm(amps); }

void StateVector::normalize() {
    const double nrm = norm();
    if (nrm == 0.0) throw NumericalError("cannot normalize zero vector");
    for (auto& a : amps) a /= nrm;
}

void apply_hamiltonian(const Hamiltonian& h, std::span<const cplx> in, std::span<cplx> out) {
    const std::size_t dim = std::size_t(1) << h.n();
    if (in.size() != dim || out.size() != dim)
        throw SizeMismatchError("apply_hamiltonian: vector length != 2^n");
    apply_compiled(compile_terms(h), in, out);
}

StateVector apply_hamiltonian(const Hamiltonian& h, const StateVector& v) {
    if (h.n() != v.n) throw SizeMismatchError("apply_hamiltonian: qubit count mismatch");
    StateVector out;
    out.n = v.n;
    out.amps.resize(v.amps.size());
    apply_hamiltonian(h, v.amps, out.amps);
    return out;
}

GroundStateResult lanczos_ground_state(const Hamiltonian& h, double tol, int max_iter,
                                       uint64_t seed) {
    if (h.n() > kMaxQubits) throw ResourceError("lanczos: n > 24");
    if (tol <= 0.0) throw InvalidModelError("lanczos: tol must be positive");
    if (max_iter < 1) throw InvalidModelError("lanczos: max_iter must be >= 1");

    const std::size_t dim = std::size_t(1) << h.n();
    const auto terms = compile_terms(h);

    using Vec = std::vector<cplx>;
    auto dot = [dim](const Vec& a, const Vec& b) {
        cplx s(0, 0);
        for (std::size_t j = 0; j < dim; ++j) s += std::conj(a[j]) * b[j];
        return s;
    };

    // Seeded random start vector.
    Rng rng(seed);
    std::vector<Vec> basis;
    basis.emplace_back(dim);
    for (auto& a : basis[0]) a = cplx(rng.gaussian(), rng.gaussian());
    {
        const double nrm = vec_norm(basis[0]);
        for (auto& a : basis[0]) a /= nrm;
    }

    std::vector<double> alphas, betas;
    Vec w(dim);

    auto assemble = [&](const Eigen::VectorXd& coeffs, int k) {
        StateVector psi;
        psi.n = h.n();
        psi.amps.assign(dim, cplx(0, 0));
        for (int i = 0; i < k; ++i) {
            const double c = coeffs[i];
            for (std::size_t j = 0; j < dim; ++j) psi.amps[j] += c * basis[i][j];
        }
        psi.normalize();
        return psi;
    };

    auto finish = [&](double energy, const Eigen::VectorXd& coeffs, int k, int iters,
                      bool converged) {
        GroundStateResult res;
        res.state = assemble(coeffs, k);
        res.iterations = iters;
        // True residual against the assembled state; the Ritz value is
        // recomputed from it so energy and state always agree.
        Vec hpsi(dim);
        apply_compiled(terms, res.state.amps, hpsi);
        cplx e(0, 0);
        for (std::size_t j = 0; j < dim; ++j) e += std::conj(res.state.amps[j]) * hpsi[j];
        res.energy = e.real();
        double r2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) r2 += std::norm(hpsi[j] - res.energy * res.state.amps[j]);
        res.residual = std::sqrt(r2);
        res.converged = converged;
        (void)energy;
        return res;
    };

    Eigen::VectorXd ground_coeffs;
    double ground_energy = 0.0;

    for (int k = 0; k < max_iter; ++k) {
        apply_compiled(terms, basis[k], w);
        const double alpha = dot(basis[k], w).real();
        alphas.push_back(alpha);
        for (std::size_t j = 0; j < dim; ++j) w[j] -= alpha * basis[k][j];
        if (k > 0) {
            const double beta_prev = betas[k - 1];
            for (std::size_t j = 0; j < dim; ++j) w[j] -= beta_prev * basis[k - 1][j];
        }
        // Full reorthogonalization, twice, against every stored vector.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& v : basis) {
                const cplx c = dot(v, w);
                for (std::size_t j = 0; j < dim; ++j) w[j] -= c * v[j];
            }
        }
        const double beta = vec_norm(w);

        // Ritz pair of the current tridiagonal.
        const int m = k + 1;
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alphas.data(), m);
        Eigen::VectorXd sub = betas.empty()
                                  ? Eigen::VectorXd()
                                  : Eigen::Map<const Eigen::VectorXd>(betas.data(), m - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        int gi = 0;
        es.eigenvalues().minCoeff(&gi);
        ground_energy = es.eigenvalues()[gi];
        ground_coeffs = es.eigenvectors().col(gi);

        const double residual_est = beta * std::abs(ground_coeffs[m - 1]);
        const bool exhausted = (std::size_t(m) >= dim);
        if (residual_est <= tol || beta < 1e-14 || exhausted) {
            return finish(ground_energy, ground_coeffs, m, m, true);
        }
        if (k + 1 == max_iter) break;

        basis.emplace_back(dim);
        for (std::size_t j = 0; j < dim; ++j) basis.back()[j] = w[j] / beta;
        betas.push_back(beta);
    }
    return finish(ground_energy, ground_coeffs, int(alphas.size()), max_iter, false);
}

double expectation(const StateVector& psi, const Hamiltonian& o) {
    if (psi.n != o.n()) throw SizeMismatchError("expectation: qubit count mismatch");
    StateVector opsi = apply_hamiltonian(o, psi);
    const cplx val = inner_product(psi, opsi);
    if (std::abs(val.imag()) >= 1e-9)
        throw NumericalError("expectation: imaginary residue " + std::to_string(val.imag()));
    return val.real();
}

cplx inner_product(const StateVector& a, const StateVector& b) {
    if (a.n != b.n) throw SizeMismatchError("inner_product: qubit count mismatch");
    cplx s(0, 0);
    for (std::size_t j = 0; j < a.amps.size(); ++j) s += std::conj(a.amps[j]) * b.amps[j];
    return s;
}

DenseOperator reduced_density_matrix(const StateVector& psi, const std::vector<int>& sites) {
    const int k = static_cast<int>(sites.size());
    if (k > 12) throw ResourceError("reduced_density_matrix: more than 12 sites");
    std::vector<int> sorted = sites;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] < 0 || sorted[i] >= psi.n)
            throw SizeMismatchError("reduced_density_matrix: site out of range");
        if (i > 0 && sorted[i] == sorted[i - 1])
            throw SizeMismatchError("reduced_density_matrix: duplicate site");
    }

    const int n = psi.n;
    const int ne = n - k;
    const std::size_t sub_dim = std::size_t(1) << k;
    const std::size_t env_dim = std::size_t(1) << ne;

    // Bit positions (MSB convention) of kept and environment sites.
    std::vector<int> kept_pos(k), env_pos;
    for (int i = 0; i < k; ++i) kept_pos[i] = n - 1 - sites[i];
    {
        std::vector<bool> kept(n, false);
        for (int s : sites) kept[s] = true;
        for (int s = 0; s < n; ++s)
            if (!kept[s]) env_pos.push_back(n - 1 - s);
    }

    auto full_index = [&](std::size_t sub, std::size_t env) {
        uint64_t j = 0;
        for (int i = 0; i < k; ++i)
            if ((sub >> (k - 1 - i)) & 1u) j |= 1ull << kept_pos[i];
        for (int i = 0; i < ne; ++i)
            if ((env >> (ne - 1 - i)) & 1u) j |= 1ull << env_pos[i];
        return j;
    };

    DenseOperator rho = DenseOperator::Zero(sub_dim, sub_dim);
    Eigen::VectorXcd col(sub_dim);
    for (std::size_t env = 0; env < env_dim; ++env) {
        for (std::size_t sub = 0; sub < sub_dim; ++sub) col[sub] = psi.amps[full_index(sub, env)];
        rho.noalias() += col * col.adjoint();
    }
    return rho;
}

std::vector<uint64_t> sample_computational_basis(const StateVector& psi, long long shots,
                                                 uint64_t seed) {
    if (shots < 1) throw InvalidModelError("sample_computational_basis: shots must be >= 1");
    std::vector<double> cdf(psi.amps.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < psi.amps.size(); ++j) {
        acc += std::norm(psi.amps[j]);
        cdf[j] = acc;
    }
    Rng rng(seed);
    std::vector<uint64_t> out;
    out.reserve(shots);
    for (long long s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        out.push_back(std::min<uint64_t>(it - cdf.begin(), cdf.size() - 1));
    }
    return out;
}

std::string to_bitstring(uint64_t j, int n) {
    std::string s(n, '0');
    for (int site = 0; site < n; ++site) {
        if ((j >> (n - 1 - site)) & 1ull) s[site] = '1';
    }
    return s;
}

void align_phase(const StateVector& reference, StateVector& state) {
    const cplx overlap = inner_product(reference, state);
    const double mag = std::abs(overlap);
    if (mag < 1e-14) return;
    const cplx phase = std::conj(overlap) / mag;
    for (auto& a : state.amps) a *= phase;
}

namespace {
constexpr char kStateMagic[8] = {'Q', 'P', 'R', 'S', 'T', 'A', 'T', 'E'};
constexpr uint32_t kStateVersion = 1;
}  // namespace

void save_state(const StateVector& psi, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for write: " + path);
    out.write(kStateMagic, sizeof(kStateMagic));
    const uint32_t version = kStateVersion;
    const uint32_t n = static_cast<uint32_t>(psi.n);
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(psi.amps.data()),
              static_cast<std::streamsize>(psi.amps.size() * sizeof(cplx)));
    if (!out) throw ConfigError("write failed: " + path);
}

StateVector load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for read: " + path);
    char magic[8];
    uint32_t version = 0, n = 0;
    in.read(magic, sizeof(magic));
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!in || std::memcmp(magic, kStateMagic, sizeof(magic)) != 0 || version != kStateVersion)
        throw ConfigError("bad state file header: " + path);
    StateVector psi;
    psi.n = static_cast<int>(n);
    psi.amps.resize(std::size_t(1) << n);
    in.read(reinterpret_cast<char*>(psi.amps.data()),
            static_cast<std::streamsize>(psi.amps.size() * sizeof(cplx)));
    if (!in) throw ConfigError("truncated state file: " + path);
    return psi;
}

}  // namespace qpr
