#include "qpr/pauli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qpr/errors.hpp"

namespace qpr {

namespace {
constexpr double kMergeDropTol = 1e-15;
}

char pauli_char(PauliLetter p) {
    switch (p) {
        case PauliLetter::I: return 'I';
        case PauliLetter::X: return 'X';
        case PauliLetter::Y: return 'Y';
        case PauliLetter::Z: return 'Z';
    }
    return '?';
}

PauliLetter pauli_from_char(char c) {
    switch (c) {
        case 'I': return PauliLetter::I;
        case 'X': return PauliLetter::X;
        case 'Y': return PauliLetter::Y;
        case 'Z': return PauliLetter::Z;
        default: throw InvalidModelError(std::string("unknown Pauli letter '") + c + "'");
    }
}

Hamiltonian::Hamiltonian(int n) : n_(n) {
    if (n < 1) throw InvalidModelError("Hamiltonian needs at least one site");
}

void Hamiltonian::add_term(double coefficient, LetterString letters) {
    if (!std::isfinite(coefficient)) throw InvalidModelError("non-finite coefficient");
    LetterString canonical;
    canonical.reserve(letters.size());
    for (const auto& [site, letter] : letters) {
        if (site < 0 || site >= n_)
            throw InvalidModelError("site index " + std::to_string(site) + " out of range");
        if (letter == PauliLetter::I) continue;
        canonical.emplace_back(site, letter);
    }
    std::sort(canonical.begin(), canonical.end());
    for (std::size_t k = 1; k < canonical.size(); ++k) {
        if (canonical[k].first == canonical[k - 1].first)
            throw InvalidModelError("duplicate site in Pauli term");
    }

    auto pos = std::lower_bound(terms_.begin(), terms_.end(), canonical,
                                [](const PauliTerm& t, const LetterString& key) {
                                    return t.letters < key;
                                });
    if (pos != terms_.end() && pos->letters == canonical) {
        pos->coefficient += coefficient;
        if (std::abs(pos->coefficient) < kMergeDropTol) terms_.erase(pos);
        return;
    }
    if (std::abs(coefficient) < kMergeDropTol) return;
    terms_.insert(pos, PauliTerm{coefficient, std::move(canonical)});
}

void Hamiltonian::add_string(double coefficient, const std::vector<int>& sites,
                             PauliLetter letter) {
    LetterString letters;
    letters.reserve(sites.size());
    for (int s : sites) letters.emplace_back(s, letter);
    add_term(coefficient, std::move(letters));
}

bool Hamiltonian::operator==(const Hamiltonian& other) const {
    if (n_ != other.n_ || terms_.size() != other.terms_.size()) return false;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        if (terms_[k].letters != other.terms_[k].letters) return false;
        if (terms_[k].coefficient != other.terms_[k].coefficient) return false;
    }
    return true;
}

Hamiltonian build_xxz_chain(int n, double j1, double j2, double g, bool periodic) {
    if (n < 2) throw InvalidModelError("XXZ chain needs n >= 2");
    Hamiltonian h(n);
    const int bonds = periodic ? n : n - 1;
    for (int i = 0; i < bonds; ++i) {
        const int a = i;
        const int b = (i + 1) % n;
        h.add_string(j1 / 4.0, {a, b}, PauliLetter::X);
        h.add_string(j1 / 4.0, {a, b}, PauliLetter::Y);
        h.add_string(j2 / 4.0, {a, b}, PauliLetter::Z);
    }
    for (int i = 0; i < n; ++i) {
        h.add_string(-g / 2.0, {i}, PauliLetter::X);
    }
    return h;
}

Hamiltonian build_cluster_chain(int n, double j, double h1, double h2) {
    if (n < 3) throw InvalidModelError("cluster chain needs n >= 3");
    Hamiltonian h(n);
    for (int i = 0; i + 2 < n; ++i) {
        h.add_term(-j, {{i, PauliLetter::Z}, {i + 1, PauliLetter::X}, {i + 2, PauliLetter::Z}});
    }
    for (int i = 0; i < n; ++i) {
        h.add_string(-h1, {i}, PauliLetter::X);
    }
    for (int i = 0; i + 1 < n; ++i) {
        h.add_string(-h2, {i, i + 1}, PauliLetter::X);
    }
    return h;
}

Hamiltonian build_bond_alternating_xxz(int n, double j1, double j2, double delta,
                                       BondParity parity) {
    if (n < 2) throw InvalidModelError("bond-alternating XXZ needs n >= 2");
    if (n % 2 != 0) throw InvalidModelError("bond-alternating XXZ needs even n");
    Hamiltonian h(n);
    for (int b = 1; b < n; ++b) {  // 1-based bond index, couples 0-based sites (b-1, b)
        const bool odd_bond = (b % 2 == 1);
        const bool takes_j1 = (parity == BondParity::OddBondsJ1) ? odd_bond : !odd_bond;
        const double jb = takes_j1 ? j1 : j2;
        h.add_string(jb, {b - 1, b}, PauliLetter::X);
        h.add_string(jb, {b - 1, b}, PauliLetter::Y);
        h.add_string(jb * delta, {b - 1, b}, PauliLetter::Z);
    }
    return h;
}

Hamiltonian build_tfim_lattice(int na, int nb, double w, double j, double f, bool periodic) {
    if (na < 1 || nb < 1) throw InvalidModelError("TFIM lattice needs na*nb >= 1");
    const int n = na * nb;
    Hamiltonian h(n);
    auto site = [nb](int r, int c) { return r * nb + c; };
    std::vector<std::pair<int, int>> edges;
    auto add_edge = [&edges](int a, int b) {
        if (a > b) std::swap(a, b);
        if (a == b) return;
        if (std::find(edges.begin(), edges.end(), std::make_pair(a, b)) == edges.end())
            edges.emplace_back(a, b);
    };
    for (int r = 0; r < na; ++r) {
        for (int c = 0; c < nb; ++c) {
            if (c + 1 < nb) add_edge(site(r, c), site(r, c + 1));
            else if (periodic && nb > 2) add_edge(site(r, c), site(r, 0));
            if (r + 1 < na) add_edge(site(r, c), site(r + 1, c));
            else if (periodic && na > 2) add_edge(site(r, c), site(0, c));
        }
    }
    for (int s = 0; s < n; ++s) h.add_string(w, {s}, PauliLetter::Z);
    for (const auto& [a, b] : edges) h.add_string(j, {a, b}, PauliLetter::Z);
    for (int s = 0; s < n; ++s) h.add_string(-f / 2.0, {s}, PauliLetter::X);
    return h;
}

std::string hamiltonian_to_text(const Hamiltonian& h) {
    std::ostringstream out;
    out << "n=" << h.n() << "\n";
    char buf[64];
    for (const auto& term : h.terms()) {
        std::snprintf(buf, sizeof(buf), "%.17g", term.coefficient);
        out << buf;
        for (const auto& [site, letter] : term.letters) {
            out << ' ' << pauli_char(letter) << site;
        }
        out << "\n";
    }
    return out.str();
}

Hamiltonian hamiltonian_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("n=", 0) != 0)
        throw InvalidModelError("missing n= header");
    const int n = std::stoi(line.substr(2));
    Hamiltonian h(n);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        double coeff;
        if (!(ls >> coeff)) throw InvalidModelError("bad term line: " + line);
        LetterString letters;
        std::string tok;
        while (ls >> tok) {
            if (tok.size() < 2) throw InvalidModelError("bad letter token: " + tok);
            letters.emplace_back(std::stoi(tok.substr(1)), pauli_from_char(tok[0]));
        }
        h.add_term(coeff, std::move(letters));
    }
    return h;
}

}  // namespace qpr
