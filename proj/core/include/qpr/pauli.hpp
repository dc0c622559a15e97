#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qpr {

enum class PauliLetter : uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(PauliLetter p);
PauliLetter pauli_from_char(char c);

// Sites carrying a non-identity letter, sorted by site index. Identity is
// implied everywhere else; explicit I entries never appear.
using LetterString = std::vector<std::pair<int, PauliLetter>>;

// One real-weighted Pauli string on n sites.
struct PauliTerm {
    double coefficient = 0.0;
    LetterString letters;
};

// Real-weighted sum of Pauli strings. Terms are kept canonical: sorted by
// letter string, deduplicated by coefficient addition, and merged terms with
// |coefficient| < 1e-15 are dropped. Immutable in spirit: builders construct
// once, everything downstream only reads.
class Hamiltonian {
  public:
    explicit Hamiltonian(int n);

    int n() const { return n_; }
    const std::vector<PauliTerm>& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }

    // Canonicalizes letters (sorts, rejects out-of-range sites and explicit
    // I), then merges into the term list.
    void add_term(double coefficient, LetterString letters);

    // Convenience for uniform-letter strings like XX or ZXZ on given sites.
    void add_string(double coefficient, const std::vector<int>& sites, PauliLetter letter);

    bool operator==(const Hamiltonian& other) const;

  private:
    int n_;
    std::vector<PauliTerm> terms_;
};

// S = 1/2 XXZ chain in a transverse field,
//   sum_i [J1 (S^x_i S^x_{i+1} + S^y_i S^y_{i+1}) + J2 S^z_i S^z_{i+1}] - g sum_i S^x_i
// with S^a = sigma^a / 2, so two-site coefficients carry 1/4 and field terms
// -g/2. The bond sum wraps around only when periodic is set.
Hamiltonian build_xxz_chain(int n, double j1, double j2, double g, bool periodic = true);

// Cluster chain hosting the Z2 x Z2 SPT phase,
//   -J sum_{i=1}^{n-2} Z_i X_{i+1} Z_{i+2} - h1 sum_i X_i - h2 sum_{i=1}^{n-1} X_i X_{i+1}
// (1-based sums as written; open boundaries).
Hamiltonian build_cluster_chain(int n, double j, double h1, double h2);

// Which 1-based bond parity carries J1 in the bond-alternating chain. The
// default puts J1 on odd bonds, i.e. the first bond (sites 1,2) is a J1 bond;
// with that convention J1/J2 < 1 is the topological side.
enum class BondParity { OddBondsJ1, EvenBondsJ1 };

// Bond-alternating XXZ chain: bond b couples sites (b, b+1), b = 1..n-1
// (1-based), contributing J_b (X X + Y Y + delta Z Z).
Hamiltonian build_bond_alternating_xxz(int n, double j1, double j2, double delta,
                                       BondParity parity = BondParity::OddBondsJ1);

// Transverse-field Ising model on an na x nb lattice:
//   W sum_i Z_i + J sum_{<i,j>} Z_i Z_j - (F/2) sum_i X_i
// with row-major site order. Periodic wraps both lattice directions; a wrap
// that duplicates an existing edge (dimension of size 2) is skipped.
Hamiltonian build_tfim_lattice(int na, int nb, double w, double j, double f,
                               bool periodic = false);

// Line-oriented text format: header "n=<int>", then one term per line
// "<coefficient> <letter><site> ..." with 17 significant digits.
std::string hamiltonian_to_text(const Hamiltonian& h);
Hamiltonian hamiltonian_from_text(const std::string& text);

}  // namespace qpr
