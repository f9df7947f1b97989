#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gibbslearn/dense.hpp"

namespace gibbslearn {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_letter(Pauli p);

// Exact phase i^k, k in {0,1,2,3}.
struct Phase {
  std::uint8_t k = 0;

  static Phase from_power(int k) { return Phase{static_cast<std::uint8_t>(((k % 4) + 4) % 4)}; }
  cplx value() const;
  Phase conj() const { return from_power(-k); }
  Phase operator*(Phase o) const { return from_power(k + o.k); }
  bool is_real() const { return k % 2 == 0; }
  auto operator<=>(const Phase&) const = default;
};

class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::map<int, Pauli> letters, Phase phase = {});

  // Text form "X1 Z3" with 1-indexed sites, optionally prefixed by a phase
  // token "+", "-", "i", "+i" or "-i". "I" denotes the identity.
  static PauliString parse(std::string_view text);
  std::string to_string() const;

  const std::map<int, Pauli>& letters() const { return letters_; }
  Phase phase() const { return phase_; }
  Pauli at(int site) const;
  SiteSet support() const;
  std::size_t weight() const { return letters_.size(); }
  bool is_identity() const { return letters_.empty(); }
  int max_site() const { return letters_.empty() ? -1 : letters_.rbegin()->first; }

  PauliString with_phase(Phase p) const;
  PauliString adjoint() const { return with_phase(phase_.conj()); }
  bool commutes_with(const PauliString& other) const;
  // Equality of the letter content, ignoring the phase.
  bool same_letters(const PauliString& other) const { return letters_ == other.letters_; }

  friend PauliString operator*(const PauliString& a, const PauliString& b);
  bool operator==(const PauliString&) const = default;
  std::strong_ordering operator<=>(const PauliString& other) const;

 private:
  std::map<int, Pauli> letters_;
  Phase phase_{};
};

// A Pauli string scaled by a positive real magnitude.
struct ScaledPauli {
  double magnitude = 1.0;
  PauliString pauli;
};

// [a, b] = ab - ba, which is either zero or 2ab.
std::optional<ScaledPauli> pauli_commutator(const PauliString& a, const PauliString& b);

// P acting on basis states: P|col> = amp[col] |col ^ xmask>.
struct PauliAction {
  std::size_t xmask = 0;
  std::vector<cplx> amp;

  // P * m without forming P.
  Matrix apply_left(const Matrix& m) const;
};
PauliAction pauli_action(const PauliString& p, const SiteSet& reg);

// Dense matrix on the register `reg` (first site = most significant bit).
Matrix to_dense(const PauliString& p, const SiteSet& reg);
// Dense matrix on sites 0..n-1.
Matrix to_dense(const PauliString& p, int n);

}  // namespace gibbslearn
