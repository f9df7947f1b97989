#include "gibbslearn/pauli.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

#include "gibbslearn/errors.hpp"

namespace gibbslearn {

namespace {

// Single-qubit product a*b = i^k c, returns (c, k).
std::pair<Pauli, int> single_product(Pauli a, Pauli b) {
  if (a == Pauli::I) return {b, 0};
  if (b == Pauli::I) return {a, 0};
  if (a == b) return {Pauli::I, 0};
  const int ia = static_cast<int>(a);
  const int ib = static_cast<int>(b);
  const Pauli c = static_cast<Pauli>(6 - ia - ib);
  // X->Y->Z->X cyclic order gives +i.
  const bool cyclic = (ib - ia + 3) % 3 == 1;
  return {c, cyclic ? 1 : 3};
}

Pauli letter_from_char(char c) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    case 'I': return Pauli::I;
    default: throw MalformedInput(std::string("unknown Pauli letter '") + c + "'");
  }
}

}  // namespace

char pauli_letter(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

cplx Phase::value() const {
  static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return table[k];
}

PauliString::PauliString(std::map<int, Pauli> letters, Phase phase) : phase_(phase) {
  for (const auto& [site, p] : letters) {
    if (site < 0) throw MalformedInput("Pauli string on negative site");
    if (p != Pauli::I) letters_.emplace(site, p);
  }
}

PauliString PauliString::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tok;
  std::map<int, Pauli> letters;
  Phase phase{};
  bool first = true;
  while (in >> tok) {
    if (first) {
      first = false;
      if (tok == "+" || tok == "-" || tok == "i" || tok == "+i" || tok == "-i") {
        int k = 0;
        if (tok == "-") k = 2;
        if (tok == "i" || tok == "+i") k = 1;
        if (tok == "-i") k = 3;
        phase = Phase::from_power(k);
        continue;
      }
    }
    if (tok == "I") continue;
    if (tok.size() < 2) throw MalformedInput("malformed Pauli token '" + tok + "'");
    const Pauli p = letter_from_char(tok[0]);
    int site = 0;
    for (std::size_t j = 1; j < tok.size(); ++j) {
      if (!std::isdigit(static_cast<unsigned char>(tok[j])))
        throw MalformedInput("malformed Pauli token '" + tok + "'");
      site = site * 10 + (tok[j] - '0');
      if (site > 1000000) throw MalformedInput("site index too large in '" + tok + "'");
    }
    if (site < 1) throw MalformedInput("Pauli sites are 1-indexed: '" + tok + "'");
    if (letters.count(site - 1)) throw MalformedInput("repeated site in Pauli string '" + std::string(text) + "'");
    if (p != Pauli::I) letters.emplace(site - 1, p);
  }
  return PauliString(std::move(letters), phase);
}

std::string PauliString::to_string() const {
  std::string out;
  switch (phase_.k) {
    case 1: out = "i "; break;
    case 2: out = "- "; break;
    case 3: out = "-i "; break;
    default: break;
  }
  if (letters_.empty()) return out + "I";
  bool first = true;
  for (const auto& [site, p] : letters_) {
    if (!first) out += ' ';
    first = false;
    out += pauli_letter(p);
    out += std::to_string(site + 1);
  }
  return out;
}

Pauli PauliString::at(int site) const {
  auto it = letters_.find(site);
  return it == letters_.end() ? Pauli::I : it->second;
}

SiteSet PauliString::support() const {
  SiteSet s;
  s.reserve(letters_.size());
  for (const auto& kv : letters_) s.push_back(kv.first);
  return s;
}

PauliString PauliString::with_phase(Phase p) const {
  PauliString out = *this;
  out.phase_ = p;
  return out;
}

bool PauliString::commutes_with(const PauliString& other) const {
  int anti = 0;
  for (const auto& [site, p] : letters_) {
    const Pauli q = other.at(site);
    if (q != Pauli::I && q != p) ++anti;
  }
  return anti % 2 == 0;
}

PauliString operator*(const PauliString& a, const PauliString& b) {
  std::map<int, Pauli> out = a.letters_;
  int k = a.phase_.k + b.phase_.k;
  for (const auto& [site, q] : b.letters_) {
    auto it = out.find(site);
    if (it == out.end()) {
      out.emplace(site, q);
      continue;
    }
    const auto [c, dk] = single_product(it->second, q);
    k += dk;
    if (c == Pauli::I)
      out.erase(it);
    else
      it->second = c;
  }
  return PauliString(std::move(out), Phase::from_power(k));
}

std::strong_ordering PauliString::operator<=>(const PauliString& other) const {
  if (auto c = letters_ <=> other.letters_; c != 0) return c;
  return phase_ <=> other.phase_;
}

std::optional<ScaledPauli> pauli_commutator(const PauliString& a, const PauliString& b) {
  if (a.commutes_with(b)) return std::nullopt;
  return ScaledPauli{2.0, a * b};
}

PauliAction pauli_action(const PauliString& p, const SiteSet& reg) {
  const int k = static_cast<int>(reg.size());
  const std::size_t dim = checked_dimension(k);
  PauliAction act;
  std::vector<std::pair<int, Pauli>> ops;  // (bit position, letter)
  for (const auto& [site, letter] : p.letters()) {
    auto it = std::lower_bound(reg.begin(), reg.end(), site);
    if (it == reg.end() || *it != site)
      throw MalformedInput("Pauli string acts outside the register: " + p.to_string());
    const int bit = k - 1 - static_cast<int>(it - reg.begin());
    if (letter == Pauli::X || letter == Pauli::Y) act.xmask |= std::size_t{1} << bit;
    ops.emplace_back(bit, letter);
  }
  act.amp.resize(dim);
  const cplx ph = p.phase().value();
  for (std::size_t col = 0; col < dim; ++col) {
    cplx amp = ph;
    for (const auto& [bit, letter] : ops) {
      const bool one = (col >> bit) & 1U;
      if (letter == Pauli::Z && one) amp = -amp;
      if (letter == Pauli::Y) amp *= one ? cplx(0, -1) : cplx(0, 1);
    }
    act.amp[col] = amp;
  }
  return act;
}

Matrix PauliAction::apply_left(const Matrix& m) const {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index row = 0; row < m.rows(); ++row) {
    const std::size_t src = static_cast<std::size_t>(row) ^ xmask;
    out.row(row) = amp[src] * m.row(static_cast<Eigen::Index>(src));
  }
  return out;
}

Matrix to_dense(const PauliString& p, const SiteSet& reg) {
  const PauliAction act = pauli_action(p, reg);
  const std::size_t dim = act.amp.size();
  Matrix m = Matrix::Zero(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) m(col ^ act.xmask, col) = act.amp[col];
  return m;
}

Matrix to_dense(const PauliString& p, int n) {
  if (p.max_site() >= n) throw MalformedInput("Pauli string acts on a site >= n: " + p.to_string());
  SiteSet reg(static_cast<std::size_t>(n));
  std::iota(reg.begin(), reg.end(), 0);
  return to_dense(p, reg);
}

}  // namespace gibbslearn
