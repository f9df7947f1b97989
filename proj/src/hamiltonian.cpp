#include "gibbslearn/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/random.hpp"

namespace gibbslearn {

HamiltonianSpec::HamiltonianSpec(GeometrySpec geometry, std::vector<Term> terms)
    : geometry_(std::move(geometry)), terms_(std::move(terms)) {
  geometry_.validate();
  std::set<std::map<int, Pauli>> seen;
  for (const Term& t : terms_) {
    if (t.pauli.is_identity()) throw MalformedInput("Hamiltonian term is the identity");
    if (t.pauli.phase().k != 0) throw MalformedInput("Hamiltonian Pauli strings carry no phase: " + t.pauli.to_string());
    if (!std::isfinite(t.coefficient)) throw MalformedInput("non-finite coefficient");
    if (!seen.insert(t.pauli.letters()).second)
      throw MalformedInput("repeated Pauli string " + t.pauli.to_string());
  }
  std::vector<PauliString> ps = paulis();
  std::vector<TermId> is = ids();
  graph_ = InteractionGraph::build(geometry_, ps, is);
}

HamiltonianSpec HamiltonianSpec::from_paulis(GeometrySpec geometry, const std::vector<PauliString>& paulis,
                                             const std::vector<double>& coefficients) {
  if (paulis.size() != coefficients.size()) throw MalformedInput("Pauli and coefficient counts differ");
  std::vector<Term> terms;
  terms.reserve(paulis.size());
  for (std::size_t i = 0; i < paulis.size(); ++i)
    terms.push_back(Term{TermId{static_cast<int>(i)}, paulis[i], coefficients[i]});
  return HamiltonianSpec(std::move(geometry), std::move(terms));
}

std::optional<std::size_t> HamiltonianSpec::position(TermId id) const {
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (terms_[i].id == id) return i;
  return std::nullopt;
}

std::vector<double> HamiltonianSpec::coefficients() const {
  std::vector<double> c;
  c.reserve(terms_.size());
  for (const Term& t : terms_) c.push_back(t.coefficient);
  return c;
}

std::vector<TermId> HamiltonianSpec::ids() const {
  std::vector<TermId> c;
  c.reserve(terms_.size());
  for (const Term& t : terms_) c.push_back(t.id);
  return c;
}

std::vector<PauliString> HamiltonianSpec::paulis() const {
  std::vector<PauliString> c;
  c.reserve(terms_.size());
  for (const Term& t : terms_) c.push_back(t.pauli);
  return c;
}

HamiltonianSpec HamiltonianSpec::with_coefficients(std::span<const double> coefficients) const {
  if (coefficients.size() != terms_.size()) throw MalformedInput("coefficient count mismatch");
  HamiltonianSpec out = *this;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!std::isfinite(coefficients[i])) throw MalformedInput("non-finite coefficient");
    out.terms_[i].coefficient = coefficients[i];
  }
  return out;
}

HamiltonianSpec HamiltonianSpec::subset(const std::vector<TermId>& ids) const {
  std::vector<Term> kept;
  for (const Term& t : terms_)
    if (std::find(ids.begin(), ids.end(), t.id) != ids.end()) kept.push_back(t);
  return HamiltonianSpec(geometry_, std::move(kept));
}

void HamiltonianSpec::require_unit_range() const {
  for (const Term& t : terms_)
    if (std::abs(t.coefficient) > 1.0)
      throw MalformedInput("coefficient of " + t.pauli.to_string() + " lies outside [-1, 1]");
}

Matrix to_dense(const HamiltonianSpec& h, const SiteSet& reg) {
  const std::size_t dim = checked_dimension(static_cast<int>(reg.size()));
  Matrix m = Matrix::Zero(dim, dim);
  for (const Term& t : h.terms()) m += t.coefficient * to_dense(t.pauli, reg);
  return m;
}

Matrix to_dense(const HamiltonianSpec& h) {
  SiteSet reg(static_cast<std::size_t>(h.num_sites()));
  std::iota(reg.begin(), reg.end(), 0);
  return to_dense(h, reg);
}

SiteSet support(const HamiltonianSpec& h) {
  SiteSet s;
  for (const Term& t : h.terms()) s = site_union(s, t.pauli.support());
  return s;
}

namespace {

HamiltonianSpec keep_by_distance(const HamiltonianSpec& h, const SiteSet& a, int max_dist) {
  const auto dist = h.graph().distances_from(make_site_set(a));
  std::vector<TermId> kept;
  for (std::size_t t = 0; t < h.size(); ++t)
    if (dist[t] != kInfiniteDistance && dist[t] <= max_dist) kept.push_back(h.term(t).id);
  return h.subset(kept);
}

}  // namespace

HamiltonianSpec truncate_to_ball(const HamiltonianSpec& h, const SiteSet& a, int ell) {
  if (ell < 1) throw RangeError("truncate_to_ball needs ell >= 1");
  return keep_by_distance(h, a, ell - 2);
}

HamiltonianSpec truncate_to_radius(const HamiltonianSpec& h, const SiteSet& a, int r) {
  if (r < 0) throw RangeError("truncate_to_radius needs r >= 0");
  return keep_by_distance(h, a, r);
}

Model model_from_string(const std::string& s) {
  if (s == "tfim") return Model::tfim;
  if (s == "heisenberg") return Model::heisenberg;
  if (s == "random") return Model::random;
  throw MalformedInput("unknown model '" + s + "'");
}

std::string to_string(Model m) {
  switch (m) {
    case Model::tfim: return "tfim";
    case Model::heisenberg: return "heisenberg";
    case Model::random: return "random";
  }
  return "?";
}

std::vector<std::pair<int, int>> lattice_bonds(const GeometrySpec& geometry) {
  std::vector<std::pair<int, int>> bonds;
  auto add = [&](int a, int b) {
    if (a == b) return;
    auto e = std::minmax(a, b);
    if (std::find(bonds.begin(), bonds.end(), std::pair<int, int>(e.first, e.second)) == bonds.end())
      bonds.emplace_back(e.first, e.second);
  };
  switch (geometry.kind) {
    case GeometryKind::chain: {
      const int n = geometry.extents[0];
      for (int i = 0; i + 1 < n; ++i) add(i, i + 1);
      if (geometry.periodic && n > 2) add(n - 1, 0);
      break;
    }
    case GeometryKind::lattice2d: {
      const int lx = geometry.extents[0];
      const int ly = geometry.extents[1];
      auto idx = [&](int x, int y) { return y * lx + x; };
      for (int y = 0; y < ly; ++y)
        for (int x = 0; x < lx; ++x) {
          if (x + 1 < lx) add(idx(x, y), idx(x + 1, y));
          else if (geometry.periodic && lx > 2) add(idx(x, y), idx(0, y));
          if (y + 1 < ly) add(idx(x, y), idx(x, y + 1));
          else if (geometry.periodic && ly > 2) add(idx(x, y), idx(x, 0));
        }
      break;
    }
    case GeometryKind::custom:
      throw ModeMismatch("custom geometries have no lattice bonds; list the terms explicitly");
  }
  return bonds;
}

HamiltonianSpec make_model(const GeometrySpec& geometry, Model model, std::uint64_t seed,
                           bool random_coefficients) {
  geometry.validate();
  checked_dimension(geometry.num_sites());
  Rng rng(seed);
  const auto bonds = lattice_bonds(geometry);
  const int n = geometry.num_sites();
  std::vector<PauliString> ps;
  auto two = [](int a, Pauli pa, int b, Pauli pb) { return PauliString({{a, pa}, {b, pb}}); };
  switch (model) {
    case Model::tfim:
      for (auto [a, b] : bonds) ps.push_back(two(a, Pauli::Z, b, Pauli::Z));
      for (int i = 0; i < n; ++i) ps.push_back(PauliString({{i, Pauli::X}}));
      break;
    case Model::heisenberg:
      for (auto [a, b] : bonds)
        for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) ps.push_back(two(a, p, b, p));
      break;
    case Model::random:
      random_coefficients = true;
      for (auto [a, b] : bonds) {
        const auto pa = static_cast<Pauli>(1 + rng.uniform_int(3));
        const auto pb = static_cast<Pauli>(1 + rng.uniform_int(3));
        ps.push_back(two(a, pa, b, pb));
      }
      for (int i = 0; i < n; ++i) ps.push_back(PauliString({{i, static_cast<Pauli>(1 + rng.uniform_int(3))}}));
      break;
  }
  std::vector<double> c(ps.size(), 1.0);
  if (random_coefficients)
    for (double& x : c) x = rng.uniform(-1.0, 1.0);
  return HamiltonianSpec::from_paulis(geometry, ps, c);
}

}  // namespace gibbslearn
