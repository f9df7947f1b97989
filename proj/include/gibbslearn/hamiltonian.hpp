#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gibbslearn/interaction_graph.hpp"
#include "gibbslearn/pauli.hpp"

namespace gibbslearn {

struct Term {
  TermId id;
  PauliString pauli;  // phase must be +1
  double coefficient = 0.0;
};

// H = sum_g h_g P_g over distinct non-identity Pauli strings.
class HamiltonianSpec {
 public:
  HamiltonianSpec() = default;
  HamiltonianSpec(GeometrySpec geometry, std::vector<Term> terms);
  // Ids are assigned 0..m-1 in input order.
  static HamiltonianSpec from_paulis(GeometrySpec geometry, const std::vector<PauliString>& paulis,
                                     const std::vector<double>& coefficients);

  const GeometrySpec& geometry() const { return geometry_; }
  int num_sites() const { return geometry_.num_sites(); }
  std::size_t size() const { return terms_.size(); }
  std::span<const Term> terms() const { return terms_; }
  const Term& term(std::size_t pos) const { return terms_[pos]; }
  const InteractionGraph& graph() const { return graph_; }

  std::optional<std::size_t> position(TermId id) const;
  std::vector<double> coefficients() const;
  std::vector<TermId> ids() const;
  std::vector<PauliString> paulis() const;

  HamiltonianSpec with_coefficients(std::span<const double> coefficients) const;
  // Terms whose ids are listed (graph rebuilt over the subset).
  HamiltonianSpec subset(const std::vector<TermId>& ids) const;
  // Throws MalformedInput unless every |h| <= 1.
  void require_unit_range() const;

 private:
  GeometrySpec geometry_;
  std::vector<Term> terms_;
  InteractionGraph graph_;
};

Matrix to_dense(const HamiltonianSpec& h);
Matrix to_dense(const HamiltonianSpec& h, const SiteSet& reg);
// Union of the term supports.
SiteSet support(const HamiltonianSpec& h);

// H_l: terms with dist(g, a) < ell - 1, exactly as in the ball definition.
HamiltonianSpec truncate_to_ball(const HamiltonianSpec& h, const SiteSet& a, int ell);
// Terms with dist(g, a) <= r.
HamiltonianSpec truncate_to_radius(const HamiltonianSpec& h, const SiteSet& a, int r);

enum class Model { tfim, heisenberg, random };
Model model_from_string(const std::string& s);
std::string to_string(Model m);

// Named models. Bonds are nearest neighbours on the geometry. The canonical
// couplings are 1; with random_coefficients they are drawn from U[-1, 1].
// The random model places a random two-site Pauli on every bond and a random
// single-site Pauli on every site.
HamiltonianSpec make_model(const GeometrySpec& geometry, Model model, std::uint64_t seed,
                           bool random_coefficients = false);

std::vector<std::pair<int, int>> lattice_bonds(const GeometrySpec& geometry);

}  // namespace gibbslearn
