#pragma once

#include <compare>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gibbslearn/dense.hpp"
#include "gibbslearn/pauli.hpp"

namespace gibbslearn {

enum class GeometryKind { chain, lattice2d, custom };

struct GeometrySpec {
  GeometryKind kind = GeometryKind::chain;
  std::vector<int> extents;  // sites per axis; custom uses a single entry
  bool periodic = false;
  std::vector<std::string> site_labels;  // custom geometries only

  static GeometrySpec chain(int n, bool periodic = false);
  static GeometrySpec lattice(int lx, int ly, bool periodic = false);
  static GeometrySpec custom(std::vector<std::string> labels);

  int num_sites() const;
  bool is_lattice() const { return kind != GeometryKind::custom; }
  // Throws MalformedInput when the invariants fail.
  void validate() const;
};

std::string to_string(GeometryKind k);
GeometryKind geometry_kind_from_string(const std::string& s);

struct TermId {
  int index = 0;
  auto operator<=>(const TermId&) const = default;
};

constexpr int kInfiniteDistance = std::numeric_limits<int>::max();

// Either a set of sites or a single term (standing for its support).
using Region = std::variant<SiteSet, TermId>;

// Term-level graph: vertices are Hamiltonian terms, edges join terms whose
// supports overlap. Vertex positions follow the input order.
class InteractionGraph {
 public:
  InteractionGraph() = default;
  static InteractionGraph build(const GeometrySpec& spec, std::span<const PauliString> terms,
                                std::span<const TermId> ids = {});

  int num_sites() const { return num_sites_; }
  std::size_t num_terms() const { return supports_.size(); }
  TermId id(std::size_t pos) const { return ids_[pos]; }
  std::size_t position(TermId id) const;  // throws MalformedInput if absent
  const SiteSet& support(std::size_t pos) const { return supports_[pos]; }
  // Neighbours excluding the term itself.
  const std::vector<std::size_t>& neighbors(std::size_t pos) const { return adjacency_[pos]; }
  const std::vector<std::size_t>& terms_at_site(int site) const { return incidence_[site]; }
  bool adjacent(std::size_t a, std::size_t b) const;

  // Maximal closed-neighbourhood size (the self-loop counts once).
  int degree_bound() const { return degree_bound_; }
  // Maximal number of sites touched by one term.
  int locality_bound() const { return locality_bound_; }

  // dist(term, a) for every term; kInfiniteDistance where unreachable.
  std::vector<int> distances_from(const SiteSet& a) const;
  int diameter() const;  // largest finite site-to-term distance

 private:
  int num_sites_ = 0;
  std::vector<TermId> ids_;
  std::vector<SiteSet> supports_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::vector<std::size_t>> incidence_;
  int degree_bound_ = 0;
  int locality_bound_ = 0;
};

// 0 when the supports intersect; otherwise the least l with a chain
// a ~ g1 ~ ... ~ gl ~ b of terms.
int term_distance(const InteractionGraph& g, const Region& a, const Region& b);
// S(l, a): terms at distance exactly l.  V(l, a): terms at distance <= l.
int surface_count(const InteractionGraph& g, const SiteSet& a, int ell);
int volume_count(const InteractionGraph& g, const SiteSet& a, int ell);

}  // namespace gibbslearn
