#include "gibbslearn/interaction_graph.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "gibbslearn/errors.hpp"

namespace gibbslearn {

GeometrySpec GeometrySpec::chain(int n, bool periodic) {
  GeometrySpec g;
  g.kind = GeometryKind::chain;
  g.extents = {n};
  g.periodic = periodic;
  g.validate();
  return g;
}

GeometrySpec GeometrySpec::lattice(int lx, int ly, bool periodic) {
  GeometrySpec g;
  g.kind = GeometryKind::lattice2d;
  g.extents = {lx, ly};
  g.periodic = periodic;
  g.validate();
  return g;
}

GeometrySpec GeometrySpec::custom(std::vector<std::string> labels) {
  GeometrySpec g;
  g.kind = GeometryKind::custom;
  g.extents = {static_cast<int>(labels.size())};
  g.site_labels = std::move(labels);
  g.validate();
  return g;
}

int GeometrySpec::num_sites() const {
  long long n = 1;
  for (int e : extents) n *= e;
  return static_cast<int>(n);
}

void GeometrySpec::validate() const {
  if (extents.empty()) throw MalformedInput("geometry needs at least one extent");
  long long n = 1;
  for (int e : extents) {
    if (e < 1) throw MalformedInput("geometry extents must be positive");
    n *= e;
    if (n > 1000000) throw MalformedInput("geometry too large");
  }
  switch (kind) {
    case GeometryKind::chain:
      if (extents.size() != 1) throw MalformedInput("chain geometry takes one extent");
      break;
    case GeometryKind::lattice2d:
      if (extents.size() != 2) throw MalformedInput("lattice2d geometry takes two extents");
      break;
    case GeometryKind::custom:
      if (extents.size() != 1 || static_cast<std::size_t>(n) != site_labels.size())
        throw MalformedInput("custom geometry must carry an explicit site list");
      break;
  }
}

std::string to_string(GeometryKind k) {
  switch (k) {
    case GeometryKind::chain: return "chain";
    case GeometryKind::lattice2d: return "lattice2d";
    case GeometryKind::custom: return "custom";
  }
  return "?";
}

GeometryKind geometry_kind_from_string(const std::string& s) {
  if (s == "chain") return GeometryKind::chain;
  if (s == "lattice2d") return GeometryKind::lattice2d;
  if (s == "custom") return GeometryKind::custom;
  throw MalformedInput("unknown geometry kind '" + s + "'");
}

InteractionGraph InteractionGraph::build(const GeometrySpec& spec, std::span<const PauliString> terms,
                                         std::span<const TermId> ids) {
  spec.validate();
  if (!ids.empty() && ids.size() != terms.size())
    throw MalformedInput("term id list does not match the term list");
  InteractionGraph g;
  g.num_sites_ = spec.num_sites();
  g.incidence_.assign(static_cast<std::size_t>(g.num_sites_), {});
  const std::size_t m = terms.size();
  g.ids_.resize(m);
  g.supports_.resize(m);
  g.adjacency_.assign(m, {});
  for (std::size_t t = 0; t < m; ++t) {
    g.ids_[t] = ids.empty() ? TermId{static_cast<int>(t)} : ids[t];
    g.supports_[t] = terms[t].support();
    if (terms[t].max_site() >= g.num_sites_)
      throw MalformedInput("term " + terms[t].to_string() + " acts on a site outside the geometry");
    for (int s : g.supports_[t]) g.incidence_[static_cast<std::size_t>(s)].push_back(t);
    g.locality_bound_ = std::max(g.locality_bound_, static_cast<int>(g.supports_[t].size()));
  }
  {
    std::vector<TermId> sorted = g.ids_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw MalformedInput("duplicate term id");
  }
  for (std::size_t t = 0; t < m; ++t) {
    std::vector<std::size_t> nb;
    for (int s : g.supports_[t])
      for (std::size_t u : g.incidence_[static_cast<std::size_t>(s)])
        if (u != t) nb.push_back(u);
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    g.degree_bound_ = std::max(g.degree_bound_, static_cast<int>(nb.size()) + 1);
    g.adjacency_[t] = std::move(nb);
  }
  return g;
}

std::size_t InteractionGraph::position(TermId id) const {
  for (std::size_t t = 0; t < ids_.size(); ++t)
    if (ids_[t] == id) return t;
  throw MalformedInput("unknown term id " + std::to_string(id.index));
}

bool InteractionGraph::adjacent(std::size_t a, std::size_t b) const {
  const auto& nb = adjacency_[a];
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::vector<int> InteractionGraph::distances_from(const SiteSet& a) const {
  std::vector<int> dist(num_terms(), kInfiniteDistance);
  std::deque<std::size_t> queue;
  for (int s : a) {
    if (s < 0 || s >= num_sites_) throw MalformedInput("site outside the geometry");
    for (std::size_t t : incidence_[static_cast<std::size_t>(s)])
      if (dist[t] != 0) {
        dist[t] = 0;
        queue.push_back(t);
      }
  }
  while (!queue.empty()) {
    const std::size_t t = queue.front();
    queue.pop_front();
    for (std::size_t u : adjacency_[t])
      if (dist[u] == kInfiniteDistance) {
        dist[u] = dist[t] + 1;
        queue.push_back(u);
      }
  }
  return dist;
}

int InteractionGraph::diameter() const {
  int best = 0;
  for (int s = 0; s < num_sites_; ++s)
    for (int d : distances_from({s}))
      if (d != kInfiniteDistance) best = std::max(best, d);
  return best;
}

namespace {

SiteSet region_sites(const InteractionGraph& g, const Region& r) {
  if (const auto* s = std::get_if<SiteSet>(&r)) return make_site_set(*s);
  return g.support(g.position(std::get<TermId>(r)));
}

}  // namespace

int term_distance(const InteractionGraph& g, const Region& a, const Region& b) {
  const SiteSet sa = region_sites(g, a);
  const SiteSet sb = region_sites(g, b);
  if (sa.empty() || sb.empty()) throw MalformedInput("term_distance needs nonempty regions");
  if (sites_intersect(sa, sb)) return 0;
  // A chain g1..gl has g1 touching a and gl touching b, so l is one more
  // than the graph distance between the two incident term sets.
  const std::vector<int> dist = g.distances_from(sa);
  int best = kInfiniteDistance;
  for (int s : sb)
    for (std::size_t t : g.terms_at_site(s)) best = std::min(best, dist[t]);
  return best == kInfiniteDistance ? kInfiniteDistance : best + 1;
}

int surface_count(const InteractionGraph& g, const SiteSet& a, int ell) {
  if (ell < 0) throw RangeError("surface_count needs ell >= 0");
  const auto dist = g.distances_from(a);
  return static_cast<int>(std::count(dist.begin(), dist.end(), ell));
}

int volume_count(const InteractionGraph& g, const SiteSet& a, int ell) {
  if (ell < 0) throw RangeError("volume_count needs ell >= 0");
  const auto dist = g.distances_from(a);
  return static_cast<int>(std::count_if(dist.begin(), dist.end(), [&](int d) { return d <= ell; }));
}

}  // namespace gibbslearn
