#include "gibbslearn/lieb_robinson.hpp"

#include <algorithm>
#include <cmath>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/spectral.hpp"

namespace gibbslearn {

double lr_bound(double norm_a, int support_size, int degree, double t, int ell) {
  if (ell < 0) throw RangeError("lr_bound needs ell >= 0");
  const double x = 2.0 * degree * std::abs(t);
  // (x^l / l!) in log space.
  const double log_term = ell == 0 ? 0.0 : ell * std::log(x) - std::lgamma(ell + 1.0);
  const double series = x == 0.0 && ell > 0 ? 0.0 : support_size * std::exp(log_term);
  return norm_a * std::min(2.0, series);
}

double lr_perturbation_bound(const InteractionGraph& g, const std::vector<double>& deltas, const SiteSet& a_sites,
                             double t) {
  if (deltas.size() != g.num_terms()) throw MalformedInput("perturbation list does not match the term list");
  const auto dist = g.distances_from(a_sites);
  const double d = g.degree_bound();
  const double x = 2.0 * d * std::abs(t);
  double total = 0.0;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (deltas[k] == 0.0) continue;
    double factor = 2.0 * std::abs(t);
    if (dist[k] != kInfiniteDistance) {
      const int m = dist[k] + 1;
      const double series = x == 0.0 ? 0.0 : std::exp(m * std::log(x) - std::lgamma(m + 1.0));
      factor = std::min(series, factor);
    }
    total += std::abs(deltas[k]) * factor;
  }
  return total / d;
}

double lr_truncation_error(const HamiltonianSpec& h, const Matrix& a, const SiteSet& a_sites, double t, int ell) {
  const HamiltonianSpec hl = truncate_to_ball(h, a_sites, ell);
  const auto full = SpectralData::from_dense(to_dense(h));
  const auto part = SpectralData::from_dense(to_dense(hl));
  return op_norm(heisenberg_evolve(a, *part, t) - heisenberg_evolve(a, *full, t));
}

}  // namespace gibbslearn
