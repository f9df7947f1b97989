#pragma once

#include <vector>

#include "gibbslearn/hamiltonian.hpp"

namespace gibbslearn {

// ||A|| min(2, |A| (2 d |t|)^l / l!), without the absolute constant.
double lr_bound(double norm_a, int support_size, int degree, double t, int ell);

// (1/d) sum_delta |f_delta - f'_delta| min((2dt)^{m+1}/(m+1)!, 2t) with
// m = dist(delta, A); `deltas` is indexed like g's terms.
double lr_perturbation_bound(const InteractionGraph& g, const std::vector<double>& deltas, const SiteSet& a_sites,
                             double t);

// ||A_{H_l}(t) - A_H(t)|| for A on the full register of h.
double lr_truncation_error(const HamiltonianSpec& h, const Matrix& a, const SiteSet& a_sites, double t, int ell);

}  // namespace gibbslearn
