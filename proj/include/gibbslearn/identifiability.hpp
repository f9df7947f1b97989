#pragma once

#include "gibbslearn/hamiltonian.hpp"
#include "gibbslearn/kernels.hpp"
#include "gibbslearn/spectral.hpp"

namespace gibbslearn {

// Inputs of Q(O, G, A, K) against the state rho of the hidden Hamiltonian.
// All operators live on one register.
struct QInputs {
  Matrix o_op;
  SpectralPtr g_spec;
  Matrix a_op;
  SpectralPtr k_spec;
  Matrix rho;
  KernelParams params;

  static QInputs make(const Matrix& o, const HamiltonianSpec& g, const Matrix& a, const HamiltonianSpec& k,
                      const GibbsState& truth, const KernelParams& params);
  void validate() const;
  Bandwidth bandwidth() const;
  double op_norm_product() const;
};

enum class QPath { frequency_exact, time_quadrature };
std::string to_string(QPath p);

struct QValue {
  cplx value;
  QPath path = QPath::frequency_exact;
  double est_error = 0.0;
};

// Operator Q_op with Tr[Q_op rho] = Q, from the Bohr-frequency weights.
Matrix q_operator_frequency(const QInputs& in);
// Same operator from the discretized double time integral.
Matrix q_operator_time(const QInputs& in, const QuadratureGrid& grid);

QValue q_frequency_exact(const QInputs& in);
QValue q_time_quadrature(const QInputs& in, const QuadratureGrid& grid);

// (beta/2) <O, [A, H - H']>_rho.
cplx identifiability_lhs(const Matrix& o, const Matrix& a, const Matrix& h, const Matrix& h_prime,
                         const GibbsState& truth);
cplx identifiability_lhs(const Matrix& o, const Matrix& a, const HamiltonianSpec& h, const HamiltonianSpec& h_prime,
                         const GibbsState& truth);

// -sum (A_nu1)_nu2 (nu2 - nu1), inner decomposition w.r.t. H1 and outer
// w.r.t. H2. Equals [A, H2] - [A, H1].
Matrix commutator_difference_bohr(const Matrix& a, SpectralPtr h1, SpectralPtr h2);
// sum (A_nu1)_nu2 2 sinh(nu2 - nu1).
Matrix double_bohr_sinh(const Matrix& a, SpectralPtr h1, SpectralPtr h2);

// (beta/2) integral over |w'| >= Omega' of <O, [A_hat_K(w'), H - K]>_rho,
// with the tail integrals done by adaptive quadrature (or closed form).
cplx high_frequency_residual(const QInputs& in, const Matrix& h, bool closed_form = false);

enum class StabilityMode { A_truncate, B_extensive, C_ball };

struct StabilityArgs {
  StabilityMode mode = StabilityMode::A_truncate;
  int ell = 1;        // mode A
  double kappa = 0.0; // modes B, C
  int ell0 = 0;       // modes B, C
};

// Envelopes of the robustness bounds for Q, without their absolute constants.
double stability_bounds(const KernelParams& p, const InteractionGraph& g, const SiteSet& o_sites,
                        const SiteSet& a_sites, const StabilityArgs& args);

}  // namespace gibbslearn
