#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gibbslearn/dense.hpp"
#include "gibbslearn/hamiltonian.hpp"

namespace gibbslearn {

// Eigendecomposition H = U diag(E) U^dag with eigenvalues grouped into
// eigenspaces: energies closer than degeneracy_tol share a level.
class SpectralData {
 public:
  // Negative tolerance selects the default 1e-9 * max(1, ||H||).
  static std::shared_ptr<const SpectralData> from_dense(const Matrix& h, double degeneracy_tol = -1.0);

  std::size_t dim() const { return static_cast<std::size_t>(energies_.size()); }
  const RealVector& energies() const { return energies_; }
  const Matrix& basis() const { return basis_; }
  double degeneracy_tol() const { return degeneracy_tol_; }
  double min_energy() const { return energies_.minCoeff(); }
  double max_energy() const { return energies_.maxCoeff(); }
  double spread() const { return max_energy() - min_energy(); }
  // Eigenspace index of each eigenvector and the energy of each eigenspace.
  const std::vector<int>& level_of() const { return level_of_; }
  const std::vector<double>& levels() const { return levels_; }

  Matrix to_eigenbasis(const Matrix& a) const { return basis_.adjoint() * a * basis_; }
  Matrix from_eigenbasis(const Matrix& a) const { return basis_ * a * basis_.adjoint(); }
  Matrix dense() const;

 private:
  RealVector energies_;
  Matrix basis_;
  double degeneracy_tol_ = 0.0;
  std::vector<int> level_of_;
  std::vector<double> levels_;
};

using SpectralPtr = std::shared_ptr<const SpectralData>;

// A = sum_nu A_nu over Bohr frequencies nu = E2 - E1 of the eigenspace
// levels. Components are stored implicitly through the eigenbasis operator
// and a frequency label for every matrix entry.
class BohrDecomposition {
 public:
  BohrDecomposition(const Matrix& a, SpectralPtr s, double grouping_tol = -1.0);

  const std::vector<double>& frequencies() const { return frequencies_; }
  std::size_t size() const { return frequencies_.size(); }
  double grouping_tol() const { return grouping_tol_; }
  Matrix component(std::size_t k) const;
  // Zero operator when nu is not a frequency of the decomposition.
  Matrix component_at(double nu) const;
  // sum_nu w(nu) A_nu.
  Matrix weighted_sum(const std::function<cplx(double)>& w) const;
  const Matrix& eigenbasis_operator() const { return a_eig_; }
  const SpectralData& spectral() const { return *spec_; }

 private:
  SpectralPtr spec_;
  Matrix a_eig_;
  double grouping_tol_;
  std::vector<double> frequencies_;
  Eigen::MatrixXi freq_index_;  // (row, col) -> frequency slot
};

BohrDecomposition bohr_decompose(const Matrix& a, SpectralPtr s);

class GibbsState {
 public:
  GibbsState(const Matrix& h, double beta);
  GibbsState(const HamiltonianSpec& h, double beta);
  GibbsState(SpectralPtr s, double beta);

  double beta() const { return beta_; }
  const Matrix& rho() const { return rho_; }
  const Matrix& sqrt_rho() const { return sqrt_rho_; }
  const Matrix& inv_sqrt_rho() const { return inv_sqrt_rho_; }
  const SpectralData& spectral() const { return *spec_; }
  SpectralPtr spectral_ptr() const { return spec_; }
  // Eigenvalues of rho in the spectral basis.
  const RealVector& populations() const { return populations_; }
  int num_qubits() const;
  // Reduced state on `keep` (sites of the register 0..n-1).
  Matrix reduced(const SiteSet& keep) const;

 private:
  void init();
  SpectralPtr spec_;
  double beta_;
  RealVector populations_;
  Matrix rho_, sqrt_rho_, inv_sqrt_rho_;
};

GibbsState gibbs_state(const HamiltonianSpec& h, double beta);

Matrix heisenberg_evolve(const Matrix& a, const SpectralData& s, double t);
Matrix operator_fourier_transform(const BohrDecomposition& b, double omega, double sigma);
// e^{beta H} A e^{-beta H}. Throws RangeError if beta * spread exceeds cap.
Matrix imaginary_conjugate(const Matrix& a, const SpectralData& s, double beta, double exponent_cap = 700.0);

cplx kms_inner_product(const Matrix& x, const Matrix& y, const GibbsState& g);
double kms_norm(const Matrix& x, const GibbsState& g);
// Normalized Hilbert-Schmidt norm sqrt(Tr[x^dag x] / dim), the beta = 0 KMS norm.
double tau_norm(const Matrix& x);

}  // namespace gibbslearn
