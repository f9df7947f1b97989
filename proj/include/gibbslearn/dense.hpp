#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <vector>

namespace gibbslearn {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Sorted, duplicate-free list of 0-based site indices.
using SiteSet = std::vector<int>;

SiteSet make_site_set(std::vector<int> sites);
SiteSet site_union(const SiteSet& a, const SiteSet& b);
bool sites_intersect(const SiteSet& a, const SiteSet& b);

// Largest Hilbert-space dimension any dense operator may have.
std::size_t dense_dimension_cap();
void set_dense_dimension_cap(std::size_t cap);
// Throws ResourceError when 2^num_qubits exceeds the cap.
std::size_t checked_dimension(int num_qubits);

double op_norm(const Matrix& a);
double hermiticity_defect(const Matrix& a);
Matrix commutator(const Matrix& a, const Matrix& b);
Matrix dagger(const Matrix& a);

// Partial trace of an operator on `reg` (ordered sites, first = most
// significant bit) down to the sites in `keep` (a subset of reg).
Matrix partial_trace(const Matrix& rho, const SiteSet& reg, const SiteSet& keep);

// Embeds an operator on `sub` into the register `reg` (identity elsewhere).
Matrix embed(const Matrix& a, const SiteSet& sub, const SiteSet& reg);

}  // namespace gibbslearn
