#include "gibbslearn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/kernels.hpp"

namespace gibbslearn {

namespace {

// Groups sorted values into clusters whose consecutive gaps are <= tol.
// Returns cluster id per input (in input order) and cluster means.
std::pair<std::vector<int>, std::vector<double>> cluster_values(const std::vector<double>& values, double tol) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<int> id(values.size(), 0);
  std::vector<double> means;
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double v = values[order[k]];
    if (k > 0 && v - values[order[k - 1]] > tol) {
      means.push_back(sum / count);
      sum = 0.0;
      count = 0;
    }
    id[order[k]] = static_cast<int>(means.size());
    sum += v;
    ++count;
  }
  if (count > 0) means.push_back(sum / count);
  return {id, means};
}

}  // namespace

std::shared_ptr<const SpectralData> SpectralData::from_dense(const Matrix& h, double degeneracy_tol) {
  if (h.rows() != h.cols() || h.rows() == 0) throw MalformedInput("spectral data needs a square matrix");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermiticity_defect(h) > 1e-10 * scale) throw ConsistencyError("Hamiltonian is not Hermitian");
  auto s = std::make_shared<SpectralData>();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalStateError("eigendecomposition failed");
  s->energies_ = es.eigenvalues();
  s->basis_ = es.eigenvectors();
  const double norm = std::max(std::abs(s->energies_.minCoeff()), std::abs(s->energies_.maxCoeff()));
  s->degeneracy_tol_ = degeneracy_tol >= 0.0 ? degeneracy_tol : 1e-9 * std::max(1.0, norm);
  std::vector<double> e(s->energies_.data(), s->energies_.data() + s->energies_.size());
  auto [ids, means] = cluster_values(e, s->degeneracy_tol_);
  s->level_of_ = std::move(ids);
  s->levels_ = std::move(means);
  return s;
}

Matrix SpectralData::dense() const { return basis_ * energies_.cast<cplx>().asDiagonal() * basis_.adjoint(); }

BohrDecomposition::BohrDecomposition(const Matrix& a, SpectralPtr s, double grouping_tol)
    : spec_(std::move(s)), grouping_tol_(grouping_tol >= 0.0 ? grouping_tol : spec_->degeneracy_tol()) {
  const std::size_t n = spec_->dim();
  if (static_cast<std::size_t>(a.rows()) != n || static_cast<std::size_t>(a.cols()) != n)
    throw MalformedInput("Bohr decomposition: dimension mismatch");
  a_eig_ = spec_->to_eigenbasis(a);
  const auto& lv = spec_->levels();
  const std::size_t nl = lv.size();
  std::vector<double> diffs(nl * nl);
  for (std::size_t r = 0; r < nl; ++r)
    for (std::size_t c = 0; c < nl; ++c) diffs[r * nl + c] = lv[r] - lv[c];
  auto [ids, means] = cluster_values(diffs, grouping_tol_);
  // Keep 0 exact and the set symmetric.
  for (double& m : means)
    if (std::abs(m) <= grouping_tol_) m = 0.0;
  frequencies_ = means;
  freq_index_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto& lo = spec_->level_of();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      freq_index_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          ids[static_cast<std::size_t>(lo[r]) * nl + static_cast<std::size_t>(lo[c])];
}

Matrix BohrDecomposition::component(std::size_t k) const {
  Matrix m = Matrix::Zero(a_eig_.rows(), a_eig_.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (freq_index_(r, c) == static_cast<int>(k)) m(r, c) = a_eig_(r, c);
  return spec_->from_eigenbasis(m);
}

Matrix BohrDecomposition::component_at(double nu) const {
  for (std::size_t k = 0; k < frequencies_.size(); ++k)
    if (std::abs(frequencies_[k] - nu) <= grouping_tol_) return component(k);
  return Matrix::Zero(a_eig_.rows(), a_eig_.cols());
}

Matrix BohrDecomposition::weighted_sum(const std::function<cplx(double)>& w) const {
  std::vector<cplx> wk(frequencies_.size());
  for (std::size_t k = 0; k < wk.size(); ++k) wk[k] = w(frequencies_[k]);
  Matrix m(a_eig_.rows(), a_eig_.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = a_eig_(r, c) * wk[static_cast<std::size_t>(freq_index_(r, c))];
  return spec_->from_eigenbasis(m);
}

BohrDecomposition bohr_decompose(const Matrix& a, SpectralPtr s) { return BohrDecomposition(a, std::move(s)); }

GibbsState::GibbsState(const Matrix& h, double beta) : spec_(SpectralData::from_dense(h)), beta_(beta) { init(); }

GibbsState::GibbsState(const HamiltonianSpec& h, double beta) : GibbsState(to_dense(h), beta) {}

GibbsState::GibbsState(SpectralPtr s, double beta) : spec_(std::move(s)), beta_(beta) { init(); }

void GibbsState::init() {
  if (!(beta_ >= 0.0) || !std::isfinite(beta_)) throw RangeError("Gibbs state needs finite beta >= 0");
  const RealVector& e = spec_->energies();
  const double e0 = e.minCoeff();
  // Shift by the ground energy so the largest weight is exactly 1.
  RealVector w = (-beta_ * (e.array() - e0)).exp().matrix();
  const double z = w.sum();
  populations_ = w / z;
  const Matrix& u = spec_->basis();
  rho_ = u * populations_.cast<cplx>().asDiagonal() * u.adjoint();
  sqrt_rho_ = u * populations_.cwiseSqrt().cast<cplx>().asDiagonal() * u.adjoint();
  // rho^{-1/2} = sqrt(z) e^{beta (E - e0) / 2}, built from the shifted exponent.
  RealVector inv = (0.5 * beta_ * (e.array() - e0)).exp().matrix() * std::sqrt(z);
  inv_sqrt_rho_ = u * inv.cast<cplx>().asDiagonal() * u.adjoint();
}

int GibbsState::num_qubits() const {
  int n = 0;
  while ((std::size_t{1} << n) < spec_->dim()) ++n;
  return n;
}

Matrix GibbsState::reduced(const SiteSet& keep) const {
  const int n = num_qubits();
  SiteSet reg(static_cast<std::size_t>(n));
  std::iota(reg.begin(), reg.end(), 0);
  return partial_trace(rho_, reg, make_site_set(keep));
}

GibbsState gibbs_state(const HamiltonianSpec& h, double beta) { return GibbsState(h, beta); }

Matrix heisenberg_evolve(const Matrix& a, const SpectralData& s, double t) {
  const RealVector& e = s.energies();
  Matrix ae = s.to_eigenbasis(a);
  for (Eigen::Index c = 0; c < ae.cols(); ++c)
    for (Eigen::Index r = 0; r < ae.rows(); ++r) ae(r, c) *= std::polar(1.0, (e(r) - e(c)) * t);
  return s.from_eigenbasis(ae);
}

Matrix operator_fourier_transform(const BohrDecomposition& b, double omega, double sigma) {
  if (!(sigma > 0.0)) throw RangeError("operator Fourier transform needs sigma > 0");
  return b.weighted_sum([&](double nu) { return cplx(kernels::f_hat(omega - nu, sigma)); });
}

Matrix imaginary_conjugate(const Matrix& a, const SpectralData& s, double beta, double exponent_cap) {
  if (std::abs(beta) * s.spread() > exponent_cap)
    throw RangeError("imaginary-time conjugation exponent exceeds the overflow cap");
  const RealVector& e = s.energies();
  Matrix ae = s.to_eigenbasis(a);
  for (Eigen::Index c = 0; c < ae.cols(); ++c)
    for (Eigen::Index r = 0; r < ae.rows(); ++r) ae(r, c) *= std::exp(beta * (e(r) - e(c)));
  return s.from_eigenbasis(ae);
}

cplx kms_inner_product(const Matrix& x, const Matrix& y, const GibbsState& g) {
  if (x.rows() != g.rho().rows() || y.rows() != g.rho().rows()) throw MalformedInput("KMS inner product: dimension mismatch");
  return (x.adjoint() * g.sqrt_rho() * y * g.sqrt_rho()).trace();
}

double kms_norm(const Matrix& x, const GibbsState& g) {
  return std::sqrt(std::max(0.0, kms_inner_product(x, x, g).real()));
}

double tau_norm(const Matrix& x) {
  return std::sqrt(x.squaredNorm() / static_cast<double>(x.rows()));
}

}  // namespace gibbslearn
