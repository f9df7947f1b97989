#include "gibbslearn/identifiability.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "gibbslearn/errors.hpp"

namespace gibbslearn {

namespace {

using kernels::bohr_weight_minus;
using kernels::bohr_weight_plus;
using kernels::g_hat;

struct Node {
  double t;
  double weight;
};

std::vector<Node> quadrature_nodes(double half_width, double step, QuadratureRule rule) {
  const int panels = static_cast<int>(std::lround(2.0 * half_width / step));
  std::vector<Node> nodes;
  if (rule == QuadratureRule::trapezoid) {
    for (int j = 0; j <= panels; ++j)
      nodes.push_back({-half_width + j * step, (j == 0 || j == panels) ? 0.5 * step : step});
    return nodes;
  }
  // Composite 4-point Gauss-Legendre per panel.
  static const double x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  for (int j = 0; j < panels; ++j) {
    const double mid = -half_width + (j + 0.5) * step;
    for (int k = 0; k < 4; ++k) nodes.push_back({mid + 0.5 * step * x[k], 0.5 * step * w[k]});
  }
  return nodes;
}

bool same_spectrum(const QInputs& in) {
  return in.g_spec == in.k_spec ||
         (in.g_spec->energies() == in.k_spec->energies() && in.g_spec->basis() == in.k_spec->basis());
}

}  // namespace

QInputs QInputs::make(const Matrix& o, const HamiltonianSpec& g, const Matrix& a, const HamiltonianSpec& k,
                      const GibbsState& truth, const KernelParams& params) {
  QInputs in;
  in.o_op = o;
  in.a_op = a;
  in.g_spec = SpectralData::from_dense(to_dense(g));
  in.k_spec = SpectralData::from_dense(to_dense(k));
  in.rho = truth.rho();
  in.params = params;
  in.validate();
  return in;
}

void QInputs::validate() const {
  params.validate();
  if (!g_spec || !k_spec) throw MalformedInput("Q inputs need spectral data for G and K");
  const auto n = static_cast<Eigen::Index>(k_spec->dim());
  if (o_op.rows() != n || o_op.cols() != n || a_op.rows() != n || a_op.cols() != n || rho.rows() != n ||
      rho.cols() != n || static_cast<Eigen::Index>(g_spec->dim()) != n)
    throw MalformedInput("Q inputs: operator dimensions differ");
  if (!o_op.allFinite() || !a_op.allFinite()) throw MalformedInput("Q inputs: non-finite operator");
}

Bandwidth QInputs::bandwidth() const {
  return Bandwidth{g_spec->spread(), k_spec->spread(), static_cast<double>(k_spec->dim())};
}

double QInputs::op_norm_product() const { return op_norm(o_op) * op_norm(a_op); }

std::string to_string(QPath p) { return p == QPath::frequency_exact ? "frequency_exact" : "time_quadrature"; }

Matrix q_operator_frequency(const QInputs& in) {
  in.validate();
  const KernelParams& p = in.params;
  const std::size_t n = in.k_spec->dim();
  const RealVector& k = in.k_spec->energies();
  const Matrix& uk = in.k_spec->basis();
  const Matrix od = in.o_op.adjoint();
  const Matrix at = in.k_spec->to_eigenbasis(in.a_op);
  Eigen::MatrixXd wp(n, n), wm(n, n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t d = 0; d < n; ++d) {
      const double nu = k(c) - k(d);
      wp(c, d) = bohr_weight_plus(nu, p);
      wm(c, d) = bohr_weight_minus(nu, p);
    }

  if (in.g_spec->levels().size() == 1) {
    // G proportional to the identity: O^dag has only the zero frequency.
    Matrix bp(n, n), bm(n, n);
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t d = 0; d < n; ++d) {
        const double gh = g_hat(p.beta * (k(c) - k(d)) / 2.0);
        bp(c, d) = at(c, d) * (gh * wp(c, d));
        bm(c, d) = at(c, d) * (gh * wm(c, d));
      }
    return od * (uk * bp * uk.adjoint()) - (uk * bm * uk.adjoint()) * od;
  }

  if (same_spectrum(in)) {
    const Matrix ot = in.k_spec->to_eigenbasis(od);
    const Matrix x = ot * at.cwiseProduct(wp.cast<cplx>());
    const Matrix y = at.cwiseProduct(wm.cast<cplx>()) * ot;
    Matrix q(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t d = 0; d < n; ++d) q(a, d) = g_hat(p.beta * (k(a) - k(d)) / 2.0) * (x(a, d) - y(a, d));
    return in.k_spec->from_eigenbasis(q);
  }

  // General case: O^dag in G's eigenbasis, A in K's, joined by V = U_G^dag U_K.
  const RealVector& g = in.g_spec->energies();
  const Matrix& ug = in.g_spec->basis();
  const Matrix ot = in.g_spec->to_eigenbasis(od);
  const Matrix v = ug.adjoint() * uk;
  const Matrix vd = v.adjoint();
  Matrix x = Matrix::Zero(n, n);  // first term, maps K basis -> G basis
  Matrix y = Matrix::Zero(n, n);  // second term, maps G basis -> K basis
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const cplx oab = ot(a, b);
      if (oab == cplx(0.0)) continue;
      const double mu = g(a) - g(b);
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = 0; d < n; ++d) {
          const cplx acd = at(c, d);
          if (acd == cplx(0.0)) continue;
          const double gh = g_hat(p.beta * (mu + k(c) - k(d)) / 2.0);
          x(a, d) += oab * v(b, c) * acd * (gh * wp(c, d));
          y(c, b) += acd * vd(d, a) * oab * (gh * wm(c, d));
        }
    }
  return ug * x * uk.adjoint() - uk * y * ug.adjoint();
}

QValue q_frequency_exact(const QInputs& in) {
  const Matrix q = q_operator_frequency(in);
  return QValue{(q * in.rho).trace(), QPath::frequency_exact, 0.0};
}

Matrix q_operator_time(const QInputs& in, const QuadratureGrid& grid) {
  in.validate();
  grid.validate();
  const KernelParams& p = in.params;
  const std::size_t n = in.k_spec->dim();
  const RealVector& k = in.k_spec->energies();
  const RealVector& g = in.g_spec->energies();
  const Matrix at = in.k_spec->to_eigenbasis(in.a_op);
  const Matrix ot = in.g_spec->to_eigenbasis(in.o_op.adjoint());

  // Inner integral over t' folded into the K-basis entries:
  // C_pm = sum_k w_k h_pm(t'_k) A_K(t'_k).
  const auto inner = quadrature_nodes(grid.tprime_max, grid.step, grid.rule);
  std::vector<cplx> hp(inner.size()), hm(inner.size());
  for (std::size_t j = 0; j < inner.size(); ++j) {
    hp[j] = inner[j].weight * kernels::h_plus(inner[j].t, p);
    hm[j] = inner[j].weight * kernels::h_minus(inner[j].t, p);
  }
  Matrix cp(n, n), cm(n, n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t d = 0; d < n; ++d) {
      const double nu = k(c) - k(d);
      cplx sp = 0.0, sm = 0.0;
      for (std::size_t j = 0; j < inner.size(); ++j) {
        const cplx ph = std::polar(1.0, nu * inner[j].t);
        sp += hp[j] * ph;
        sm += hm[j] * ph;
      }
      cp(c, d) = at(c, d) * sp;
      cm(c, d) = at(c, d) * sm;
    }

  const auto outer = quadrature_nodes(grid.t_max, grid.step, grid.rule);
  Matrix q = Matrix::Zero(n, n);
  Matrix xp(n, n), xm(n, n), o_t(n, n);
  for (const Node& node : outer) {
    const double gb = kernels::g_beta(node.t, p.beta) * node.weight;
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t d = 0; d < n; ++d) {
        const cplx ph = std::polar(1.0, (k(c) - k(d)) * node.t);
        xp(c, d) = cp(c, d) * ph;
        xm(c, d) = cm(c, d) * ph;
        o_t(c, d) = ot(c, d) * std::polar(1.0, (g(c) - g(d)) * node.t);
      }
    const Matrix o_full = in.g_spec->from_eigenbasis(o_t);
    q += gb * (o_full * in.k_spec->from_eigenbasis(xp) - in.k_spec->from_eigenbasis(xm) * o_full);
  }
  return q / (2.0 * std::numbers::pi);
}

QValue q_time_quadrature(const QInputs& in, const QuadratureGrid& grid) {
  const Matrix q = q_operator_time(in, grid);
  const double est = kernels::quadrature_error_estimate(in.params, grid, in.op_norm_product(), in.bandwidth());
  return QValue{(q * in.rho).trace(), QPath::time_quadrature, est};
}

cplx identifiability_lhs(const Matrix& o, const Matrix& a, const Matrix& h, const Matrix& h_prime,
                         const GibbsState& truth) {
  return 0.5 * truth.beta() * kms_inner_product(o, commutator(a, h - h_prime), truth);
}

cplx identifiability_lhs(const Matrix& o, const Matrix& a, const HamiltonianSpec& h, const HamiltonianSpec& h_prime,
                         const GibbsState& truth) {
  return identifiability_lhs(o, a, to_dense(h), to_dense(h_prime), truth);
}

namespace {

Matrix double_bohr_sum(const Matrix& a, SpectralPtr h1, SpectralPtr h2, const std::function<double(double)>& w) {
  const BohrDecomposition outer(a, std::move(h1));
  Matrix total = Matrix::Zero(a.rows(), a.cols());
  for (std::size_t j = 0; j < outer.size(); ++j) {
    const double nu1 = outer.frequencies()[j];
    const BohrDecomposition inner(outer.component(j), h2);
    total += inner.weighted_sum([&](double nu2) { return cplx(w(nu2 - nu1)); });
  }
  return total;
}

}  // namespace

Matrix commutator_difference_bohr(const Matrix& a, SpectralPtr h1, SpectralPtr h2) {
  return double_bohr_sum(a, std::move(h1), std::move(h2), [](double x) { return -x; });
}

Matrix double_bohr_sinh(const Matrix& a, SpectralPtr h1, SpectralPtr h2) {
  return double_bohr_sum(a, std::move(h1), std::move(h2), [](double x) { return 2.0 * std::sinh(x); });
}

cplx high_frequency_residual(const QInputs& in, const Matrix& h, bool closed_form) {
  in.validate();
  const KernelParams& p = in.params;
  const std::size_t n = in.k_spec->dim();
  const RealVector& k = in.k_spec->energies();
  const Matrix& u = in.k_spec->basis();
  const Matrix diff = h - in.k_spec->dense();
  const Matrix at = in.k_spec->to_eigenbasis(in.a_op);
  // rho is positive; its square root comes from the eigendecomposition.
  Eigen::SelfAdjointEigenSolver<Matrix> es(in.rho);
  const Matrix sq = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<cplx>().asDiagonal() *
                    es.eigenvectors().adjoint();
  const Matrix m = sq * in.o_op.adjoint() * sq;
  const Matrix left = u.adjoint() * diff * m * u;
  const Matrix right = u.adjoint() * m * diff * u;
  std::map<double, double> tail_cache;
  cplx total = 0.0;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t d = 0; d < n; ++d) {
      const cplx s = at(c, d) * (left(d, c) - right(d, c));
      if (s == cplx(0.0)) continue;
      const double nu = k(c) - k(d);
      auto it = tail_cache.find(nu);
      if (it == tail_cache.end())
        it = tail_cache.emplace(nu, closed_form ? kernels::tail_mass(nu, p) : quadrature::tail_mass(nu, p)).first;
      total += s * it->second;
    }
  return 0.5 * p.beta * total;
}

double stability_bounds(const KernelParams& p, const InteractionGraph& g, const SiteSet& o_sites,
                        const SiteSet& a_sites, const StabilityArgs& args) {
  p.validate();
  const double d = g.degree_bound();
  const double beta = p.beta;
  const double e2 = std::exp(2.0);
  const double e4 = e2 * e2;
  const double pref = std::exp(beta * p.omega_cut / 2.0);
  switch (args.mode) {
    case StabilityMode::A_truncate: {
      const double l = args.ell;
      const double decay = std::exp(-l * l / (16.0 * e4 * d * d * beta * beta)) + std::exp(-std::numbers::pi * l / (e2 * d * beta));
      return pref / std::sqrt(beta) * decay * static_cast<double>(o_sites.size() + a_sites.size());
    }
    case StabilityMode::B_extensive: {
      const auto da = g.distances_from(a_sites);
      const auto dob = g.distances_from(o_sites);
      int max_dist = 0;
      for (int x : da)
        if (x != kInfiniteDistance) max_dist = std::max(max_dist, x);
      for (int x : dob)
        if (x != kInfiniteDistance) max_dist = std::max(max_dist, x);
      double sum = 0.0;
      for (int l = std::max(0, args.ell0); l <= max_dist; ++l) {
        const double s = static_cast<double>(std::count(da.begin(), da.end(), l) + std::count(dob.begin(), dob.end(), l));
        const double decay = std::exp(-double(l) * l / (16.0 * e4 * d * d * beta * beta)) +
                             std::exp(-std::numbers::pi * l / (2.0 * e2 * d * beta));
        sum += s * (beta + l / d) * decay;
      }
      return args.kappa * pref / std::sqrt(beta) * sum;
    }
    case StabilityMode::C_ball:
      return args.kappa * std::sqrt(beta) / d * pref *
             (volume_count(g, o_sites, args.ell0) + volume_count(g, a_sites, args.ell0));
  }
  return 0.0;
}

}  // namespace gibbslearn
