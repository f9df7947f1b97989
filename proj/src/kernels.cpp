#include "gibbslearn/kernels.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <cfloat>
#include <cmath>
#include <limits>

#include "gibbslearn/errors.hpp"

namespace gibbslearn {

using std::complex;
using kernels::kPi;

void KernelParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw RangeError("kernel params: beta must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw RangeError("kernel params: sigma must be positive");
  if (!(omega_cut > 0.0) || !std::isfinite(omega_cut)) throw RangeError("kernel params: omega_cut must be positive");
}

KernelParams KernelParams::learner_default(double beta, double epsilon, int degree) {
  KernelParams p;
  p.beta = beta;
  p.sigma = 1.0 / beta;
  p.omega_cut = 2.0 * beta + 4.0 * std::max(1.0, std::log(1.0 / epsilon) / (4.0 * degree));
  p.validate();
  return p;
}

void QuadratureGrid::validate() const {
  if (!(t_max > 0.0 && tprime_max > 0.0 && step > 0.0)) throw RangeError("quadrature grid must be positive");
}

int QuadratureGrid::t_points() const { return 2 * static_cast<int>(std::lround(t_max / step)) + 1; }
int QuadratureGrid::tprime_points() const { return 2 * static_cast<int>(std::lround(tprime_max / step)) + 1; }

namespace kernels {

double f_weight(double t, double sigma) {
  return std::exp(-sigma * sigma * t * t) * std::sqrt(sigma * std::sqrt(2.0 / kPi));
}

double f_hat(double omega, double sigma) {
  return std::exp(-omega * omega / (4.0 * sigma * sigma)) / std::sqrt(sigma * std::sqrt(2.0 * kPi));
}

double oft_normalization(double sigma) { return std::sqrt(2.0 * sigma * std::sqrt(2.0 * kPi)); }

double g_kernel(double t) {
  // 1/(1 + cosh x) = 2 e^{-|x|} / (1 + e^{-|x|})^2 without overflow.
  const double e = std::exp(-kPi * std::abs(t));
  return -std::pow(kPi, 1.5) / (2.0 * std::sqrt(2.0)) * 2.0 * e / ((1.0 + e) * (1.0 + e));
}

double g_hat(double nu) {
  const double a = std::abs(nu);
  if (a < 1e-4) {
    const double x2 = nu * nu;
    return -0.5 * (1.0 - x2 / 6.0 + 7.0 * x2 * x2 / 360.0);
  }
  const double e = std::exp(-a);
  return -a * e / -std::expm1(-2.0 * a);
}

double g_beta(double t, double beta) { return 2.0 / beta * g_kernel(2.0 * t / beta); }

double g_beta_hat(double nu, double beta) { return g_hat(beta * nu / 2.0); }

complex<double> h_plus(double t, const KernelParams& p) {
  const complex<double> z(p.beta / 2.0, t);
  const complex<double> integral = 2.0 * std::sinh(z * p.omega_cut) / z;
  const double s2b = p.sigma * p.sigma * p.beta;
  return f_weight(t, p.sigma) * std::exp(s2b * p.beta / 4.0) * std::polar(1.0, s2b * t) * integral;
}

complex<double> h_minus(double t, const KernelParams& p) { return std::conj(h_plus(t, p)); }

namespace {

// Integral of exp(-x^2 / (4 s^2)) over [a, b], a < b, without cancellation.
double gaussian_window(double a, double b, double s) {
  const double pref = s * std::sqrt(kPi);
  const double u = a / (2.0 * s);
  const double v = b / (2.0 * s);
  if (u >= 0.0) return pref * (std::erfc(u) - std::erfc(v));
  if (v <= 0.0) return pref * (std::erfc(-v) - std::erfc(-u));
  return pref * (std::erf(v) - std::erf(u));
}

}  // namespace

double window_mass(double nu, const KernelParams& p) {
  const double norm = 1.0 / std::sqrt(p.sigma * std::sqrt(2.0 * kPi));
  return norm * gaussian_window(-p.omega_cut - nu, p.omega_cut - nu, p.sigma);
}

double tail_mass(double nu, const KernelParams& p) {
  const double norm = 1.0 / std::sqrt(p.sigma * std::sqrt(2.0 * kPi));
  const double pref = p.sigma * std::sqrt(kPi);
  const double upper = std::erfc((p.omega_cut - nu) / (2.0 * p.sigma));
  const double lower = std::erfc((p.omega_cut + nu) / (2.0 * p.sigma));
  return norm * pref * (upper + lower);
}

double bohr_weight_plus(double nu, const KernelParams& p) {
  return std::exp(-p.beta * nu / 2.0) * window_mass(nu, p);
}

double bohr_weight_minus(double nu, const KernelParams& p) {
  return std::exp(p.beta * nu / 2.0) * window_mass(nu, p);
}

double g_beta_tail_mass(double t_max, double beta) {
  return std::sqrt(kPi / 2.0) * (1.0 - std::tanh(kPi * t_max / beta));
}

const double kHEnvelopeConstant = 2.0 * std::pow(2.0 / kPi, 0.25);

double h_envelope(double t, const KernelParams& p) {
  return kHEnvelopeConstant * std::exp(-p.sigma * p.sigma * t * t) * std::sqrt(p.sigma) / p.beta *
         std::exp(p.beta * p.omega_cut / 2.0 + p.sigma * p.sigma * p.beta * p.beta / 4.0);
}

namespace {

// Upper bound on the integral of |h_pm| over the real line.
double h_mass(const KernelParams& p) {
  const double amp = std::exp(p.sigma * p.sigma * p.beta * p.beta / 4.0) * 4.0 / p.beta *
                     std::sinh(p.beta * p.omega_cut / 2.0);
  return amp * std::sqrt(p.sigma * std::sqrt(2.0 / kPi)) * std::sqrt(kPi) / p.sigma;
}

// Prefactor K with error <= K [ (1 - tanh(pi T / beta)) + erfc(sigma T') ].
double truncation_prefactor(const KernelParams& p, double op_norm_product) {
  // (1/2pi) * (two h branches) * h_mass * integral of |g_beta| = sqrt(pi/2).
  return op_norm_product / (2.0 * kPi) * 2.0 * h_mass(p) * std::sqrt(kPi / 2.0);
}

double alias_bound(const KernelParams& p, double step, const Bandwidth& bw) {
  const double m0 = 2.0 * kPi / step;
  double wmax = 0.0;
  double alias_h = 0.0;
  const int samples = 64;
  for (int j = 0; j <= samples; ++j) {
    const double nu = -bw.k + 2.0 * bw.k * j / samples;
    wmax = std::max({wmax, bohr_weight_plus(nu, p), bohr_weight_minus(nu, p)});
    for (int m = 1; m <= 3; ++m)
      for (int sgn : {-1, 1}) {
        const double lam = nu + sgn * m * m0;
        alias_h = std::max(alias_h, std::max(bohr_weight_plus(lam, p), bohr_weight_minus(lam, p)));
      }
  }
  double alias_g = 0.0;
  const double lam_t = bw.g + bw.k;
  for (int m = 1; m <= 3; ++m) {
    const double x = m * m0 - lam_t;
    if (x <= 0.0) return std::numeric_limits<double>::infinity();
    alias_g += 2.0 * std::abs(g_hat(p.beta * x / 2.0));
  }
  // Each trace has at most dim^2 Bohr pairs; |g_hat| <= 1/2.
  return bw.dim * bw.dim * (alias_g * wmax + 6.0 * 0.5 * alias_h);
}

}  // namespace

double quadrature_error_estimate(const KernelParams& p, const QuadratureGrid& grid, double op_norm_product,
                                 const Bandwidth& bw) {
  p.validate();
  grid.validate();
  const double k = truncation_prefactor(p, op_norm_product);
  const double trunc = k * ((1.0 - std::tanh(kPi * grid.t_max / p.beta)) + std::erfc(p.sigma * grid.tprime_max));
  return trunc + op_norm_product * alias_bound(p, grid.step, bw);
}

QuadratureGrid choose_truncation(const KernelParams& p, double op_norm_product, double tol, const Bandwidth& bw) {
  p.validate();
  if (!(tol > 0.0)) throw RangeError("choose_truncation needs tol > 0");
  const double k = truncation_prefactor(p, std::max(op_norm_product, 1e-300));
  if (!std::isfinite(k)) throw RangeError("truncation envelope overflows for these kernel parameters");
  // Half the budget to truncation (split evenly over T and T'), half to aliasing.
  const double z = tol / (4.0 * k);
  if (z < 1e4 * DBL_MIN) throw RangeError("tolerance unreachable within floating-point range");
  QuadratureGrid grid;
  grid.t_max = z >= 1.0 ? p.beta / kPi : p.beta / kPi * 0.5 * std::log((2.0 - z) / z);
  grid.tprime_max = z >= 1.0 ? 1.0 / p.sigma : boost::math::erfc_inv(z) / p.sigma;
  double m0 = std::max(bw.g + bw.k, 2.0 * kPi / std::min(grid.t_max, grid.tprime_max)) + 1.0;
  for (int iter = 0;; ++iter) {
    if (iter > 2000) throw RangeError("no quadrature step meets the aliasing tolerance");
    if (op_norm_product * alias_bound(p, 2.0 * kPi / m0, bw) <= tol / 2.0) break;
    m0 *= 1.05;
  }
  grid.step = 2.0 * kPi / m0;
  grid.t_max = grid.step * std::ceil(grid.t_max / grid.step);
  grid.tprime_max = grid.step * std::ceil(grid.tprime_max / grid.step);
  return grid;
}

}  // namespace kernels

namespace quadrature {

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol, &err);
}

double f_hat(double omega, double sigma) {
  const double span = 40.0 / sigma;
  auto integrand = [&](double t) { return kernels::f_weight(t, sigma) * std::cos(omega * t); };
  return integrate(integrand, -span, span) / std::sqrt(2.0 * kPi);
}

double g_hat(double nu) {
  auto integrand = [&](double t) { return kernels::g_kernel(t) * std::cos(nu * t); };
  return integrate(integrand, -60.0, 60.0) / std::sqrt(2.0 * kPi);
}

complex<double> h_plus(double t, const KernelParams& p) {
  const double s2b = p.sigma * p.sigma * p.beta;
  auto re = [&](double w) { return std::cos((w - s2b) * t) * std::exp(-p.beta * w / 2.0); };
  auto im = [&](double w) { return -std::sin((w - s2b) * t) * std::exp(-p.beta * w / 2.0); };
  const double pref = kernels::f_weight(t, p.sigma) * std::exp(s2b * p.beta / 4.0);
  return pref * complex<double>(integrate(re, -p.omega_cut, p.omega_cut), integrate(im, -p.omega_cut, p.omega_cut));
}

double bohr_weight_plus(double nu, const KernelParams& p) {
  const double s2b = p.sigma * p.sigma * p.beta;
  auto integrand = [&](double w) { return kernels::f_hat(w - s2b - nu, p.sigma) * std::exp(-p.beta * w / 2.0); };
  return std::exp(s2b * p.beta / 4.0) * integrate(integrand, -p.omega_cut, p.omega_cut);
}

double bohr_weight_minus(double nu, const KernelParams& p) {
  const double s2b = p.sigma * p.sigma * p.beta;
  auto integrand = [&](double w) { return kernels::f_hat(w + s2b - nu, p.sigma) * std::exp(p.beta * w / 2.0); };
  return std::exp(s2b * p.beta / 4.0) * integrate(integrand, -p.omega_cut, p.omega_cut);
}

double tail_mass(double nu, const KernelParams& p) {
  const double inf = std::numeric_limits<double>::infinity();
  auto integrand = [&](double w) { return kernels::f_hat(w - nu, p.sigma); };
  return integrate(integrand, p.omega_cut, inf) + integrate(integrand, -inf, -p.omega_cut);
}

}  // namespace quadrature

}  // namespace gibbslearn
