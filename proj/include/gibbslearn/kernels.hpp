#pragma once

#include <complex>
#include <functional>
#include <string>

namespace gibbslearn {

struct KernelParams {
  double beta = 1.0;
  double sigma = 1.0;
  double omega_cut = 1.0;  // Omega'

  void validate() const;
  // Learner defaults: sigma = 1/beta, Omega' = 2 beta + 4 max(1, ln(1/eps)/(4d)).
  static KernelParams learner_default(double beta, double epsilon, int degree);
};

enum class QuadratureRule { trapezoid, gauss };

struct QuadratureGrid {
  double t_max = 0.0;       // T
  double tprime_max = 0.0;  // T'
  double step = 0.0;        // Delta
  QuadratureRule rule = QuadratureRule::trapezoid;

  void validate() const;
  int t_points() const;
  int tprime_points() const;
};

// Spectral extent needed to place the quadrature step: the largest Bohr
// frequency of O's and A's Hamiltonians and the Hilbert-space dimension.
struct Bandwidth {
  double g = 0.0;
  double k = 0.0;
  double dim = 1.0;
};

namespace kernels {

constexpr double kPi = 3.14159265358979323846;

double f_weight(double t, double sigma);
double f_hat(double omega, double sigma);
// sqrt(2 sigma sqrt(2 pi)) = integral of f_hat over the real line.
double oft_normalization(double sigma);

double g_kernel(double t);
double g_hat(double nu);
double g_beta(double t, double beta);
// Fourier transform of g_beta, equal to g_hat(beta nu / 2).
double g_beta_hat(double nu, double beta);

std::complex<double> h_plus(double t, const KernelParams& p);
std::complex<double> h_minus(double t, const KernelParams& p);

// Integral of f_hat(w - nu) over |w| <= Omega'.
double window_mass(double nu, const KernelParams& p);
// Integral of f_hat(w - nu) over |w| >= Omega'.
double tail_mass(double nu, const KernelParams& p);
double bohr_weight_plus(double nu, const KernelParams& p);
double bohr_weight_minus(double nu, const KernelParams& p);

// Sharp constant C with |g_beta(t)| <= (C / beta) e^{-2 pi |t| / beta}.
constexpr double kGBetaEnvelopeConstant = 7.875;
// Integral of |g_beta| over |t| > T (exact).
double g_beta_tail_mass(double t_max, double beta);
// Envelope |h_pm(t)| <= kHEnvelopeConstant e^{-sigma^2 t^2} (sqrt(sigma)/beta) e^{beta Omega'/2 + sigma^2 beta^2/4}.
extern const double kHEnvelopeConstant;
double h_envelope(double t, const KernelParams& p);

// Error bound of the (T, T', Delta) trapezoid double sum relative to the
// full double integral, for |Tr| <= op_norm_product.
double quadrature_error_estimate(const KernelParams& p, const QuadratureGrid& grid, double op_norm_product,
                                 const Bandwidth& bw);
QuadratureGrid choose_truncation(const KernelParams& p, double op_norm_product, double tol,
                                 const Bandwidth& bw = {});

}  // namespace kernels

// Adaptive-quadrature oracles for the closed forms above.
namespace quadrature {

// Adaptive Gauss-Kronrod on [a, b]; infinite limits allowed.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13);

double f_hat(double omega, double sigma);
double g_hat(double nu);
std::complex<double> h_plus(double t, const KernelParams& p);
double bohr_weight_plus(double nu, const KernelParams& p);
double bohr_weight_minus(double nu, const KernelParams& p);
double tail_mass(double nu, const KernelParams& p);

}  // namespace quadrature

}  // namespace gibbslearn
