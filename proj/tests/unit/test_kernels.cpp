#include <catch2/catch_amalgamated.hpp>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/kernels.hpp"
#include "gibbslearn/random.hpp"
#include "gibbslearn/spectral.hpp"

using namespace gibbslearn;
using namespace gibbslearn::kernels;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("reference values", "[kernels]") {
  // (2 pi)^{-1/4}
  CHECK(f_hat(0.0, 1.0) == Catch::Approx(0.6316187777460647).epsilon(1e-15));
  CHECK(g_hat(0.0) == -0.5);
  // -1 / (2 sinh 1) and -pi^{3/2} / (4 sqrt 2), frozen with mpmath.
  CHECK(g_hat(1.0) == Catch::Approx(-0.4254590641196608).epsilon(1e-15));
  CHECK(g_kernel(0.0) == Catch::Approx(-0.9843506216076512).epsilon(1e-15));
  CHECK(oft_normalization(1.0) == Catch::Approx(std::sqrt(2.0 * std::sqrt(2.0 * kPi))).epsilon(1e-15));
}

TEST_CASE("g_hat is smooth through the removable singularity", "[kernels]") {
  for (double nu : {1e-9, 1e-6, 5e-5, 9.9e-5, 1.01e-4, 1e-3})
    CHECK(g_hat(nu) == Catch::Approx(-nu / (2.0 * std::sinh(nu))).epsilon(1e-13));
  CHECK(g_hat(-0.3) == g_hat(0.3));
}

TEST_CASE("Gaussian pair is normalized and Fourier-consistent", "[kernels]") {
  for (double sigma : {0.3, 1.0, 2.5}) {
    const double n1 = quadrature::integrate([&](double t) { return std::pow(f_weight(t, sigma), 2); }, -kInf, kInf);
    const double n2 = quadrature::integrate([&](double w) { return std::pow(f_hat(w, sigma), 2); }, -kInf, kInf);
    CHECK(std::abs(n1 - 1.0) < 1e-10);
    CHECK(std::abs(n2 - 1.0) < 1e-10);
    for (double w : {-2.0, 0.0, 0.4, 3.0}) CHECK(std::abs(f_hat(w, sigma) - quadrature::f_hat(w, sigma)) < 1e-8);
    CHECK(std::abs(quadrature::integrate([&](double w) { return f_hat(w, sigma); }, -kInf, kInf) -
                   oft_normalization(sigma)) < 1e-10);
  }
}

TEST_CASE("g kernel Fourier pair and rescaling", "[kernels]") {
  for (double nu : {0.0, 0.5, 1.0, 3.0, -2.0}) CHECK(std::abs(g_hat(nu) - quadrature::g_hat(nu)) < 1e-8);
  for (double beta : {0.5, 2.0})
    for (double t : {0.0, 0.3, 1.7}) CHECK(g_beta(t, beta) == Catch::Approx(2.0 / beta * g_kernel(2.0 * t / beta)));
  CHECK(g_beta_hat(1.2, 2.0) == g_hat(1.2));
}

TEST_CASE("g_beta envelope with the sharp constant", "[kernels]") {
  for (double beta : {0.25, 1.0, 3.0})
    for (double t = 0.0; t < 8.0 * beta; t += beta / 50.0)
      CHECK(std::abs(g_beta(t, beta)) <= kGBetaEnvelopeConstant / beta * std::exp(-2.0 * kPi * t / beta));
  // The printed constant 4 fails at large |t|; the sharp one is sqrt(2) pi^{3/2}.
  CHECK(std::abs(g_beta(3.0, 1.0)) > 4.0 * std::exp(-2.0 * kPi * 3.0));
  CHECK(kGBetaEnvelopeConstant >= std::sqrt(2.0) * std::pow(kPi, 1.5));
  CHECK(std::abs(g_beta_tail_mass(0.7, 1.3) -
                 2.0 * quadrature::integrate([](double t) { return std::abs(g_beta(t, 1.3)); }, 0.7, kInf)) < 1e-10);
}

TEST_CASE("h_plus and h_minus closed forms", "[kernels]") {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    KernelParams p;
    p.beta = rng.uniform(0.3, 3.0);
    p.sigma = 1.0 / p.beta;
    p.omega_cut = rng.uniform(0.5, 6.0);
    const double t = rng.uniform(-4.0, 4.0);
    const auto hp = h_plus(t, p);
    CHECK(std::abs(hp - quadrature::h_plus(t, p)) < 1e-9 * std::max(1.0, std::abs(hp)));
    CHECK(std::abs(h_minus(t, p) - std::conj(hp)) < 1e-14 * std::max(1.0, std::abs(hp)));
    for (double s = -5.0; s <= 5.0; s += 0.1) {
      CHECK(std::abs(h_plus(s, p)) <= h_envelope(s, p) * (1.0 + 1e-12));
      CHECK(std::abs(h_minus(s, p)) <= h_envelope(s, p) * (1.0 + 1e-12));
    }
  }
  CHECK(kHEnvelopeConstant <= 4.0);
}

TEST_CASE("Bohr weights", "[kernels]") {
  KernelParams p{1.3, 1.0 / 1.3, 2.5};
  for (double nu : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
    CHECK(std::abs(bohr_weight_plus(nu, p) - quadrature::bohr_weight_plus(nu, p)) < 1e-9);
    CHECK(std::abs(bohr_weight_minus(nu, p) - quadrature::bohr_weight_minus(nu, p)) < 1e-9);
    CHECK(std::abs(window_mass(nu, p) + tail_mass(nu, p) - oft_normalization(p.sigma)) < 1e-12);
  }
  // Small beta: the two weights coincide.
  KernelParams hot{1e-9, 1.0, 2.0};
  CHECK(std::abs(bohr_weight_plus(0.7, hot) - bohr_weight_minus(0.7, hot)) < 1e-8);
}

TEST_CASE("Bohr weights reproduce the imaginary-time conjugation", "[kernels]") {
  // Untruncated window: sum_nu A_nu w_+(nu) = c e^{-beta H/2} A e^{beta H/2}.
  const auto h = make_model(GeometrySpec::chain(2), Model::random, 8, true);
  const auto s = SpectralData::from_dense(to_dense(h));
  Rng rng(2);
  const Matrix a = random_operator(rng, 4);
  const BohrDecomposition b(a, s);
  KernelParams p{1.1, 1.0 / 1.1, 50.0};
  const Matrix weighted = b.weighted_sum([&](double nu) { return cplx(bohr_weight_plus(nu, p)); });
  const Matrix direct = oft_normalization(p.sigma) * imaginary_conjugate(a, *s, -p.beta / 2.0);
  CHECK((weighted - direct).cwiseAbs().maxCoeff() < 1e-10);

  // Truncated window against omega-quadrature of the conjugated transform.
  p.omega_cut = 2.0;
  const int m = 4000;
  const double step = 2.0 * p.omega_cut / m;
  Matrix integral = Matrix::Zero(4, 4);
  for (int j = 0; j <= m; ++j) {
    const double w = -p.omega_cut + j * step;
    const double simpson = (j == 0 || j == m) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    integral += simpson * imaginary_conjugate(operator_fourier_transform(b, w, p.sigma), *s, -p.beta / 2.0);
  }
  integral *= step / 3.0;
  const Matrix closed = b.weighted_sum([&](double nu) { return cplx(bohr_weight_plus(nu, p)); });
  CHECK((integral - closed).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("truncation planning", "[kernels]") {
  KernelParams p{1.0, 1.0, 4.0};
  const Bandwidth bw{3.0, 3.0, 4.0};
  const QuadratureGrid g1 = choose_truncation(p, 1.0, 1e-6, bw);
  const QuadratureGrid g2 = choose_truncation(p, 1.0, 0.5e-6, bw);
  CHECK(quadrature_error_estimate(p, g1, 1.0, bw) <= 1e-6);
  CHECK(quadrature_error_estimate(p, g2, 1.0, bw) <= 0.5e-6);
  // Halving the tolerance moves T by about (beta / 2 pi) ln 2.
  CHECK(g2.t_max - g1.t_max == Catch::Approx(p.beta / (2.0 * kPi) * std::log(2.0)).margin(0.05));
  CHECK(g2.t_max >= g1.t_max);
  CHECK_THROWS_AS(choose_truncation(p, 1.0, 1e-320, bw), RangeError);
}
