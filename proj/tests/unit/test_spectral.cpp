#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/kernels.hpp"
#include "gibbslearn/random.hpp"
#include "gibbslearn/spectral.hpp"

using namespace gibbslearn;

namespace {

const cplx I(0.0, 1.0);

Matrix pauli(const char* s) { return to_dense(PauliString::parse(s), 1); }

// Scaling-and-squaring Taylor exponential, independent of any eigensolver.
Matrix taylor_exp(const Matrix& a) {
  int squarings = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.25) {
    norm /= 2.0;
    ++squarings;
  }
  const Matrix x = a / std::pow(2.0, squarings);
  Matrix term = Matrix::Identity(a.rows(), a.cols()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * x / double(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

HamiltonianSpec random_h(int n, std::uint64_t seed) {
  return make_model(GeometrySpec::chain(n), Model::random, seed, true);
}

}  // namespace

TEST_CASE("gibbs state at zero temperature parameter is maximally mixed", "[spectral]") {
  const GibbsState g(random_h(3, 1), 0.0);
  CHECK((g.rho() - Matrix::Identity(8, 8) / 8.0).norm() < 1e-14);
}

TEST_CASE("single-qubit gibbs state closed form", "[spectral]") {
  const GibbsState g(pauli("Z1"), 1.0);
  const double z = 2.0 * std::cosh(1.0);
  CHECK(std::abs(g.rho()(0, 0) - std::exp(-1.0) / z) < 1e-15);
  CHECK(std::abs(g.rho()(1, 1) - std::exp(1.0) / z) < 1e-15);
  CHECK(std::abs(g.rho()(0, 1)) < 1e-15);
}

TEST_CASE("gibbs state matches a Taylor-series exponential", "[spectral]") {
  const HamiltonianSpec h = random_h(3, 7);
  const GibbsState g(h, 2.0);
  Matrix e = taylor_exp(-2.0 * to_dense(h));
  e /= e.trace();
  CHECK((g.rho() - e).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(g.rho().trace() - 1.0) < 1e-12);
  CHECK((g.sqrt_rho() * g.sqrt_rho() - g.rho()).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(g.populations().minCoeff() > 0.0);
}

TEST_CASE("large beta stays finite", "[spectral]") {
  const GibbsState g(random_h(3, 2), 200.0);
  CHECK(std::isfinite(g.rho().norm()));
  CHECK(std::abs(g.rho().trace() - 1.0) < 1e-12);
}

TEST_CASE("non-Hermitian input is rejected", "[spectral]") {
  Matrix m = pauli("X1");
  m(0, 1) = 2.0;
  CHECK_THROWS_AS(GibbsState(m, 1.0), ConsistencyError);
}

TEST_CASE("bohr decomposition of X under Z", "[spectral]") {
  const auto s = SpectralData::from_dense(pauli("Z1"));
  const BohrDecomposition b(pauli("X1"), s);
  // Every difference of the two levels is listed; the diagonal part is zero.
  REQUIRE(b.frequencies() == std::vector<double>{-2.0, 0.0, 2.0});
  CHECK(b.component_at(0.0).norm() == 0.0);
  Matrix up = Matrix::Zero(2, 2), down = Matrix::Zero(2, 2);
  up(0, 1) = 1.0;
  down(1, 0) = 1.0;
  // E(|0>) = 1, E(|1>) = -1: |0><1| raises the energy by 2.
  CHECK((b.component_at(2.0) - up).norm() < 1e-15);
  CHECK((b.component_at(-2.0) - down).norm() < 1e-15);
}

TEST_CASE("degenerate spectrum has only frequency zero", "[spectral]") {
  Rng rng(4);
  const Matrix a = random_operator(rng, 4);
  const auto s = SpectralData::from_dense(0.3 * Matrix::Identity(4, 4));
  const BohrDecomposition b(a, s);
  REQUIRE(b.size() == 1);
  CHECK(b.frequencies()[0] == 0.0);
  CHECK((b.component(0) - a).norm() < 1e-14);
}

TEST_CASE("Heisenberg dynamics from Bohr phases and direct exponentials", "[spectral]") {
  Rng rng(9);
  const HamiltonianSpec h = random_h(3, 3);
  const Matrix hd = to_dense(h);
  const Matrix a = random_operator(rng, 8);
  const auto s = SpectralData::from_dense(hd);
  const BohrDecomposition b(a, s);
  for (int k = 0; k < 10; ++k) {
    const double t = rng.uniform(-4.0, 4.0);
    const Matrix u = (I * t * hd).exp();
    const Matrix direct = u * a * u.adjoint();
    CHECK((heisenberg_evolve(a, *s, t) - direct).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((b.weighted_sum([t](double nu) { return std::exp(I * nu * t); }) - direct).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(std::abs(heisenberg_evolve(a, *s, t).norm() - a.norm()) < 1e-12);
  }
  CHECK((heisenberg_evolve(a, *s, 0.0) - a).norm() < 1e-13);
}

TEST_CASE("single-qubit rotation", "[spectral]") {
  const auto s = SpectralData::from_dense(pauli("Z1"));
  for (double t : {0.1, 0.7, 2.0}) {
    const Matrix expected = std::cos(2 * t) * pauli("X1") - std::sin(2 * t) * pauli("Y1");
    CHECK((heisenberg_evolve(pauli("X1"), *s, t) - expected).norm() < 1e-14);
  }
}

TEST_CASE("operator Fourier transform of X under Z", "[spectral]") {
  const auto s = SpectralData::from_dense(pauli("Z1"));
  const BohrDecomposition b(pauli("X1"), s);
  for (double w : {-2.5, -1.0, 0.0, 2.0, 3.3}) {
    const Matrix oft = operator_fourier_transform(b, w, 1.0);
    CHECK(std::abs(oft(0, 1) - kernels::f_hat(w - 2.0, 1.0)) < 1e-15);
    CHECK(std::abs(oft(1, 0) - kernels::f_hat(w + 2.0, 1.0)) < 1e-15);
  }
  CHECK(op_norm(operator_fourier_transform(b, 2.0 + 40.0, 1.0)) < 1e-12);
}

TEST_CASE("imaginary conjugation", "[spectral]") {
  const auto s = SpectralData::from_dense(pauli("Z1"));
  const double beta = 0.8;
  const Matrix c = imaginary_conjugate(pauli("X1"), *s, beta);
  CHECK(std::abs(c(0, 1) - std::exp(2 * beta)) < 1e-13);
  CHECK(std::abs(c(1, 0) - std::exp(-2 * beta)) < 1e-13);
  CHECK((imaginary_conjugate(pauli("X1"), *s, 0.0) - pauli("X1")).norm() < 1e-15);
  CHECK_THROWS_AS(imaginary_conjugate(pauli("X1"), *s, 400.0), RangeError);
}

TEST_CASE("KMS inner product", "[spectral]") {
  const GibbsState mixed(pauli("Z1"), 0.0);
  CHECK(std::abs(kms_inner_product(pauli("X1"), pauli("X1"), mixed) - 1.0) < 1e-15);
  Rng rng(12);
  for (int k = 0; k < 10; ++k) {
    const GibbsState g(random_h(3, 100 + k), rng.uniform(0.1, 3.0));
    const Matrix id = Matrix::Identity(8, 8);
    CHECK(std::abs(kms_inner_product(id, id, g) - 1.0) < 1e-12);
    const Matrix x = random_operator(rng, 8), y = random_operator(rng, 8);
    const cplx xx = kms_inner_product(x, x, g);
    CHECK(xx.real() >= 0.0);
    CHECK(std::abs(xx.imag()) < 1e-14);
    CHECK(std::abs(kms_inner_product(x, y, g)) <= op_norm(x) * op_norm(y) + 1e-12);
    const cplx alpha(0.3, -1.2);
    CHECK(std::abs(kms_inner_product(x, alpha * y, g) - alpha * kms_inner_product(x, y, g)) < 1e-12);
    CHECK(std::abs(kms_inner_product(alpha * x, y, g) - std::conj(alpha) * kms_inner_product(x, y, g)) < 1e-12);
  }
  CHECK(std::abs(tau_norm(pauli("X1")) - 1.0) < 1e-15);
}
