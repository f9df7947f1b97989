#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include "gibbslearn/identifiability.hpp"
#include "gibbslearn/random.hpp"

using namespace gibbslearn;

namespace {

struct Instance {
  HamiltonianSpec h, h2, g;
  Matrix o, a;
  double beta;
};

Instance make_instance(int n, std::uint64_t seed, double beta) {
  const auto geo = GeometrySpec::chain(n);
  Instance in{make_model(geo, Model::random, seed, true), {}, make_model(geo, Model::random, seed + 1000, true),
              {}, {}, beta};
  Rng rng(seed);
  std::vector<double> c(in.h.size());
  for (double& x : c) x = rng.uniform(-1, 1);
  in.h2 = in.h.with_coefficients(c);
  in.o = random_operator(rng, std::size_t{1} << n);
  in.a = random_operator(rng, std::size_t{1} << n);
  return in;
}

KernelParams params(double beta) { return KernelParams::learner_default(beta, 0.1, 3); }

Matrix one(const char* s) { return to_dense(PauliString::parse(s), 1); }

}  // namespace

TEST_CASE("Q vanishes at the true Hamiltonian", "[identifiability]") {
  for (int k = 0; k < 6; ++k) {
    const Instance in = make_instance(3, 10 + k, 0.5 + 0.5 * k);
    const GibbsState truth(in.h, in.beta);
    const QValue q = q_frequency_exact(QInputs::make(in.o, in.g, in.a, in.h, truth, params(in.beta)));
    CHECK(std::abs(q.value) < 1e-9);
    CHECK(q.est_error == 0.0);
  }
}

TEST_CASE("Q is conjugate-linear in O", "[identifiability]") {
  const Instance in = make_instance(2, 3, 1.0);
  const GibbsState truth(in.h, in.beta);
  Rng rng(8);
  const Matrix o2 = random_operator(rng, 4);
  const cplx alpha(0.4, 1.3);
  auto q = [&](const Matrix& o) {
    return q_frequency_exact(QInputs::make(o, in.g, in.a, in.h2, truth, params(1.0))).value;
  };
  CHECK(std::abs(q(alpha * in.o + o2) - (std::conj(alpha) * q(in.o) + q(o2))) < 1e-12);
}

TEST_CASE("single-qubit frequency and time paths agree", "[identifiability]") {
  const Matrix z = one("Z1"), x = one("X1");
  const auto geo = GeometrySpec::chain(1);
  const auto h = HamiltonianSpec::from_paulis(geo, {PauliString::parse("Z1")}, {1.0});
  const auto k = HamiltonianSpec::from_paulis(geo, {PauliString::parse("Z1")}, {0.5});
  const GibbsState truth(h, 1.0);
  const Matrix o = commutator(x, z);
  const QInputs in = QInputs::make(o, h, x, k, truth, KernelParams{1.0, 1.0, 3.0});
  const QuadratureGrid grid = kernels::choose_truncation(in.params, in.op_norm_product(), 1e-8, in.bandwidth());
  const QValue f = q_frequency_exact(in);
  const QValue t = q_time_quadrature(in, grid);
  CHECK(std::abs(f.value) > 1e-3);
  CHECK(std::abs(f.value - t.value) < 1e-6);
  CHECK(t.path == QPath::time_quadrature);
}

TEST_CASE("time path error estimate", "[identifiability]") {
  for (int k = 0; k < 4; ++k) {
    const Instance in = make_instance(2, 40 + k, 1.0 + 0.5 * k);
    const GibbsState truth(in.h, in.beta);
    const QInputs qi = QInputs::make(in.o, in.g, in.a, in.h2, truth, params(in.beta));
    const QuadratureGrid grid = kernels::choose_truncation(qi.params, qi.op_norm_product(), 1e-7, qi.bandwidth());
    const QValue t = q_time_quadrature(qi, grid);
    const QValue f = q_frequency_exact(qi);
    CHECK(std::abs(t.value - f.value) <= t.est_error);
    CHECK(std::abs(t.value - f.value) <= 10 * 1e-7);
    QuadratureGrid wide = grid;
    wide.t_max *= 2;
    wide.tprime_max *= 2;
    CHECK(std::abs(q_time_quadrature(qi, wide).value - t.value) <= t.est_error);
    const QInputs at_truth = QInputs::make(in.o, in.g, in.a, in.h, truth, params(in.beta));
    const QValue zero = q_time_quadrature(at_truth, grid);
    CHECK(std::abs(zero.value) <= zero.est_error);
  }
}

TEST_CASE("operator forms reproduce the traces", "[identifiability]") {
  const Instance in = make_instance(2, 5, 1.5);
  const GibbsState truth(in.h, in.beta);
  const QInputs qi = QInputs::make(in.o, in.g, in.a, in.h2, truth, params(in.beta));
  const cplx direct = (q_operator_frequency(qi) * truth.rho()).trace();
  CHECK(std::abs(direct - q_frequency_exact(qi).value) < 1e-12);
  const QuadratureGrid grid = kernels::choose_truncation(qi.params, qi.op_norm_product(), 1e-8, qi.bandwidth());
  const cplx timed = (q_operator_time(qi, grid) * truth.rho()).trace();
  CHECK(std::abs(timed - q_time_quadrature(qi, grid).value) < 1e-12);
}

TEST_CASE("identifiability equation left side", "[identifiability]") {
  const Instance in = make_instance(3, 6, 1.0);
  const GibbsState truth(in.h, in.beta);
  CHECK(std::abs(identifiability_lhs(in.o, in.a, in.h, in.h, truth)) < 1e-14);
  const Matrix o = commutator(in.a, to_dense(in.h) - to_dense(in.h2));
  const cplx v = identifiability_lhs(o, in.a, in.h, in.h2, truth);
  CHECK(v.real() > 0.0);
  CHECK(std::abs(v.imag()) < 1e-12);
  CHECK(std::abs(v - in.beta / 2.0 * kms_norm(o, truth) * kms_norm(o, truth)) < 1e-12);
}

TEST_CASE("closure of the identifiability equation", "[identifiability]") {
  for (int k = 0; k < 8; ++k) {
    const Instance in = make_instance(2 + k % 2, 60 + k, 0.5 * (1 + k % 4));
    const GibbsState truth(in.h, in.beta);
    const KernelParams p = params(in.beta);
    const QInputs qi = QInputs::make(in.o, in.h, in.a, in.h2, truth, p);
    const cplx lhs = kernels::oft_normalization(p.sigma) * identifiability_lhs(in.o, in.a, in.h, in.h2, truth);
    const cplx res = high_frequency_residual(qi, to_dense(in.h));
    const cplx rhs = q_frequency_exact(qi).value + res;
    CHECK(std::abs(lhs - rhs) <= 1e-7 * std::abs(lhs));
    CHECK(std::abs(res - high_frequency_residual(qi, to_dense(in.h), true)) < 1e-9);
  }
}

TEST_CASE("residual vanishes beyond the spectrum", "[identifiability]") {
  const Instance in = make_instance(2, 4, 1.0);
  const GibbsState truth(in.h, in.beta);
  KernelParams p{1.0, 1.0, 0.0};
  const double spread = std::max(SpectralData::from_dense(to_dense(in.h2))->spread(), 1.0);
  p.omega_cut = spread + 40.0 * p.sigma;
  const QInputs qi = QInputs::make(in.o, in.h, in.a, in.h2, truth, p);
  CHECK(std::abs(high_frequency_residual(qi, to_dense(in.h))) < 1e-12);
}

TEST_CASE("double Bohr commutator difference", "[identifiability]") {
  for (int k = 0; k < 5; ++k) {
    const Instance in = make_instance(3, 80 + k, 1.0);
    const auto s1 = SpectralData::from_dense(to_dense(in.h)), s2 = SpectralData::from_dense(to_dense(in.h2));
    const Matrix dense = commutator(in.a, to_dense(in.h2)) - commutator(in.a, to_dense(in.h));
    CHECK((commutator_difference_bohr(in.a, s1, s2) - dense).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(commutator_difference_bohr(in.a, s1, s1).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("double Bohr sinh form", "[identifiability]") {
  for (int k = 0; k < 5; ++k) {
    const Instance in = make_instance(2, 90 + k, 1.0);
    const Matrix h1 = 0.4 * to_dense(in.h), h2 = 0.4 * to_dense(in.h2);
    const auto s1 = SpectralData::from_dense(h1), s2 = SpectralData::from_dense(h2);
    const Matrix e1 = h1.exp(), e2 = h2.exp(), m1 = (-h1).exp(), m2 = (-h2).exp();
    const Matrix direct = e2 * m1 * in.a * e1 * m2 - m2 * e1 * in.a * m1 * e2;
    CHECK((double_bohr_sinh(in.a, s1, s2) - direct).cwiseAbs().maxCoeff() < 1e-9);
  }
  // Commuting Hamiltonians: swapping the decomposition order flips the sign.
  const auto geo = GeometrySpec::chain(2);
  const auto z1 = HamiltonianSpec::from_paulis(geo, {PauliString::parse("Z1"), PauliString::parse("Z2")}, {0.3, 0.7});
  const auto z2 = HamiltonianSpec::from_paulis(geo, {PauliString::parse("Z1 Z2")}, {0.5});
  const auto s1 = SpectralData::from_dense(to_dense(z1)), s2 = SpectralData::from_dense(to_dense(z2));
  Rng rng(1);
  const Matrix a = random_operator(rng, 4);
  CHECK((double_bohr_sinh(a, s1, s2) + double_bohr_sinh(a, s2, s1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("relaxation to single-term tests", "[identifiability][property]") {
  for (int k = 0; k < 6; ++k) {
    const auto h = make_model(GeometrySpec::chain(3), Model::tfim, 200 + k, true);
    Rng rng(200 + k);
    std::vector<double> c(h.size());
    for (double& x : c) x = rng.uniform(-1, 1);
    const auto h2 = h.with_coefficients(c);
    const GibbsState truth(h, 1.0);
    const int d = h.graph().degree_bound();
    for (int site = 0; site < 3; ++site)
      for (const char* l : {"X", "Y", "Z"}) {
        const Matrix a = to_dense(PauliString::parse(l + std::to_string(site + 1)), 3);
        const Matrix x = commutator(a, to_dense(h) - to_dense(h2));
        double best = 0.0;
        for (const Term& t : h.terms())
          best = std::max(best, std::abs(kms_inner_product(commutator(a, to_dense(t.pauli, 3)), x, truth)));
        CHECK(kms_norm(x, truth) * kms_norm(x, truth) <= 2.0 * d * best + 1e-12);
      }
  }
}

TEST_CASE("stability envelopes", "[identifiability]") {
  const auto h = make_model(GeometrySpec::chain(6), Model::tfim, 1);
  const KernelParams p{1.0, 1.0, 4.0};
  const SiteSet o{2}, a{2};
  StabilityArgs b{StabilityMode::B_extensive, 1, 0.0, 2};
  StabilityArgs c{StabilityMode::C_ball, 1, 0.0, 2};
  CHECK(stability_bounds(p, h.graph(), o, a, b) == 0.0);
  CHECK(stability_bounds(p, h.graph(), o, a, c) == 0.0);
  c.kappa = 0.01;
  const double c1 = stability_bounds(p, h.graph(), o, a, c);
  c.kappa = 0.02;
  CHECK(stability_bounds(p, h.graph(), o, a, c) == Catch::Approx(2.0 * c1));
  double prev = std::numeric_limits<double>::infinity();
  for (int ell = 1; ell < 8; ++ell) {
    const double v = stability_bounds(p, h.graph(), o, a, StabilityArgs{StabilityMode::A_truncate, ell});
    CHECK(v <= prev);
    prev = v;
  }
}
