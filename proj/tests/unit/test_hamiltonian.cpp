#include <catch2/catch_amalgamated.hpp>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/hamiltonian.hpp"

using namespace gibbslearn;

TEST_CASE("tfim chain has bonds then fields", "[hamiltonian]") {
  const HamiltonianSpec h = make_model(GeometrySpec::chain(6), Model::tfim, 1);
  REQUIRE(h.size() == 11);
  int zz = 0, x = 0;
  for (const Term& t : h.terms()) {
    if (t.pauli.weight() == 2) ++zz;
    else ++x;
    CHECK(t.coefficient == 1.0);
  }
  CHECK(zz == 5);
  CHECK(x == 6);
}

TEST_CASE("model generation is seed-deterministic and in range", "[hamiltonian]") {
  const auto a = make_model(GeometrySpec::lattice(3, 3), Model::random, 42, true);
  const auto b = make_model(GeometrySpec::lattice(3, 3), Model::random, 42, true);
  CHECK(a.coefficients() == b.coefficients());
  CHECK(a.paulis() == b.paulis());
  int draws = 0;
  for (std::uint64_t seed = 0; draws < 1000; ++seed)
    for (double c : make_model(GeometrySpec::chain(8), Model::random, seed, true).coefficients()) {
      CHECK(c >= -1.0);
      CHECK(c <= 1.0);
      ++draws;
    }
}

TEST_CASE("dense Hamiltonian is the weighted Pauli sum", "[hamiltonian]") {
  const HamiltonianSpec h = make_model(GeometrySpec::chain(3), Model::heisenberg, 5, true);
  Matrix sum = Matrix::Zero(8, 8);
  for (const Term& t : h.terms()) sum += t.coefficient * to_dense(t.pauli, 3);
  CHECK((to_dense(h) - sum).norm() < 1e-13);
  CHECK(hermiticity_defect(to_dense(h)) < 1e-14);
}

TEST_CASE("ball truncation on a six-site chain", "[hamiltonian]") {
  const HamiltonianSpec h = make_model(GeometrySpec::chain(6), Model::tfim, 1);
  const SiteSet a{2};
  const auto dist = h.graph().distances_from(a);
  const HamiltonianSpec ball = truncate_to_ball(h, a, 3);
  std::vector<TermId> expected;
  for (std::size_t k = 0; k < h.size(); ++k)
    if (dist[k] <= 1) expected.push_back(h.term(k).id);
  CHECK(ball.ids() == expected);
  CHECK(truncate_to_ball(h, a, h.graph().diameter() + 3).ids() == h.ids());
  CHECK(truncate_to_ball(h, a, 1).size() == 0);
  CHECK(truncate_to_radius(h, a, 1).ids() == expected);
}

TEST_CASE("coefficient range and duplicate checks", "[hamiltonian]") {
  const auto geo = GeometrySpec::chain(2);
  CHECK_THROWS_AS(HamiltonianSpec::from_paulis(geo, {PauliString::parse("X1"), PauliString::parse("X1")}, {0.1, 0.2}),
                  MalformedInput);
  const auto h = HamiltonianSpec::from_paulis(geo, {PauliString::parse("X1")}, {1.5});
  CHECK_THROWS_AS(h.require_unit_range(), MalformedInput);
}
