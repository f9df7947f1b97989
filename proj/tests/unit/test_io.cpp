#include <catch2/catch_amalgamated.hpp>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/io.hpp"

using namespace gibbslearn;

TEST_CASE("Hamiltonian files round-trip", "[io]") {
  const auto h = make_model(GeometrySpec::lattice(2, 3, true), Model::random, 8, true);
  const Json j = to_json(h);
  CHECK(j["schema_version"] == kSchemaVersion);
  const auto back = hamiltonian_from_json(j);
  CHECK(back.coefficients() == h.coefficients());
  CHECK(back.paulis() == h.paulis());
  CHECK(back.geometry().periodic);
  CHECK(to_json(back).dump() == j.dump());
  const auto custom = HamiltonianSpec::from_paulis(GeometrySpec::custom({"a", "b", "c"}),
                                                   {PauliString::parse("X1 Y3")}, {0.5});
  CHECK(hamiltonian_from_json(to_json(custom)).geometry().kind == GeometryKind::custom);
}

TEST_CASE("schema and content errors", "[io]") {
  Json j = to_json(make_model(GeometrySpec::chain(2), Model::tfim, 1));
  Json bad = j;
  bad["schema_version"] = 2;
  CHECK_THROWS_AS(hamiltonian_from_json(bad), SchemaError);
  bad = j;
  bad.erase("schema_version");
  CHECK_THROWS_AS(hamiltonian_from_json(bad), SchemaError);
  bad = j;
  bad["extra"] = 1;
  CHECK_THROWS_AS(hamiltonian_from_json(bad), MalformedInput);
  bad = j;
  bad["terms"][0]["pauli"] = "Z1 Z9";
  CHECK_THROWS_AS(hamiltonian_from_json(bad), MalformedInput);
  CHECK_THROWS_AS(learn_config_from_json(Json{{"kapa", 0.1}}), MalformedInput);
  CHECK_THROWS_AS(learn_config_from_json(Json{{"mode", "noisy"}}), MalformedInput);
}

TEST_CASE("config round-trip", "[io]") {
  LearnConfig c;
  c.beta = 2.0;
  c.kappa = 0.1;
  c.mode = MeasureMode::shots;
  c.shots = 500;
  c.strategy = SearchStrategy::local;
  c.paper_constants = PaperConstants{1, 2, 3};
  const LearnConfig back = learn_config_from_json(to_json(c));
  CHECK(to_json(back).dump() == to_json(c).dump());
}

namespace {

LearnReport sample_report(const std::string& algorithm, double eps, long long samples, double err) {
  LearnReport r;
  r.algorithm = algorithm;
  r.config.epsilon = eps;
  r.config.mode = MeasureMode::shots;
  r.ids = {TermId{0}, TermId{1}};
  r.paulis = {"Z1 Z2", "X1"};
  r.learned = {0.5, -0.25};
  r.truth = {0.5 + err, -0.25};
  r.truth_error = {err, 0.0};
  r.max_error = err;
  r.samples_used = samples;
  r.samples_required = samples;
  r.history.push_back(IterationRecord{1, 0.2, err, 0.5, 0.4, samples, samples, 10, 2});
  return r;
}

}  // namespace

TEST_CASE("report JSON and CSV", "[io]") {
  const LearnReport r = sample_report("simple", 0.1, 1000, 0.01);
  const Json j = to_json(r, false);
  CHECK_FALSE(j.contains("timestamp"));
  CHECK(to_json(r, true).contains("timestamp"));
  const LearnReport back = report_from_json(j);
  CHECK(to_json(back, false).dump() == j.dump());
  CHECK(report_csv(r).rfind("term_id,pauli_string,learned,truth,abs_error\n", 0) == 0);
  CHECK(plot_csv(r).rfind("iteration,eta,max_error,ratio,ratio_eta,", 0) == 0);
  Json wrong = j;
  wrong["kind"] = "something";
  CHECK_THROWS_AS(report_from_json(wrong), SchemaError);
}

TEST_CASE("aggregation and trends", "[io]") {
  const auto single = aggregate_reports({sample_report("simple", 0.1, 1000, 0.01)});
  REQUIRE(single.size() == 1);
  CHECK(single[0].runs == 1);
  CHECK(single[0].success_rate == 1.0);
  CHECK(single[0].mean_samples_used == 1000.0);

  std::vector<LearnReport> rs;
  for (double eps : {0.2, 0.1, 0.05})
    for (int k = 0; k < 3; ++k) rs.push_back(sample_report("simple", eps, (long long)(40.0 / (eps * eps)), eps * (k == 0 ? 2 : 0.5)));
  const auto rows = aggregate_reports(rs);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) CHECK(row.success_rate == Catch::Approx(2.0 / 3.0));
  const auto trends = sample_trends(rows);
  REQUIRE(trends.size() == 1);
  CHECK(trends[0].slope == Catch::Approx(2.0).margin(1e-3));
  CHECK(fit_slope({0, 1, 2}, {1, 3, 5}) == Catch::Approx(2.0));
  CHECK_THROWS_AS(fit_slope({1}, {1}), RangeError);
}
