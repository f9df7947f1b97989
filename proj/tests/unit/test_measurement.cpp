#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/measurement.hpp"
#include "gibbslearn/random.hpp"

using namespace gibbslearn;

namespace {

const cplx I(0.0, 1.0);

GibbsState small_state(std::uint64_t seed, int n = 3) {
  return GibbsState(make_model(GeometrySpec::chain(n), Model::random, seed, true), 1.0);
}

std::pair<MeasurementPlan, std::vector<Matrix>> local_plan(int n, long long shots) {
  // One observable per bond of a chain, plus one per site.
  Rng rng(17);
  std::vector<ObservableJob> jobs;
  std::vector<std::shared_ptr<const OperatorBatch>> batches;
  std::vector<Matrix> ops;
  for (int s = 0; s + 1 < n; ++s) {
    ops.push_back(random_operator(rng, 4));
    batches.push_back(std::make_shared<DenseBatch>(SiteSet{s, s + 1}, std::vector<Matrix>{ops.back()}));
    jobs.push_back({"bond" + std::to_string(s), SiteSet{s, s + 1}, batches.size() - 1, 0});
  }
  for (int s = 0; s < n; ++s) {
    ops.push_back(random_operator(rng, 2));
    batches.push_back(std::make_shared<DenseBatch>(SiteSet{s}, std::vector<Matrix>{ops.back()}));
    jobs.push_back({"site" + std::to_string(s), SiteSet{s}, batches.size() - 1, 0});
  }
  return {build_plan(jobs, batches, shots, 5), ops};
}

}  // namespace

TEST_CASE("hermitian split", "[measurement]") {
  const Matrix x = to_dense(PauliString::parse("X1"), 1);
  auto [h1, h2] = hermitian_split(x);
  CHECK((h1 - x).norm() == 0.0);
  CHECK(h2.norm() == 0.0);
  std::tie(h1, h2) = hermitian_split(I * x);
  CHECK(h1.norm() < 1e-16);
  CHECK((h2 - x).norm() < 1e-16);
  Rng rng(1);
  const Matrix q = random_operator(rng, 8);
  std::tie(h1, h2) = hermitian_split(q);
  CHECK((h1 + I * h2 - q).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(hermiticity_defect(h1) < 1e-15);
  CHECK(hermiticity_defect(h2) < 1e-15);
}

TEST_CASE("zero-variance observable", "[measurement]") {
  Matrix rho = Matrix::Zero(4, 4);
  rho(0, 0) = 0.3;
  rho(3, 3) = 0.7;
  const Matrix obs = 0.25 * Matrix::Identity(4, 4);
  const ShotEstimate e = sample_expectation(obs, rho, 1000, 3);
  CHECK(std::abs(e.mean - 0.25) < 1e-14);
  CHECK(e.std_error == 0.0);
  CHECK(e.shots == 1000);
}

TEST_CASE("sampling is unbiased and reproducible", "[measurement]") {
  const GibbsState g = small_state(4);
  Rng rng(2);
  const Matrix obs = random_hermitian(rng, 8);
  const double exact = (obs * g.rho()).trace().real();
  int inside = 0;
  double mean_of_means = 0.0;
  for (int s = 0; s < 50; ++s) {
    const ShotEstimate e = sample_expectation(obs, g, 2000, derive_seed(9, std::to_string(s)));
    if (std::abs(e.mean.real() - exact) <= 5.0 * e.std_error) ++inside;
    mean_of_means += e.mean.real() / 50.0;
    CHECK(e.std_error >= 0.0);
  }
  CHECK(inside == 50);
  CHECK(std::abs(mean_of_means - exact) < 3.0 * 0.6 / std::sqrt(50.0 * 2000.0));
  const ShotEstimate a = sample_expectation(obs, g, 777, 11), b = sample_expectation(obs, g, 777, 11);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("deviation halves when shots quadruple", "[measurement]") {
  const GibbsState g = small_state(6, 2);
  Rng rng(3);
  const Matrix obs = random_hermitian(rng, 4);
  const double exact = (obs * g.rho()).trace().real();
  std::vector<double> lx, ly;
  for (long long shots : {1000LL, 4000LL, 16000LL}) {
    double ms = 0.0;
    for (int s = 0; s < 200; ++s) {
      const double d = sample_expectation(obs, g, shots, derive_seed(shots, std::to_string(s))).mean.real() - exact;
      ms += d * d / 200.0;
    }
    lx.push_back(std::log(double(shots)));
    ly.push_back(0.5 * std::log(ms));
  }
  const double slope = (ly[2] - ly[0]) / (lx[2] - lx[0]);
  CHECK(slope == Catch::Approx(-0.5).margin(0.1));
}

TEST_CASE("invalid states are reported", "[measurement]") {
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 1.2;
  rho(1, 1) = -0.2;
  CHECK_THROWS_AS(sample_expectation(Matrix::Identity(2, 2), rho, 10, 1), NumericalStateError);
  CHECK_THROWS(sample_expectation(Matrix::Identity(2, 2), GibbsState(Matrix::Identity(2, 2), 1.0), 0, 1));
}

TEST_CASE("Hoeffding shot counts", "[measurement]") {
  CHECK(hoeffding_shots(2.0, 0.1, 0.05) == (long long)std::ceil(4.0 * std::log(4.0 / 0.05) / 0.01));
  CHECK(hoeffding_shots(0.0, 0.1, 0.05) == 0);
  CHECK(hoeffding_shots(1.0, 0.05, 0.1) > hoeffding_shots(1.0, 0.1, 0.1));
}

TEST_CASE("plan colouring", "[measurement]") {
  auto make = [](const std::vector<SiteSet>& sups) {
    std::vector<ObservableJob> jobs;
    std::vector<std::shared_ptr<const OperatorBatch>> batches;
    for (std::size_t k = 0; k < sups.size(); ++k) {
      const std::size_t dim = std::size_t{1} << sups[k].size();
      batches.push_back(std::make_shared<DenseBatch>(sups[k], std::vector<Matrix>{Matrix::Identity(dim, dim)}));
      jobs.push_back({"j" + std::to_string(k), sups[k], k, 0});
    }
    return build_plan(jobs, batches, 10, 1);
  };
  CHECK(make({{0}, {1}, {2}, {3}}).chi == 1);
  CHECK(make({{0, 1}, {0, 1}, {0, 1}}).chi == 3);
  // Sliding windows of width 3 on 10 sites: interval graph, clique number 3.
  std::vector<SiteSet> windows;
  for (int s = 0; s + 2 < 10; ++s) windows.push_back({s, s + 1, s + 2});
  const MeasurementPlan p = make(windows);
  CHECK(p.chi >= 3);
  CHECK(p.chi <= 6);
  CHECK(p.chi == (int)p.groups.size());
  for (const auto& group : p.groups)
    for (std::size_t i = 0; i < group.size(); ++i)
      for (std::size_t j = i + 1; j < group.size(); ++j)
        CHECK_FALSE(sites_intersect(p.jobs[group[i]].support, p.jobs[group[j]].support));
}

TEST_CASE("plan execution", "[measurement]") {
  const GibbsState g = small_state(21, 4);
  auto [plan, ops] = local_plan(4, 4000);
  const PlanResult exact = run_plan(plan, g, MeasureMode::exact);
  for (std::size_t k = 0; k < plan.jobs.size(); ++k) {
    const Matrix full = embed(ops[k], plan.jobs[k].support, SiteSet{0, 1, 2, 3});
    const cplx v = (full * g.rho()).trace();
    CHECK(std::abs(exact.estimates.at(plan.jobs[k].label).mean - v) < 1e-12);
    CHECK(exact.estimates.at(plan.jobs[k].label).std_error == 0.0);
  }
  const PlanResult s1 = run_plan(plan, g, MeasureMode::shots), s2 = run_plan(plan, g, MeasureMode::shots);
  for (const auto& [label, e] : s1.estimates) CHECK(e.mean == s2.estimates.at(label).mean);
  // Each job has two nonzero Hermitian parts sharing the per-job shots.
  CHECK(s1.copies == plan.chi * 4000);
  const auto path = (std::filesystem::temp_directory_path() / "gibbslearn_transcript.csv").string();
  write_transcript_csv(path, plan, s1);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "label,group,shots,mean_re,mean_im,std_error");
}
