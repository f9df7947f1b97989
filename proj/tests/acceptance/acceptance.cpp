// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are fixed
// here and never read from the command line.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gibbslearn/io.hpp"
#include "gibbslearn/learner.hpp"
#include "gibbslearn/measurement.hpp"
#include "gibbslearn/random.hpp"
#include "gibbslearn/verify.hpp"

using namespace gibbslearn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome from_checks(const std::vector<CheckResult>& checks) {
  Outcome o{true, ""};
  for (const CheckResult& c : checks) {
    o.pass = o.pass && c.pass;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += c.name + fmt(" %.3g<=%.3g", c.residual, c.tolerance);
  }
  return o;
}

VerifyOptions options(std::vector<int> sizes, int instances) {
  VerifyOptions opt;
  opt.seed = 2024;
  opt.sizes = std::move(sizes);
  opt.betas = {0.5, 1.0, 2.0};
  opt.instances = instances;
  return opt;
}

Outcome criterion1() { return from_checks({check_ground_truth_vanishing(options({2, 3}, 50))}); }
Outcome criterion2() { return from_checks({check_identity_closure(options({2, 3}, 20))}); }
Outcome criterion3() { return from_checks({check_cross_path(options({2, 3}, 20))}); }

Outcome criterion4() {
  std::vector<CheckResult> keep;
  for (const CheckResult& c : check_oft_identities(options({2, 3, 4}, 20)))
    if (c.name == "bohr_reconstruction" || c.name == "conjugation_shift" || c.name == "norm_decay_bound" ||
        c.name == "high_temperature_convergence")
      keep.push_back(c);
  return from_checks(keep);
}

Outcome criterion5() { return from_checks({check_kms_faithfulness(options({2, 3, 4}, 20))}); }
Outcome criterion6() { return from_checks({check_local_closeness(options({2, 3, 4}, 20))}); }

Outcome criterion7() {
  VerifyOptions opt = options({6}, 20);
  opt.lr_sites = 6;
  return from_checks(check_lieb_robinson(opt));
}

HamiltonianSpec tfim_chain(int n, std::uint64_t seed) {
  return make_model(GeometrySpec::chain(n), Model::tfim, seed, true);
}

Outcome criterion8() {
  const HamiltonianSpec h = tfim_chain(6, 808);
  LearnConfig cfg;
  cfg.beta = 1.0;
  cfg.kappa = 0.05;
  cfg.epsilon = 0.05;
  cfg.ell = h.graph().diameter();
  const LearnReport r = learn_simple(HiddenGibbsSystem(h, cfg.beta), cfg);
  const double tol = cfg.kappa + 1e-3;
  return {r.max_error <= tol, fmt("max |h - h_true| = %.4g <= %.4g over %.0f terms", r.max_error, tol, double(h.size()))};
}

Outcome criterion9() {
  const HamiltonianSpec h = tfim_chain(6, 909);
  LearnConfig cfg;
  cfg.beta = 1.0;
  cfg.eta0 = 0.2;
  cfg.epsilon = 0.0125;  // four halvings of eta0
  const LearnReport r = learn_iterative(HiddenGibbsSystem(h, cfg.beta), cfg);
  const double tol = 0.6;
  double worst = 0.0, worst_chain = 0.0;
  int iterations = 0;
  for (const IterationRecord& rec : r.history) {
    if (rec.iteration == 0) continue;
    ++iterations;
    worst = std::max(worst, rec.ratio_eta);
    worst_chain = std::max(worst_chain, rec.ratio);
  }
  const bool ok = iterations >= 4 && worst <= tol;
  return {ok, fmt("max error/eta = %.3g <= %.2g over %.0f iterations", worst, tol, iterations) +
                  fmt(" (error-to-error max %.3g, final error %.3g)", worst_chain, r.max_error)};
}

Outcome criterion10() {
  // (a) Estimator deviation vs shots, pooled over 25 observables per seed
  // and normalized by the exact standard deviation.
  const GibbsState g(tfim_chain(4, 1010), 1.0);
  const std::vector<long long> shots{1000, 4000, 16000};
  const int seeds = 20, observables = 25;
  Rng rng(1010);
  std::vector<Matrix> obs;
  std::vector<double> exact, sd;
  for (int k = 0; k < observables; ++k) {
    obs.push_back(random_hermitian(rng, 16));
    const double m = (obs.back() * g.rho()).trace().real();
    const double m2 = (obs.back() * obs.back() * g.rho()).trace().real();
    exact.push_back(m);
    sd.push_back(std::sqrt(std::max(m2 - m * m, 1e-300)));
  }
  std::vector<double> lx, ly;
  for (long long s : shots) {
    double ms = 0.0;
    for (int seed = 0; seed < seeds; ++seed)
      for (int k = 0; k < observables; ++k) {
        const auto e = sample_expectation(obs[k], g, s, derive_seed(seed, std::to_string(s) + ":" + std::to_string(k)));
        const double z = (e.mean.real() - exact[k]) / sd[k];
        ms += z * z;
      }
    lx.push_back(std::log(double(s)));
    ly.push_back(0.5 * std::log(ms / (seeds * observables)));
  }
  const double slope = fit_slope(lx, ly);
  const bool slope_ok = std::abs(slope + 0.5) <= 0.1;

  // (b) Full shots-mode learning runs.
  const auto geo = GeometrySpec::chain(2);
  const HamiltonianSpec h = HamiltonianSpec::from_paulis(
      geo, {PauliString::parse("Z1"), PauliString::parse("Z2"), PauliString::parse("X1 X2")}, {0.53, -0.27, 0.66});
  const HiddenGibbsSystem sys(h, 1.0);
  std::vector<LearnReport> reports;
  int successes = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    LearnConfig cfg;
    cfg.epsilon = 0.2;
    cfg.p_fail = 0.1;
    cfg.kappa = 0.1;
    cfg.mode = MeasureMode::shots;
    cfg.q_precision_factor = 0.2;
    cfg.strategy = SearchStrategy::local;
    cfg.seed = seed;
    reports.push_back(learn_simple(sys, cfg));
    if (reports.back().max_error <= cfg.epsilon) ++successes;
  }
  const auto rows = aggregate_reports(reports);
  const bool runs_ok = successes >= 18 && rows.size() == 1 && rows[0].success_rate >= 0.9;
  return {slope_ok && runs_ok, fmt("deviation slope %.3f in [-0.6, -0.4]; ", slope) +
                                   fmt("%.0f/20 shots-mode runs within eps (need 18), mean samples %.3g", successes,
                                       rows.empty() ? 0.0 : rows[0].mean_samples_used)};
}

Outcome criterion11() {
  const HamiltonianSpec h = tfim_chain(3, 1111);
  const HiddenGibbsSystem sys(h, 1.0);
  std::vector<LearnReport> reports;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    LearnConfig cfg;
    cfg.epsilon = eps;
    cfg.kappa = eps / 2.0;
    cfg.account_samples = true;
    cfg.strategy = SearchStrategy::local;
    reports.push_back(learn_simple(sys, cfg));
  }
  const auto trends = sample_trends(aggregate_reports(reports));
  if (trends.size() != 1) return {false, "no trend row"};
  const double slope = trends[0].slope;
  return {std::abs(slope - 2.0) <= 0.3, fmt("log samples vs log 1/eps slope %.3f in [1.7, 2.3] over %.0f eps values",
                                            slope, trends[0].points)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double minutes;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "ground-truth vanishing", 1, criterion1},
      {2, "identity closure", 2, criterion2},
      {3, "cross-path agreement", 5, criterion3},
      {4, "operator Fourier identities", 2, criterion4},
      {5, "KMS local faithfulness", 2, criterion5},
      {6, "local-closeness identity", 1, criterion6},
      {7, "Lieb-Robinson truncation", 2, criterion7},
      {8, "end-to-end simple learner", 15, criterion8},
      {9, "iterative contraction", 20, criterion9},
      {10, "shot-mode statistics", 30, criterion10},
      {11, "sample count vs epsilon", 30, criterion11},
  };
  bool all_ok = true;
  for (const Criterion& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= 60.0 * c.minutes;
    const bool ok = o.pass && in_time;
    all_ok = all_ok && ok;
    std::printf("%s criterion %d (%s): %s; %.1fs of %.0fs\n", ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, 60.0 * c.minutes);
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
