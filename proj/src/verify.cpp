#include "gibbslearn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/identifiability.hpp"
#include "gibbslearn/learner.hpp"
#include "gibbslearn/lieb_robinson.hpp"
#include "gibbslearn/parallel.hpp"
#include "gibbslearn/random.hpp"

namespace gibbslearn {

std::string to_string(Suite s) {
  switch (s) {
    case Suite::oft: return "oft";
    case Suite::identifiability: return "identifiability";
    case Suite::kms: return "kms";
    case Suite::lieb_robinson: return "lieb_robinson";
    case Suite::kernels: return "kernels";
  }
  return "?";
}

std::vector<Suite> parse_suites(const std::vector<std::string>& names) {
  if (names.empty()) throw MalformedInput("no verification suite selected");
  const std::vector<Suite> every{Suite::oft, Suite::identifiability, Suite::kms, Suite::lieb_robinson,
                                 Suite::kernels};
  std::vector<Suite> out;
  auto add = [&](Suite s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  };
  for (const std::string& n : names) {
    if (n == "all") {
      for (Suite s : every) add(s);
      continue;
    }
    bool found = false;
    for (Suite s : every)
      if (to_string(s) == n) {
        add(s);
        found = true;
      }
    if (!found) throw MalformedInput("unknown verification suite '" + n + "'");
  }
  return out;
}

RandomInstance random_instance(const VerifyOptions& opt, int k) {
  if (opt.sizes.empty() || opt.betas.empty()) throw MalformedInput("verification needs sizes and betas");
  RandomInstance r;
  r.n = opt.sizes[k % opt.sizes.size()];
  r.beta = opt.betas[(k / opt.sizes.size()) % opt.betas.size()];
  const auto tag = std::to_string(k);
  const GeometrySpec geo = GeometrySpec::chain(r.n);
  r.h = make_model(geo, Model::random, derive_seed(opt.seed, "h:" + tag), true);
  Rng coeff_rng(derive_seed(opt.seed, "h':" + tag));
  std::vector<double> c(r.h.size());
  for (double& x : c) x = coeff_rng.uniform(-1.0, 1.0);
  r.h_other = r.h.with_coefficients(c);
  r.g = make_model(geo, Model::random, derive_seed(opt.seed, "g:" + tag), true);
  Rng rng(derive_seed(opt.seed, "ops:" + tag));
  const std::size_t dim = std::size_t{1} << r.n;
  r.o = random_operator(rng, dim);
  r.a = random_operator(rng, dim);
  return r;
}

namespace {

// Runs body(k) for k < count in parallel and keeps the worst residual.
CheckResult batch(const std::string& suite, const std::string& name, int count, double tol,
                  const std::function<double(int)>& body) {
  std::vector<double> res(count, 0.0);
  parallel_for(count, [&](std::size_t k) { res[k] = body(static_cast<int>(k)); });
  CheckResult c;
  c.suite = suite;
  c.name = name;
  c.instances = count;
  c.tolerance = tol;
  c.residual = 0.0;
  bool finite = true;
  for (double r : res) {
    if (!std::isfinite(r)) finite = false;
    c.residual = std::max(c.residual, r);
  }
  c.pass = finite && c.residual <= tol;
  if (!finite) c.residual = std::numeric_limits<double>::infinity();
  return c;
}

KernelParams params_for(const RandomInstance& r) {
  return KernelParams::learner_default(r.beta, 0.1, r.h.graph().degree_bound());
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

CheckResult check_ground_truth_vanishing(const VerifyOptions& opt) {
  return batch("identifiability", "ground_truth_vanishing", opt.instances, 1e-9, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const GibbsState truth(r.h, r.beta);
    return std::abs(q_frequency_exact(QInputs::make(r.o, r.g, r.a, r.h, truth, params_for(r))).value);
  });
}

CheckResult check_identity_closure(const VerifyOptions& opt) {
  return batch("identifiability", "identity_closure", opt.instances, 1e-7, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const GibbsState truth(r.h, r.beta);
    const KernelParams p = params_for(r);
    const QInputs in = QInputs::make(r.o, r.h, r.a, r.h_other, truth, p);
    const cplx lhs = kernels::oft_normalization(p.sigma) * identifiability_lhs(r.o, r.a, r.h, r.h_other, truth);
    const cplx q = q_frequency_exact(in).value;
    const cplx res = high_frequency_residual(in, to_dense(r.h));
    const double scale = std::max({std::abs(lhs), std::abs(q) + std::abs(res), 1e-300});
    return std::abs(lhs - q - res) / scale;
  });
}

CheckResult check_cross_path(const VerifyOptions& opt) {
  // Residual is |difference| / est_error; the tolerance is the ratio 1.
  return batch("identifiability", "cross_path_agreement", opt.instances, 1.0, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const GibbsState truth(r.h, r.beta);
    const QInputs in = QInputs::make(r.o, r.g, r.a, r.h_other, truth, params_for(r));
    const QuadratureGrid grid = kernels::choose_truncation(in.params, in.op_norm_product(), 1e-8, in.bandwidth());
    const QValue f = q_frequency_exact(in);
    const QValue t = q_time_quadrature(in, grid);
    return std::abs(f.value - t.value) / t.est_error;
  });
}

std::vector<CheckResult> check_oft_identities(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  const std::string s = "oft";
  out.push_back(batch(s, "gibbs_state_normalization", opt.instances, 1e-12, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const GibbsState g(r.h, r.beta);
    const double tr = std::abs(g.rho().trace() - 1.0);
    const double sq = max_abs(g.sqrt_rho() * g.sqrt_rho() - g.rho());
    const double inv = max_abs(g.sqrt_rho() * g.inv_sqrt_rho() - Matrix::Identity(g.rho().rows(), g.rho().cols()));
    return std::max({tr, sq, inv * 1e-2});
  }));
  out.push_back(batch(s, "bohr_reconstruction", opt.instances, 1e-10, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const BohrDecomposition b(r.a, SpectralData::from_dense(to_dense(r.h)));
    Matrix sum = Matrix::Zero(r.a.rows(), r.a.cols());
    for (std::size_t j = 0; j < b.size(); ++j) sum += b.component(j);
    return max_abs(sum - r.a);
  }));
  out.push_back(batch(s, "bohr_adjoint_symmetry", opt.instances, 1e-12, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const SpectralPtr sp = SpectralData::from_dense(to_dense(r.h));
    const BohrDecomposition b(r.a, sp);
    const BohrDecomposition bd(dagger(r.a), sp);
    double worst = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double nu = b.frequencies()[j];
      worst = std::max(worst, max_abs(dagger(b.component(j)) - bd.component_at(-nu)));
    }
    return worst;
  }));
  out.push_back(batch(s, "heisenberg_bohr_phases", opt.instances, 1e-10, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const SpectralPtr sp = SpectralData::from_dense(to_dense(r.h));
    const BohrDecomposition b(r.a, sp);
    Rng rng(derive_seed(opt.seed, "times:" + std::to_string(k)));
    double worst = 0.0;
    for (int j = 0; j < 10; ++j) {
      const double t = rng.uniform(-3.0, 3.0);
      const Matrix direct = heisenberg_evolve(r.a, *sp, t);
      const Matrix bohr = b.weighted_sum([t](double nu) { return std::exp(cplx(0.0, nu * t)); });
      worst = std::max(worst, max_abs(direct - bohr));
    }
    return worst;
  }));
  out.push_back(batch(s, "oft_reconstruction", opt.instances, 1e-10, [&](int k) {
    // Trapezoid over omega of the full operator; spectrally accurate for the
    // Gaussian filter once the window covers every Bohr frequency.
    const RandomInstance r = random_instance(opt, k);
    const double sigma = 1.0 / r.beta;
    const SpectralPtr sp = SpectralData::from_dense(to_dense(r.h));
    const BohrDecomposition b(r.a, sp);
    const double reach = sp->spread() + 14.0 * sigma;
    const double step = sigma / 4.0;
    const int m = static_cast<int>(std::ceil(reach / step));
    Matrix sum = Matrix::Zero(r.a.rows(), r.a.cols());
    for (int j = -m; j <= m; ++j) sum += operator_fourier_transform(b, j * step, sigma);
    sum *= step / kernels::oft_normalization(sigma);
    return max_abs(sum - r.a);
  }));
  out.push_back(batch(s, "conjugation_shift", opt.instances, 1e-10, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const double sigma = 1.0 / r.beta;
    const SpectralPtr sp = SpectralData::from_dense(to_dense(r.h));
    const BohrDecomposition b(r.a, sp);
    double worst = 0.0;
    for (double omega : {-2.0, -0.5, 0.0, 0.7, 2.5}) {
      const Matrix lhs = imaginary_conjugate(operator_fourier_transform(b, omega, sigma), *sp, r.beta);
      const Matrix rhs = std::exp(r.beta * omega + sigma * sigma * r.beta * r.beta) *
                         operator_fourier_transform(b, omega + 2.0 * sigma * sigma * r.beta, sigma);
      worst = std::max(worst, max_abs(lhs - rhs) / std::max(1.0, max_abs(rhs)));
    }
    return worst;
  }));
  out.push_back(batch(s, "norm_decay_bound", opt.instances, 1.0 + 1e-12, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const double sigma = 1.0 / r.beta;
    const SpectralPtr sp = SpectralData::from_dense(to_dense(r.h));
    const BohrDecomposition b(r.a, sp);
    const double conj = op_norm(imaginary_conjugate(r.a, *sp, r.beta));
    double worst = 0.0;
    for (double omega = -4.0; omega <= 4.0; omega += 0.5) {
      const double bound = std::exp(-r.beta * omega + sigma * sigma * r.beta * r.beta) /
                           std::sqrt(sigma * std::sqrt(2.0 * kernels::kPi)) * conj;
      worst = std::max(worst, op_norm(operator_fourier_transform(b, omega, sigma)) / bound);
    }
    return worst;
  }));
  out.push_back(batch(s, "high_temperature_convergence", opt.instances, 1.0 + 1e-12, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const int d = r.h.graph().degree_bound();
    const SpectralPtr sp = SpectralData::from_dense(to_dense(r.h));
    double worst = 0.0;
    for (double frac : {0.25, 0.5, 0.9}) {
      const double beta = frac / (2.0 * d);
      for (int site = 0; site < r.n; ++site)
        for (const char* letter : {"X", "Y", "Z"}) {
          const Matrix a = to_dense(PauliString::parse(letter + std::to_string(site + 1)), r.n);
          worst = std::max(worst, op_norm(imaginary_conjugate(a, *sp, beta)) * (1.0 - 2.0 * d * beta));
        }
    }
    return worst;
  }));
  return out;
}

CheckResult check_kms_faithfulness(const VerifyOptions& opt) {
  // Worst ratio ||B||_tau / (bound * ||B||_rho), in log space since the
  // bound is huge.
  return batch("kms", "kms_local_faithfulness", opt.instances, 1.0, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    const int d = r.h.graph().degree_bound();
    const double beta = std::max(r.beta, 1.0 / (4.0 * d));
    const GibbsState g(r.h, beta);
    Rng rng(derive_seed(opt.seed, "kms:" + std::to_string(k)));
    SiteSet reg(r.n);
    for (int s = 0; s < r.n; ++s) reg[s] = s;
    double worst = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
      const int first = static_cast<int>(rng.uniform_int(r.n));
      SiteSet sub{first};
      if (trial % 2 == 1 && r.n > 1) sub = make_site_set({first, (first + 1) % r.n});
      const Matrix b = embed(random_operator(rng, std::size_t{1} << sub.size()), sub, reg);
      const double log_bound = 80.0 * beta * sub.size() + 16.0 * d * beta * std::log(2.0 * d * beta);
      const double log_ratio = std::log(tau_norm(b)) - std::log(kms_norm(b, g)) - log_bound;
      worst = std::max(worst, std::exp(std::min(log_ratio, 0.0)));
    }
    return worst;
  });
}

CheckResult check_local_closeness(const VerifyOptions& opt) {
  return batch("identifiability", "local_closeness_identity", opt.instances, 1e-10, [&](int k) {
    const RandomInstance r = random_instance(opt, k);
    double worst = 0.0;
    for (int site = 0; site < r.n; ++site) {
      const double lhs = local_closeness_lhs(r.h, r.h_other, site);
      const double rhs = local_closeness_rhs(r.h, r.h_other, site);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, rhs));
    }
    return worst;
  });
}

std::vector<CheckResult> check_lieb_robinson(const VerifyOptions& opt) {
  const int n = opt.lr_sites;
  const std::vector<double> times{0.25, 0.5, 1.0};
  const int count = std::max(1, opt.instances / 4);
  std::vector<double> monotone(count), ratio(count);
  parallel_for(count, [&](std::size_t k) {
    const GeometrySpec geo = GeometrySpec::chain(n);
    const HamiltonianSpec h = make_model(geo, Model::tfim, derive_seed(opt.seed, "lr:" + std::to_string(k)), true);
    const int d = h.graph().degree_bound();
    const int centre = n / 2;
    const SiteSet a_sites{centre};
    const Matrix a = to_dense(PauliString::parse("X" + std::to_string(centre + 1)), n);
    double worst_increase = 0.0, worst_ratio = 0.0;
    for (double t : times) {
      double prev = std::numeric_limits<double>::infinity();
      for (int ell = 1; ell <= h.graph().diameter() + 3; ++ell) {
        const double err = lr_truncation_error(h, a, a_sites, t, ell);
        worst_increase = std::max(worst_increase, err - prev);
        worst_ratio = std::max(worst_ratio, err / lr_bound(1.0, 1, d, t, ell));
        prev = err;
      }
    }
    monotone[k] = worst_increase;
    ratio[k] = worst_ratio;
  });
  CheckResult mono{"lieb_robinson", "truncation_error_monotone", true, 0.0, 1e-12, count};
  CheckResult env{"lieb_robinson", "truncation_envelope_constant", true, 0.0, 4.0, count};
  for (int k = 0; k < count; ++k) {
    mono.residual = std::max(mono.residual, monotone[k]);
    env.residual = std::max(env.residual, ratio[k]);
  }
  mono.pass = mono.residual <= mono.tolerance;
  env.pass = env.residual <= env.tolerance;
  return {mono, env};
}

namespace {

std::vector<CheckResult> kernel_checks(const VerifyOptions& opt) {
  using namespace kernels;
  std::vector<CheckResult> out;
  const std::string s = "kernels";
  Rng rng(derive_seed(opt.seed, "kernels"));
  struct Draw {
    double t, nu, omega;
    KernelParams p;
  };
  std::vector<Draw> draws(opt.instances);
  for (Draw& d : draws) {
    d.t = rng.uniform(-3.0, 3.0);
    d.nu = rng.uniform(-6.0, 6.0);
    d.omega = rng.uniform(-4.0, 4.0);
    d.p.beta = rng.uniform(0.25, 3.0);
    d.p.sigma = 1.0 / d.p.beta;
    d.p.omega_cut = rng.uniform(0.5, 8.0);
  }
  auto over = [&](const std::string& name, double tol, const std::function<double(const Draw&)>& f) {
    out.push_back(batch(s, name, opt.instances, tol, [&](int k) { return f(draws[k]); }));
  };
  over("f_normalization", 1e-10, [](const Draw& d) {
    const double sig = d.p.sigma;
    return std::abs(quadrature::integrate([sig](double t) { return std::pow(f_weight(t, sig), 2); },
                                          -std::numeric_limits<double>::infinity(),
                                          std::numeric_limits<double>::infinity()) -
                    1.0);
  });
  over("f_fourier_pair", 1e-8,
       [](const Draw& d) { return std::abs(f_hat(d.omega, d.p.sigma) - quadrature::f_hat(d.omega, d.p.sigma)); });
  over("g_fourier_pair", 1e-8, [](const Draw& d) { return std::abs(g_hat(d.nu) - quadrature::g_hat(d.nu)); });
  over("g_beta_envelope", 1.0 + 1e-12, [](const Draw& d) {
    double worst = 0.0;
    for (double t = 0.0; t <= 6.0 * d.p.beta; t += d.p.beta / 40.0)
      worst = std::max(worst, std::abs(g_beta(t, d.p.beta)) /
                                  (kGBetaEnvelopeConstant / d.p.beta * std::exp(-2.0 * kPi * t / d.p.beta)));
    return worst;
  });
  over("h_plus_closed_form", 1e-9, [](const Draw& d) {
    const std::complex<double> a = h_plus(d.t, d.p), b = quadrature::h_plus(d.t, d.p);
    return std::abs(a - b) / std::max(1.0, std::abs(b));
  });
  over("h_minus_conjugate", 1e-12, [](const Draw& d) {
    const auto hp = h_plus(d.t, d.p);
    return std::abs(h_minus(d.t, d.p) - std::conj(hp)) / std::max(1.0, std::abs(hp));
  });
  over("h_envelope", 1.0 + 1e-12, [](const Draw& d) {
    double worst = 0.0;
    for (double t = -4.0 / d.p.sigma; t <= 4.0 / d.p.sigma; t += 0.05 / d.p.sigma)
      worst = std::max(worst, std::max(std::abs(h_plus(t, d.p)), std::abs(h_minus(t, d.p))) / h_envelope(t, d.p));
    return worst;
  });
  over("bohr_weights_closed_form", 1e-9, [](const Draw& d) {
    const double wp = bohr_weight_plus(d.nu, d.p), wm = bohr_weight_minus(d.nu, d.p);
    const double qp = quadrature::bohr_weight_plus(d.nu, d.p), qm = quadrature::bohr_weight_minus(d.nu, d.p);
    return std::max(std::abs(wp - qp) / std::max(1.0, std::abs(qp)), std::abs(wm - qm) / std::max(1.0, std::abs(qm)));
  });
  over("tail_mass_closed_form", 1e-9, [](const Draw& d) {
    return std::abs(tail_mass(d.nu, d.p) - quadrature::tail_mass(d.nu, d.p));
  });
  over("truncation_postcondition", 1.0, [](const Draw& d) {
    const double tol = 1e-6;
    const QuadratureGrid g = choose_truncation(d.p, 1.0, tol);
    return quadrature_error_estimate(d.p, g, 1.0, {}) / tol;
  });
  return out;
}

}  // namespace

std::vector<CheckResult> run_suite(Suite s, const VerifyOptions& opt) {
  switch (s) {
    case Suite::oft: return check_oft_identities(opt);
    case Suite::identifiability:
      return {check_ground_truth_vanishing(opt), check_identity_closure(opt), check_cross_path(opt),
              check_local_closeness(opt)};
    case Suite::kms: return {check_kms_faithfulness(opt)};
    case Suite::lieb_robinson: return check_lieb_robinson(opt);
    case Suite::kernels: return kernel_checks(opt);
  }
  return {};
}

std::vector<CheckResult> run_verify(const std::vector<Suite>& suites, const VerifyOptions& opt) {
  if (suites.empty()) throw MalformedInput("no verification suite selected");
  std::vector<CheckResult> out;
  for (Suite s : suites) {
    auto part = run_suite(s, opt);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

Json verify_report_json(const std::vector<Suite>& suites, const VerifyOptions& opt,
                        const std::vector<CheckResult>& checks) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "verify_report";
  j["seed"] = opt.seed;
  j["sizes"] = opt.sizes;
  j["betas"] = opt.betas;
  j["instances"] = opt.instances;
  Json names = Json::array();
  for (Suite s : suites) names.push_back(to_string(s));
  j["suites"] = names;
  Json arr = Json::array();
  bool all = true;
  for (const CheckResult& c : checks) {
    all = all && c.pass;
    arr.push_back(Json{{"suite", c.suite},
                       {"name", c.name},
                       {"pass", c.pass},
                       {"residual", c.residual},
                       {"tolerance", c.tolerance},
                       {"instances", c.instances}});
  }
  j["checks"] = arr;
  j["passed"] = all;
  return j;
}

}  // namespace gibbslearn
