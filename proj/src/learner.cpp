#include "gibbslearn/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/identifiability.hpp"
#include "gibbslearn/random.hpp"

namespace gibbslearn {

// ---------------------------------------------------------------- nets

double EpsilonNet::nearest(double x) const {
  auto it = std::lower_bound(points.begin(), points.end(), x);
  if (it == points.begin()) return *it;
  if (it == points.end()) return points.back();
  const double hi = *it, lo = *(it - 1);
  return (x - lo <= hi - x) ? lo : hi;
}

std::pair<double, double> EpsilonNet::bracket(double x) const {
  auto it = std::lower_bound(points.begin(), points.end(), x);
  if (it == points.end()) return {points.back(), points.back()};
  if (*it == x || it == points.begin()) return {*it, *it};
  return {*(it - 1), *it};
}

EpsilonNet make_net(double kappa) {
  if (!(kappa > 0.0) || kappa > 2.0) throw RangeError("make_net: kappa must lie in (0, 2]");
  const int m = static_cast<int>(std::ceil(2.0 / kappa - 1e-12)) + 1;
  EpsilonNet net;
  net.kappa = kappa;
  net.points.resize(m);
  for (int j = 0; j < m; ++j) net.points[j] = -1.0 + 2.0 * j / (m - 1);
  net.points.back() = 1.0;
  return net;
}

CandidateEnumerator::CandidateEnumerator(std::size_t region_size, const EpsilonNet& net, double cap)
    : size_(region_size), net_(&net), count_(std::pow(static_cast<double>(net.points.size()), region_size)) {
  if (region_size == 0) throw MalformedInput("enumerate_candidates: empty region");
  if (count_ > cap)
    throw BudgetError("candidate enumeration needs " + std::to_string(count_) +
                          " assignments; use a larger kappa or a smaller radius",
                      count_);
  reset();
}

void CandidateEnumerator::reset() {
  idx_.assign(size_, 0);
  started_ = false;
  done_ = false;
}

bool CandidateEnumerator::next(std::vector<double>& out) {
  if (done_) return false;
  if (started_) {
    std::size_t k = size_;
    while (k > 0) {
      --k;
      if (++idx_[k] < net_->points.size()) break;
      idx_[k] = 0;
      if (k == 0) {
        done_ = true;
        return false;
      }
    }
  }
  started_ = true;
  out.resize(size_);
  for (std::size_t k = 0; k < size_; ++k) out[k] = net_->points[idx_[k]];
  return true;
}

CandidateEnumerator enumerate_candidates(const HamiltonianSpec& h_template, const std::vector<TermId>& region,
                                         const EpsilonNet& net, double cap) {
  for (TermId id : region)
    if (!h_template.position(id)) throw MalformedInput("enumerate_candidates: unknown term id");
  return CandidateEnumerator(region.size(), net, cap);
}

std::string to_string(SearchStrategy s) {
  switch (s) {
    case SearchStrategy::automatic: return "automatic";
    case SearchStrategy::exhaustive: return "exhaustive";
    case SearchStrategy::local: return "local";
  }
  return "?";
}

std::string to_string(ProbeSet p) { return p == ProbeSet::reduced ? "reduced" : "full_net"; }

// ---------------------------------------------------------------- parameters

PaperParameters paper_parameters(const PaperConstants& c, double beta, double epsilon, int degree, int locality,
                                 int dimension) {
  if (!(c.c1 > 0 && c.c2 > 0 && c.c3 > 0)) throw RangeError("paper constants must be positive");
  const double d = degree, q = locality, e2 = std::exp(2.0);
  const double log_db = std::log(d * beta);
  PaperParameters r;
  r.log_alpha = std::log(2.0 * d) + kAlphaExponentCondition * (d + q) * beta * log_db;
  r.log_alpha_proof = std::log(2.0 * d) + kAlphaExponentProof * (d + q) * beta * log_db;
  const double d_exp = (4.0 + 16.0 * e2 * std::pow(d, 4) * beta * beta) * std::log(d);
  const double le = std::log(epsilon);
  r.omega_cut = 4.0 * d * (std::log(c.c1) + std::log(5.0 * beta) + d_exp + r.log_alpha - 2.0 * le);
  r.ell = c.c2 * 10.0 * d * beta * (beta * r.omega_cut + std::log(5.0) + r.log_alpha - std::log(beta) - 2.0 * le);
  r.log_kappa = 2.0 * le - std::log(c.c3 * 40.0) - r.log_alpha - beta * r.omega_cut / 2.0 + 0.5 * std::log(beta) -
                (r.ell + 3.0) * std::log(d);
  r.omega_cut_iterative = 4.0 * d * (std::log(c.c1) + std::log(beta) + d_exp + r.log_alpha);
  double dfact = std::tgamma(dimension + 1.0);
  r.ell0 = c.c2 * 100.0 * dfact * d * beta * (beta * r.omega_cut_iterative + r.log_alpha - std::log(beta));
  r.log_kappa0 = -std::log(c.c3) - r.log_alpha - (dimension + 2.0) * std::log(r.ell0) -
                 beta * r.omega_cut_iterative / 2.0;
  return r;
}

void LearnConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw RangeError("beta must be positive");
  if (!(epsilon > 0.0) || epsilon > 1.0) throw RangeError("epsilon must lie in (0, 1]");
  if (ell < 0 || ell0 < 1) throw RangeError("radii must be >= 1");
  if (!(kappa > 0.0) || kappa > 2.0 || !(kappa0 > 0.0) || kappa0 > 2.0) throw RangeError("kappa must lie in (0, 2]");
  if (!(p_fail > 0.0) || p_fail >= 1.0) throw RangeError("p_fail must lie in (0, 1)");
  if (!(eta0 > 0.0) || eta0 > 1.0) throw RangeError("eta0 must lie in (0, 1]");
  if (omega_cut < 0.0) throw RangeError("omega_cut must be >= 0");
  if (shots < 0) throw RangeError("shots must be >= 0");
  if (!(q_precision_factor > 0.0)) throw RangeError("q_precision_factor must be positive");
}

int default_ell(double beta, double eps, const InteractionGraph& g) {
  const double formula = std::ceil(beta * beta + beta * std::log(1.0 / eps)) + 2.0;
  return std::max(1, std::min(g.diameter(), static_cast<int>(formula)));
}

KernelParams learner_kernel(const LearnConfig& cfg, double eps, int degree) {
  KernelParams p = KernelParams::learner_default(cfg.beta, eps, std::max(1, degree));
  if (cfg.omega_cut > 0.0) p.omega_cut = cfg.omega_cut;
  return p;
}

HiddenGibbsSystem::HiddenGibbsSystem(HamiltonianSpec truth, double beta)
    : truth_(std::move(truth)),
      structure_(truth_.with_coefficients(std::vector<double>(truth_.size(), 0.0))),
      state_(truth_, beta) {}

HamiltonianSpec LearnReport::as_spec(const HamiltonianSpec& structure) const {
  std::vector<double> c(structure.size(), 0.0);
  for (std::size_t j = 0; j < ids.size(); ++j) {
    auto pos = structure.position(ids[j]);
    if (!pos) throw MalformedInput("report term id missing from structure");
    c[*pos] = learned[j];
  }
  return structure.with_coefficients(c);
}

// ---------------------------------------------------------------- tests and labels

std::vector<LocalTest> local_tests(const HamiltonianSpec& h, int site) {
  if (site < 0 || site >= h.num_sites()) throw MalformedInput("local_tests: site outside the geometry");
  std::vector<LocalTest> out;
  for (Pauli letter : {Pauli::X, Pauli::Y, Pauli::Z}) {
    const PauliString a({{site, letter}});
    for (std::size_t pos : h.graph().terms_at_site(site)) {
      const Term& t = h.term(pos);
      if (a.commutes_with(t.pauli)) continue;
      out.push_back(LocalTest{letter, t.id, a, a * t.pauli});
    }
  }
  return out;
}

std::vector<std::string> probe_names(const LearnConfig& cfg, std::size_t num_candidates) {
  std::vector<std::string> names{"self", "zero"};
  if (cfg.probes == ProbeSet::full_net)
    for (std::size_t k = 0; k < num_candidates; ++k) names.push_back("net" + std::to_string(k));
  return names;
}

namespace {

std::string key_from(const std::vector<double>& c) {
  std::string s = "K[";
  char buf[32];
  for (std::size_t j = 0; j < c.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", c[j]);
    if (j) s += ';';
    s += buf;
  }
  return s + "]";
}

}  // namespace

std::string candidate_key(const HamiltonianSpec& k_candidate) { return key_from(k_candidate.coefficients()); }

std::string job_label(int site, const LocalTest& t, const std::string& probe, const std::string& key) {
  return "i=" + std::to_string(site + 1) + "|A=" + t.a.to_string() + "|g=" + std::to_string(t.gamma.index) +
         "|G=" + probe + "|" + key;
}

std::vector<int> test_sites(const HamiltonianSpec& h_template, const std::vector<std::size_t>& region, int site,
                            bool joint) {
  std::vector<int> out{site};
  if (!joint) return out;
  const InteractionGraph& g = h_template.graph();
  for (int j = 0; j < h_template.num_sites(); ++j) {
    if (j == site || g.terms_at_site(j).empty()) continue;
    bool inside = true;
    for (std::size_t pos : g.terms_at_site(j))
      inside = inside && std::find(region.begin(), region.end(), pos) != region.end();
    if (inside) out.push_back(j);
  }
  return out;
}

double score_candidate(const HamiltonianSpec& k_candidate, int site, const LearnConfig& cfg,
                       const std::map<std::string, ShotEstimate>& estimates, std::size_t num_candidates,
                       const std::vector<int>& sites) {
  const std::string key = candidate_key(k_candidate);
  std::vector<LocalTest> tests;
  for (int j : sites.empty() ? std::vector<int>{site} : sites) {
    auto more = local_tests(k_candidate, j);
    tests.insert(tests.end(), more.begin(), more.end());
  }
  double worst = 0.0;
  for (const LocalTest& t : tests)
    for (const std::string& probe : probe_names(cfg, num_candidates)) {
      auto it = estimates.find(job_label(site, t, probe, key));
      if (it == estimates.end()) throw IncompletePlan("score_candidate: missing estimate " + job_label(site, t, probe, key));
      worst = std::max(worst, std::abs(it->second.mean));
    }
  return worst;
}

// ---------------------------------------------------------------- closeness

CoefficientError coefficient_error(const HamiltonianSpec& h1, const HamiltonianSpec& h2) {
  if (h1.size() != h2.size()) throw MalformedInput("coefficient_error: term sets differ");
  CoefficientError e;
  for (const Term& t : h1.terms()) {
    auto pos = h2.position(t.id);
    if (!pos || !h2.term(*pos).pauli.same_letters(t.pauli)) throw MalformedInput("coefficient_error: term sets differ");
    const double d = std::abs(t.coefficient - h2.term(*pos).coefficient);
    e.per_term[t.id] = d;
    e.max = std::max(e.max, d);
  }
  return e;
}

double local_closeness_lhs(const HamiltonianSpec& h1, const HamiltonianSpec& h2, int site) {
  const int n = h1.num_sites();
  const Matrix diff = to_dense(h1) - to_dense(h2);
  double s = 0.0;
  for (Pauli letter : {Pauli::X, Pauli::Y, Pauli::Z}) {
    const Matrix a = to_dense(PauliString({{site, letter}}), n);
    const double t = tau_norm(commutator(a, diff));
    s += t * t;
  }
  return s;
}

double local_closeness_rhs(const HamiltonianSpec& h1, const HamiltonianSpec& h2, int site) {
  coefficient_error(h1, h2);  // validates term sets
  double s = 0.0;
  for (std::size_t pos : h1.graph().terms_at_site(site)) {
    const Term& t = h1.term(pos);
    const double d = t.coefficient - h2.term(*h2.position(t.id)).coefficient;
    s += d * d;
  }
  return 8.0 * s;
}

// ---------------------------------------------------------------- candidate evaluation

namespace {

struct SiteProblem {
  int site = 0;
  SiteSet reg;
  std::vector<std::size_t> region;  // template positions, ascending
  std::vector<PauliAction> region_ops;
  std::vector<LocalTest> tests;
  std::vector<int> test_a;  // index into a_ops
  std::vector<PauliAction> a_ops;
  std::vector<PauliAction> od_ops;  // O^dag per test
  std::vector<Matrix> od_dense;
  std::vector<Matrix> a_dense;
  std::vector<SpectralPtr> net_probes;  // full-net mode
  KernelParams params;

  std::size_t probes() const { return 2 + net_probes.size(); }
  std::size_t slots() const { return tests.size() * probes(); }
};

using ProblemPtr = std::shared_ptr<const SiteProblem>;

Matrix region_hamiltonian(const SiteProblem& pr, const std::vector<double>& c) {
  const std::size_t dim = std::size_t{1} << pr.reg.size();
  Matrix k = Matrix::Zero(dim, dim);
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j] == 0.0) continue;
    const PauliAction& act = pr.region_ops[j];
    for (std::size_t col = 0; col < dim; ++col) k(col ^ act.xmask, col) += c[j] * act.amp[col];
  }
  return k;
}

// Q values (rho given) or Q operators (ops given) for every slot of one
// candidate; slot = test * probes + probe.
void evaluate_candidate(const SiteProblem& pr, const std::vector<double>& coeffs, const Matrix* rho,
                        std::vector<cplx>* values, std::vector<Matrix>* ops) {
  const KernelParams& p = pr.params;
  const Matrix kmat = region_hamiltonian(pr, coeffs);
  Eigen::SelfAdjointEigenSolver<Matrix> es(kmat);
  if (es.info() != Eigen::Success) throw NumericalStateError("candidate diagonalization failed");
  const RealVector& k = es.eigenvalues();
  const Matrix& u = es.eigenvectors();
  const Matrix ud = u.adjoint();
  const Eigen::Index n = k.size();

  Eigen::MatrixXd gh(n, n), wp(n, n), wm(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index d = 0; d < n; ++d) {
      const double nu = k(c) - k(d);
      gh(c, d) = kernels::g_hat(p.beta * nu / 2.0);
      wp(c, d) = kernels::bohr_weight_plus(nu, p);
      wm(c, d) = kernels::bohr_weight_minus(nu, p);
    }
  const Eigen::MatrixXd ghp = gh.cwiseProduct(wp), ghm = gh.cwiseProduct(wm);

  const std::size_t np = pr.probes();
  if (values) values->assign(pr.slots(), cplx(0.0));
  if (ops) ops->assign(pr.slots(), Matrix());

  Matrix rt, r;
  if (rho) {
    rt = ud * (*rho) * u;
    r = gh.cast<cplx>().cwiseProduct(rt.transpose());
  }
  std::vector<Matrix> ot(pr.tests.size());
  for (std::size_t t = 0; t < pr.tests.size(); ++t) ot[t] = ud * pr.od_ops[t].apply_left(u);

  for (std::size_t ai = 0; ai < pr.a_ops.size(); ++ai) {
    const Matrix at = ud * pr.a_ops[ai].apply_left(u);
    const Matrix y1 = at.cwiseProduct(wp.cast<cplx>());
    const Matrix y2 = at.cwiseProduct(wm.cast<cplx>());
    const Matrix bp = at.cwiseProduct(ghp.cast<cplx>());
    const Matrix bm = at.cwiseProduct(ghm.cast<cplx>());
    Matrix zs, z0;
    if (rho) {
      zs = r * y1.transpose() - y2.transpose() * r;
      z0 = (bp * rt - rt * bm).transpose();
    }
    for (std::size_t t = 0; t < pr.tests.size(); ++t) {
      if (pr.test_a[t] != static_cast<int>(ai)) continue;
      const Matrix& o = ot[t];
      if (rho) {
        (*values)[t * np] = o.cwiseProduct(zs).sum();
        (*values)[t * np + 1] = o.cwiseProduct(z0).sum();
      }
      if (ops) {
        const Matrix qs = gh.cast<cplx>().cwiseProduct(o * y1 - y2 * o);
        (*ops)[t * np] = u * qs * ud;
        (*ops)[t * np + 1] = u * (o * bp - bm * o) * ud;
      }
    }
  }

  if (!pr.net_probes.empty()) {
    auto kspec = SpectralData::from_dense(kmat);
    const std::size_t dim = static_cast<std::size_t>(n);
    const Matrix dummy = Matrix::Identity(n, n) / static_cast<double>(dim);
    for (std::size_t t = 0; t < pr.tests.size(); ++t)
      for (std::size_t g = 0; g < pr.net_probes.size(); ++g) {
        QInputs in{pr.od_dense[t].adjoint(), pr.net_probes[g], pr.a_dense[pr.test_a[t]], kspec, rho ? *rho : dummy, p};
        const Matrix q = q_operator_frequency(in);
        if (rho) (*values)[t * np + 2 + g] = q.cwiseProduct(rho->transpose()).sum();
        if (ops) (*ops)[t * np + 2 + g] = q;
      }
  }
}

class CandidateBatch : public OperatorBatch {
 public:
  CandidateBatch(ProblemPtr pr, std::vector<double> c) : pr_(std::move(pr)), c_(std::move(c)) {}
  const SiteSet& support() const override { return pr_->reg; }
  std::size_t size() const override { return pr_->slots(); }
  std::vector<Matrix> assemble() const override {
    std::vector<Matrix> ops;
    evaluate_candidate(*pr_, c_, nullptr, nullptr, &ops);
    return ops;
  }
  std::vector<cplx> exact_values(const Matrix& rho) const override {
    std::vector<cplx> v;
    evaluate_candidate(*pr_, c_, &rho, &v, nullptr);
    return v;
  }

 private:
  ProblemPtr pr_;
  std::vector<double> c_;
};

ProblemPtr make_problem(const HamiltonianSpec& tmpl, int site, std::vector<std::size_t> region,
                        const KernelParams& params, bool joint) {
  auto pr = std::make_shared<SiteProblem>();
  pr->site = site;
  pr->params = params;
  std::sort(region.begin(), region.end());
  pr->region = std::move(region);
  for (int j : test_sites(tmpl, pr->region, site, joint)) {
    auto more = local_tests(tmpl, j);
    pr->tests.insert(pr->tests.end(), more.begin(), more.end());
  }
  if (pr->tests.empty()) throw DegeneracyError("site " + std::to_string(site + 1) + " has no informative tests");
  SiteSet reg{site};
  for (std::size_t pos : pr->region) reg = site_union(reg, tmpl.term(pos).pauli.support());
  for (const LocalTest& t : pr->tests) reg = site_union(reg, t.o.support());
  checked_dimension(static_cast<int>(reg.size()));
  pr->reg = reg;
  for (std::size_t pos : pr->region) pr->region_ops.push_back(pauli_action(tmpl.term(pos).pauli, reg));
  std::map<PauliString, int> a_index;
  for (const LocalTest& t : pr->tests) {
    auto [it, fresh] = a_index.emplace(t.a, static_cast<int>(pr->a_ops.size()));
    if (fresh) {
      pr->a_ops.push_back(pauli_action(t.a, reg));
      pr->a_dense.push_back(to_dense(t.a, reg));
    }
    pr->test_a.push_back(it->second);
    pr->od_ops.push_back(pauli_action(t.o.adjoint(), reg));
    pr->od_dense.push_back(to_dense(t.o.adjoint(), reg));
  }
  return pr;
}

struct Request {
  ProblemPtr problem;
  std::vector<double> coeffs;  // over problem->region
};

// Runs one measurement round and tracks copies of rho.
class Session {
 public:
  Session(const HiddenGibbsSystem& system, const LearnConfig& cfg) : system_(system), cfg_(cfg) {}

  // Q values per request, slot-ordered.
  std::vector<std::vector<cplx>> run(const std::vector<Request>& reqs, double precision) {
    std::vector<ObservableJob> jobs;
    std::vector<std::shared_ptr<const OperatorBatch>> batches;
    std::vector<std::string> labels;
    for (std::size_t b = 0; b < reqs.size(); ++b) {
      const SiteProblem& pr = *reqs[b].problem;
      batches.push_back(std::make_shared<CandidateBatch>(reqs[b].problem, reqs[b].coeffs));
      const std::string key = key_from(reqs[b].coeffs);
      std::vector<std::string> names = probe_names(cfg_, pr.net_probes.size());
      for (std::size_t t = 0; t < pr.tests.size(); ++t)
        for (std::size_t g = 0; g < pr.probes(); ++g) {
          jobs.push_back(ObservableJob{job_label(pr.site, pr.tests[t], names[g], key), pr.reg, b, t * pr.probes() + g});
          labels.push_back(jobs.back().label);
        }
    }
    MeasurementPlan plan = build_plan(std::move(jobs), std::move(batches), cfg_.mode == MeasureMode::shots ? cfg_.shots : 0,
                                      derive_seed(cfg_.seed, "round:" + std::to_string(rounds_)));
    plan.precision = precision;
    plan.p_fail = cfg_.p_fail;
    const bool account = cfg_.account_samples && cfg_.shots == 0;
    PlanResult res = run_plan(plan, system_.state(), cfg_.mode, account);
    samples_used_ += res.copies;
    samples_required_ += cfg_.mode == MeasureMode::shots || account ? res.copies_required : 0;
    q_evals_ += static_cast<long long>(labels.size());
    ++rounds_;
    chi_ = std::max(chi_, plan.chi);

    std::vector<std::vector<cplx>> out(reqs.size());
    std::size_t j = 0;
    for (std::size_t b = 0; b < reqs.size(); ++b) {
      out[b].resize(reqs[b].problem->slots());
      for (cplx& v : out[b]) v = res.estimates.at(labels[j++]).mean;
    }
    return out;
  }

  long long samples_used() const { return samples_used_; }
  long long samples_required() const { return samples_required_; }
  long long q_evals() const { return q_evals_; }
  int rounds() const { return rounds_; }

 private:
  const HiddenGibbsSystem& system_;
  const LearnConfig& cfg_;
  long long samples_used_ = 0, samples_required_ = 0, q_evals_ = 0;
  int rounds_ = 0;
  int chi_ = 0;
};

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (cplx z : v) m = std::max(m, std::abs(z));
  return m;
}

double sum_sq(const std::vector<cplx>& v) {
  double s = 0.0;
  for (cplx z : v) s += std::norm(z);
  return s;
}

// Argmin of max |Q| with the lexicographically first candidate kept on ties.
std::size_t argmin_score(const std::vector<std::vector<double>>& cands, const std::vector<std::vector<cplx>>& q) {
  std::size_t best = 0;
  double best_score = max_abs(q[0]);
  for (std::size_t c = 1; c < cands.size(); ++c) {
    const double s = max_abs(q[c]);
    if (s < best_score || (s == best_score && cands[c] < cands[best])) {
      best = c;
      best_score = s;
    }
  }
  return best;
}

// Internal units: coefficients scaled so that beta_used >= 1/d.
struct Units {
  double beta = 1.0;
  double scale = 1.0;
  bool rescaled = false;
};

Units units_for(const HiddenGibbsSystem& system, const LearnConfig& cfg) {
  if (std::abs(cfg.beta - system.beta()) > 1e-12 * std::max(1.0, system.beta()))
    throw MalformedInput("config beta differs from the beta of the supplied state");
  const int d = std::max(1, system.structure().graph().degree_bound());
  Units u;
  u.beta = cfg.beta;
  if (cfg.beta < 1.0 / d) {
    u.rescaled = true;
    u.scale = cfg.beta * d;
    u.beta = 1.0 / d;
  }
  return u;
}

struct SimpleOutcome {
  std::vector<double> coeffs;  // internal units, template order
  int ell = 0;
  KernelParams params;
};

std::vector<std::size_t> region_positions(const HamiltonianSpec& tmpl, const HamiltonianSpec& sub) {
  std::vector<std::size_t> out;
  for (const Term& t : sub.terms()) out.push_back(*tmpl.position(t.id));
  return out;
}

std::vector<double> lm_search(Session& session, const ProblemPtr& pr, const LearnConfig& cfg, double precision,
                              double fd_step) {
  const std::size_t m = pr->region.size();
  std::vector<double> x(m, 0.0);
  auto clamp = [](double v) { return std::clamp(v, -1.0, 1.0); };
  std::vector<cplx> rx = session.run({Request{pr, x}}, precision)[0];
  double cost = sum_sq(rx);
  double lambda = 1e-3;
  const bool exact = cfg.mode == MeasureMode::exact;
  const double stop_step = exact ? 1e-11 : fd_step / 4.0;
  for (int it = 0; it < cfg.lm_max_iterations && cost > 1e-30; ++it) {
    std::vector<Request> reqs;
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> xp = x;
      // Step inward at the upper boundary.
      xp[j] += (x[j] + fd_step <= 1.0) ? fd_step : -fd_step;
      reqs.push_back(Request{pr, xp});
    }
    auto cols = session.run(reqs, precision);
    const Eigen::Index nr = static_cast<Eigen::Index>(2 * rx.size());
    Eigen::MatrixXd jac(nr, static_cast<Eigen::Index>(m));
    Eigen::VectorXd r0(nr);
    for (std::size_t s = 0; s < rx.size(); ++s) {
      r0(2 * s) = rx[s].real();
      r0(2 * s + 1) = rx[s].imag();
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double h = reqs[j].coeffs[j] - x[j];
      for (std::size_t s = 0; s < rx.size(); ++s) {
        jac(2 * s, j) = (cols[j][s].real() - rx[s].real()) / h;
        jac(2 * s + 1, j) = (cols[j][s].imag() - rx[s].imag()) / h;
      }
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r0;
    bool accepted = false;
    double step_size = 0.0;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index j = 0; j < a.rows(); ++j) a(j, j) += lambda * std::max(jtj(j, j), 1e-12);
      const Eigen::VectorXd delta = a.ldlt().solve(-jtr);
      std::vector<double> xt(m);
      step_size = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        xt[j] = clamp(x[j] + delta(static_cast<Eigen::Index>(j)));
        step_size = std::max(step_size, std::abs(xt[j] - x[j]));
      }
      if (step_size == 0.0) break;
      std::vector<cplx> rt = session.run({Request{pr, xt}}, precision)[0];
      const double ct = sum_sq(rt);
      if (ct < cost) {
        x = std::move(xt);
        rx = std::move(rt);
        cost = ct;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted || step_size < stop_step) break;
  }
  return x;
}

SimpleOutcome simple_search(Session& session, const HiddenGibbsSystem& system, const LearnConfig& cfg, const Units& u,
                            double eps, double kappa) {
  const HamiltonianSpec& tmpl = system.structure();
  const InteractionGraph& g = tmpl.graph();
  LearnConfig kcfg = cfg;
  kcfg.beta = u.beta;
  SimpleOutcome out;
  out.params = learner_kernel(kcfg, eps, g.degree_bound());
  out.ell = cfg.ell > 0 ? cfg.ell : default_ell(u.beta, eps, g);
  const double precision = cfg.q_precision_factor * std::sqrt(u.beta) * eps;
  const EpsilonNet net = make_net(kappa);
  out.coeffs.assign(tmpl.size(), 0.0);
  std::vector<bool> recorded(tmpl.size(), false);

  // Sites with the same search region share one problem and its solution.
  std::vector<ProblemPtr> problems;
  std::vector<bool> exhaustive;
  std::vector<std::vector<int>> sites_of;
  std::map<std::vector<std::size_t>, std::size_t> by_region;
  for (int site = 0; site < tmpl.num_sites(); ++site) {
    if (g.terms_at_site(site).empty()) continue;
    auto region = region_positions(tmpl, truncate_to_radius(tmpl, {site}, out.ell));
    std::sort(region.begin(), region.end());
    if (cfg.joint_tests) {
      auto [it, fresh] = by_region.emplace(region, problems.size());
      if (!fresh) {
        sites_of[it->second].push_back(site);
        continue;
      }
    }
    const double count = std::pow(static_cast<double>(net.points.size()), static_cast<double>(region.size()));
    bool exh = cfg.strategy == SearchStrategy::exhaustive ||
               (cfg.strategy == SearchStrategy::automatic && count <= cfg.enumeration_cap);
    if (exh && count > cfg.enumeration_cap)
      throw BudgetError("site " + std::to_string(site + 1) + " needs " + std::to_string(count) +
                            " candidates; use a larger kappa or a smaller radius",
                        count);
    if (cfg.probes == ProbeSet::full_net && (!exh || count * count > cfg.enumeration_cap))
      throw BudgetError("full-net probes need " + std::to_string(count * count) + " evaluations at site " +
                            std::to_string(site + 1),
                        count * count);
    auto pr = std::const_pointer_cast<SiteProblem>(make_problem(tmpl, site, region, out.params, cfg.joint_tests));
    if (cfg.probes == ProbeSet::full_net) {
      CandidateEnumerator en(region.size(), net, cfg.enumeration_cap);
      std::vector<double> c;
      while (en.next(c)) pr->net_probes.push_back(SpectralData::from_dense(region_hamiltonian(*pr, c)));
    }
    problems.push_back(pr);
    exhaustive.push_back(exh);
    sites_of.push_back({site});
  }

  auto record = [&](std::size_t k, const std::vector<double>& best) {
    const SiteProblem& pr = *problems[k];
    for (int site : sites_of[k])
      for (std::size_t j = 0; j < pr.region.size(); ++j) {
        const std::size_t pos = pr.region[j];
        const auto& sup = tmpl.term(pos).pauli.support();
        if (recorded[pos] || !std::binary_search(sup.begin(), sup.end(), site)) continue;
        out.coeffs[pos] = best[j];
        recorded[pos] = true;
      }
  };

  // Exhaustive sites share plans, chunked to bound memory.
  constexpr std::size_t kJobsPerPlan = 1500000;
  std::vector<Request> pending;
  std::vector<std::size_t> owner;
  std::vector<std::vector<std::vector<double>>> cands(problems.size());
  std::vector<std::vector<std::vector<cplx>>> vals(problems.size());
  std::size_t pending_jobs = 0;
  auto flush = [&] {
    if (pending.empty()) return;
    auto q = session.run(pending, precision);
    for (std::size_t r = 0; r < pending.size(); ++r) vals[owner[r]].push_back(std::move(q[r]));
    pending.clear();
    owner.clear();
    pending_jobs = 0;
  };
  for (std::size_t k = 0; k < problems.size(); ++k) {
    if (!exhaustive[k]) continue;
    CandidateEnumerator en(problems[k]->region.size(), net, cfg.enumeration_cap);
    std::vector<double> c;
    while (en.next(c)) {
      cands[k].push_back(c);
      pending.push_back(Request{problems[k], c});
      owner.push_back(k);
      pending_jobs += problems[k]->slots();
      if (pending_jobs >= kJobsPerPlan) flush();
    }
  }
  flush();

  for (std::size_t k = 0; k < problems.size(); ++k) {
    const ProblemPtr& pr = problems[k];
    if (exhaustive[k]) {
      record(k, cands[k][argmin_score(cands[k], vals[k])]);
      continue;
    }
    const double fd = cfg.mode == MeasureMode::exact ? 1e-5 : std::max(kappa, 1e-3);
    const std::vector<double> x = lm_search(session, pr, cfg, precision, fd);
    // Box of net points around the local optimum on this site's terms.
    std::vector<std::vector<double>> choices(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const auto& sup = tmpl.term(pr->region[j]).pauli.support();
      const bool incident = std::any_of(sites_of[k].begin(), sites_of[k].end(),
                                        [&](int site) { return std::binary_search(sup.begin(), sup.end(), site); });
      if (incident) {
        auto [lo, hi] = net.bracket(x[j]);
        choices[j] = lo == hi ? std::vector<double>{lo} : std::vector<double>{lo, hi};
      } else {
        choices[j] = {net.nearest(x[j])};
      }
    }
    std::vector<std::vector<double>> box{{}};
    for (const auto& ch : choices) {
      std::vector<std::vector<double>> next;
      for (const auto& partial : box)
        for (double v : ch) {
          next.push_back(partial);
          next.back().push_back(v);
        }
      box = std::move(next);
    }
    std::vector<Request> reqs;
    for (const auto& c : box) reqs.push_back(Request{pr, c});
    auto q = session.run(reqs, precision);
    record(k, box[argmin_score(box, q)]);
  }
  return out;
}

void fill_truth(LearnReport& rep, const HiddenGibbsSystem& system) {
  const HamiltonianSpec& truth = system.truth();
  rep.ids = truth.ids();
  rep.paulis.clear();
  for (const Term& t : truth.terms()) rep.paulis.push_back(t.pauli.to_string());
  rep.truth = truth.coefficients();
  rep.truth_error.resize(rep.truth.size());
  rep.max_error = 0.0;
  for (std::size_t j = 0; j < rep.truth.size(); ++j) {
    rep.truth_error[j] = std::abs(rep.learned[j] - rep.truth[j]);
    rep.max_error = std::max(rep.max_error, rep.truth_error[j]);
  }
}

double max_error_internal(const std::vector<double>& c, const HiddenGibbsSystem& system, const Units& u) {
  const auto truth = system.truth().coefficients();
  double m = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) m = std::max(m, std::abs(c[j] / u.scale - truth[j]));
  return m;
}

std::optional<PaperParameters> paper_report(const HiddenGibbsSystem& system, const LearnConfig& cfg, const Units& u) {
  if (!cfg.paper_constants) return std::nullopt;
  const auto& g = system.structure().graph();
  const int dim = static_cast<int>(system.structure().geometry().extents.size());
  return paper_parameters(*cfg.paper_constants, u.beta, cfg.epsilon * u.scale, std::max(1, g.degree_bound()),
                          std::max(1, g.locality_bound()), std::max(1, dim));
}

std::vector<double> iterate_internal(Session& session, const HiddenGibbsSystem& system, const LearnConfig& cfg,
                                     const Units& u, const std::vector<double>& h0, double eta, int& ell_used) {
  const HamiltonianSpec& tmpl = system.structure();
  const InteractionGraph& g = tmpl.graph();
  if (!tmpl.geometry().is_lattice()) throw ModeMismatch("the iterative learner needs a chain or lattice2d geometry");
  if (!(eta > 0.0)) throw RangeError("iterate_once: eta must be positive");
  LearnConfig kcfg = cfg;
  kcfg.beta = u.beta;
  const KernelParams params = learner_kernel(kcfg, eta, g.degree_bound());
  const int ell = cfg.ell > 0 ? cfg.ell : default_ell(u.beta, eta, g);
  ell_used = ell;
  const double precision = cfg.q_precision_factor * std::sqrt(u.beta) * eta;
  const EpsilonNet net = make_net(cfg.kappa0);

  struct SiteSearch {
    ProblemPtr pr;
    std::vector<std::size_t> searched;  // indices into pr->region
    std::vector<std::vector<double>> cands;
    std::size_t first = 0;
  };
  std::vector<SiteSearch> sites;
  std::vector<Request> reqs;
  for (int site = 0; site < tmpl.num_sites(); ++site) {
    if (g.terms_at_site(site).empty()) continue;
    const auto search = region_positions(tmpl, truncate_to_ball(tmpl, {site}, cfg.ell0));
    auto region = region_positions(tmpl, truncate_to_radius(tmpl, {site}, ell));
    for (std::size_t pos : search)
      if (std::find(region.begin(), region.end(), pos) == region.end()) region.push_back(pos);
    SiteSearch ss;
    ss.pr = make_problem(tmpl, site, region, params, false);
    for (std::size_t pos : search)
      ss.searched.push_back(std::lower_bound(ss.pr->region.begin(), ss.pr->region.end(), pos) - ss.pr->region.begin());
    std::sort(ss.searched.begin(), ss.searched.end());
    std::vector<double> base(ss.pr->region.size());
    for (std::size_t j = 0; j < base.size(); ++j) base[j] = h0[ss.pr->region[j]];
    CandidateEnumerator en(ss.searched.size(), net, cfg.enumeration_cap);
    std::vector<double> uvec;
    ss.first = reqs.size();
    while (en.next(uvec)) {
      std::vector<double> c = base;
      for (std::size_t j = 0; j < ss.searched.size(); ++j) c[ss.searched[j]] += eta * uvec[j];
      ss.cands.push_back(uvec);
      reqs.push_back(Request{ss.pr, std::move(c)});
    }
    sites.push_back(std::move(ss));
  }
  auto q = session.run(reqs, precision);

  std::vector<double> h1 = h0;
  std::vector<bool> recorded(h0.size(), false);
  for (const SiteSearch& ss : sites) {
    std::vector<std::vector<cplx>> sq(q.begin() + static_cast<std::ptrdiff_t>(ss.first),
                                      q.begin() + static_cast<std::ptrdiff_t>(ss.first + ss.cands.size()));
    const std::vector<double>& best = ss.cands[argmin_score(ss.cands, sq)];
    for (std::size_t j = 0; j < ss.searched.size(); ++j) {
      const std::size_t pos = ss.pr->region[ss.searched[j]];
      const auto& sup = tmpl.term(pos).pauli.support();
      if (recorded[pos] || !std::binary_search(sup.begin(), sup.end(), ss.pr->site)) continue;
      h1[pos] = std::clamp(h0[pos] + eta * best[j], -1.0, 1.0);
      recorded[pos] = true;
    }
  }
  return h1;
}

}  // namespace

LearnReport learn_simple(const HiddenGibbsSystem& system, const LearnConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Units u = units_for(system, cfg);
  Session session(system, cfg);
  SimpleOutcome res = simple_search(session, system, cfg, u, cfg.epsilon * u.scale, cfg.kappa);
  LearnReport rep;
  rep.algorithm = "simple";
  rep.config = cfg;
  for (double c : res.coeffs) rep.learned.push_back(c / u.scale);
  fill_truth(rep, system);
  rep.samples_used = session.samples_used();
  rep.samples_required = session.samples_required();
  rep.q_evals = session.q_evals();
  rep.rounds = session.rounds();
  rep.rescaled = u.rescaled;
  rep.beta_used = u.beta;
  rep.scale = u.scale;
  rep.ell = res.ell;
  rep.omega_cut = res.params.omega_cut;
  rep.sigma = res.params.sigma;
  IterationRecord r;
  r.eta = cfg.epsilon;
  r.max_error = rep.max_error;
  r.ratio_eta = rep.max_error / cfg.epsilon;
  r.samples = rep.samples_used;
  r.samples_required = rep.samples_required;
  r.q_evals = rep.q_evals;
  r.ell = res.ell;
  rep.history.push_back(r);
  rep.paper = paper_report(system, cfg, u);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

HamiltonianSpec iterate_once(const HiddenGibbsSystem& system, const HamiltonianSpec& h0, double eta,
                             const LearnConfig& cfg, IterationRecord* record) {
  cfg.validate();
  const Units u = units_for(system, cfg);
  if (u.rescaled) throw RangeError("iterate_once needs beta >= 1/d; learn_iterative rescales automatically");
  if (h0.size() != system.structure().size()) throw MalformedInput("iterate_once: h0 has a different term set");
  coefficient_error(h0, system.structure());
  if (cfg.check_promise) {
    const CoefficientError e = coefficient_error(h0, system.truth());
    if (e.max > eta * (1.0 + 1e-9))
      throw ContractViolation("iterate_once: initial guess is off by " + std::to_string(e.max) + " > eta = " +
                              std::to_string(eta));
  }
  Session session(system, cfg);
  int ell = 0;
  std::vector<double> h1 = iterate_internal(session, system, cfg, u, h0.coefficients(), eta, ell);
  if (record) {
    *record = IterationRecord{};
    record->eta = eta;
    record->max_error = max_error_internal(h1, system, u);
    record->ratio_eta = record->max_error / eta;
    record->samples = session.samples_used();
    record->samples_required = session.samples_required();
    record->q_evals = session.q_evals();
    record->ell = ell;
  }
  return h0.with_coefficients(h1);
}

LearnReport learn_iterative(const HiddenGibbsSystem& system, const LearnConfig& cfg) {
  cfg.validate();
  if (!system.structure().geometry().is_lattice())
    throw ModeMismatch("the iterative learner needs a chain or lattice2d geometry");
  const auto t0 = std::chrono::steady_clock::now();
  const Units u = units_for(system, cfg);
  const double eps = cfg.epsilon * u.scale;
  const double eta0 = std::max(cfg.eta0, eps);
  Session session(system, cfg);
  LearnReport rep;
  rep.algorithm = "iterative";
  rep.config = cfg;

  SimpleOutcome coarse = simple_search(session, system, cfg, u, eta0, eta0 / 2.0);
  std::vector<double> h = coarse.coeffs;
  auto push = [&](int iteration, double eta, int ell) {
    IterationRecord r;
    r.iteration = iteration;
    r.eta = eta / u.scale;
    r.max_error = max_error_internal(h, system, u);
    r.ratio = rep.history.empty() || rep.history.back().max_error == 0.0 ? 0.0 : r.max_error / rep.history.back().max_error;
    r.ratio_eta = r.max_error * u.scale / eta;
    r.samples = session.samples_used();
    r.samples_required = session.samples_required();
    r.q_evals = session.q_evals();
    r.ell = ell;
    rep.history.push_back(r);
  };
  push(0, eta0, coarse.ell);
  double eta = eta0;
  int iteration = 0;
  while (eta > eps * (1.0 + 1e-12)) {
    int ell = 0;
    h = iterate_internal(session, system, cfg, u, h, eta, ell);
    push(++iteration, eta, ell);
    eta /= 2.0;
  }
  for (double c : h) rep.learned.push_back(c / u.scale);
  fill_truth(rep, system);
  rep.iterations = iteration;
  rep.samples_used = session.samples_used();
  rep.samples_required = session.samples_required();
  rep.q_evals = session.q_evals();
  rep.rounds = session.rounds();
  rep.rescaled = u.rescaled;
  rep.beta_used = u.beta;
  rep.scale = u.scale;
  rep.ell = rep.history.back().ell;
  LearnConfig kcfg = cfg;
  kcfg.beta = u.beta;
  const KernelParams p = learner_kernel(kcfg, eps, system.structure().graph().degree_bound());
  rep.omega_cut = p.omega_cut;
  rep.sigma = p.sigma;
  rep.paper = paper_report(system, cfg, u);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace gibbslearn
