#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gibbslearn/hamiltonian.hpp"
#include "gibbslearn/kernels.hpp"
#include "gibbslearn/measurement.hpp"
#include "gibbslearn/spectral.hpp"

namespace gibbslearn {

struct EpsilonNet {
  double kappa = 1.0;
  std::vector<double> points;  // sorted

  double nearest(double x) const;
  // Largest point <= x and smallest point >= x (clamped to the ends).
  std::pair<double, double> bracket(double x) const;
};

// ceil(2 / kappa) + 1 evenly spaced points on [-1, 1]; kappa = 2 gives {-1, 1}.
EpsilonNet make_net(double kappa);

// Lexicographic walk over net^|region| (last coordinate fastest).
class CandidateEnumerator {
 public:
  CandidateEnumerator(std::size_t region_size, const EpsilonNet& net, double cap);
  double count() const { return count_; }
  bool next(std::vector<double>& out);
  void reset();

 private:
  std::size_t size_;
  const EpsilonNet* net_;
  double count_;
  std::vector<std::size_t> idx_;
  bool started_ = false, done_ = false;
};

// Throws BudgetError if |net|^|region| exceeds cap.
CandidateEnumerator enumerate_candidates(const HamiltonianSpec& h_template, const std::vector<TermId>& region,
                                         const EpsilonNet& net, double cap = 2e5);

enum class SearchStrategy { automatic, exhaustive, local };
enum class ProbeSet { reduced, full_net };
std::string to_string(SearchStrategy s);
std::string to_string(ProbeSet p);

// Exponent 200 in the auxiliary constant alpha; the final conversion step
// uses 100. Both are reported.
constexpr double kAlphaExponentCondition = 200.0;
constexpr double kAlphaExponentProof = 100.0;

struct PaperConstants {
  double c1 = 1.0, c2 = 1.0, c3 = 1.0;
};

// Parameter values from the printed conditions, all in log form where
// they overflow double.
struct PaperParameters {
  double log_alpha = 0.0;
  double log_alpha_proof = 0.0;
  double omega_cut = 0.0;
  double ell = 0.0;
  double log_kappa = 0.0;
  double omega_cut_iterative = 0.0;
  double ell0 = 0.0;
  double log_kappa0 = 0.0;
};
PaperParameters paper_parameters(const PaperConstants& c, double beta, double epsilon, int degree, int locality,
                                 int dimension);

struct LearnConfig {
  double beta = 1.0;
  double epsilon = 0.1;
  int ell = 0;              // measurement radius; 0 selects the default formula
  int ell0 = 2;             // search radius of the iterative step
  double omega_cut = 0.0;   // 0 selects the default formula
  double kappa = 0.05;
  double kappa0 = 0.25;
  double eta0 = 0.2;
  MeasureMode mode = MeasureMode::exact;
  long long shots = 0;      // fixed copies per job in shots mode; 0 uses the precision policy
  double q_precision_factor = 0.1;   // target |Q_exp - Q| = factor sqrt(beta) epsilon
  double p_fail = 0.1;
  std::uint64_t seed = 1;
  SearchStrategy strategy = SearchStrategy::automatic;
  ProbeSet probes = ProbeSet::reduced;
  double enumeration_cap = 2e5;
  int lm_max_iterations = 60;
  bool account_samples = false;  // exact mode: still evaluate the shots policy
  bool check_promise = false;    // iterative step: compare h0 against known truth
  // Score candidates with the tests of every site whose incident terms all
  // lie in the search region, not only the centre site.
  bool joint_tests = true;
  std::optional<PaperConstants> paper_constants;

  void validate() const;
};

// Measurement radius and kernel used for target precision eps on graph g.
int default_ell(double beta, double eps, const InteractionGraph& g);
KernelParams learner_kernel(const LearnConfig& cfg, double eps, int degree);

// The learner only sees the Hamiltonian's structure and copies of rho.
class HiddenGibbsSystem {
 public:
  HiddenGibbsSystem(HamiltonianSpec truth, double beta);
  // Terms with zeroed coefficients.
  const HamiltonianSpec& structure() const { return structure_; }
  const GibbsState& state() const { return state_; }
  double beta() const { return state_.beta(); }
  // Ground truth, for reports only.
  const HamiltonianSpec& truth() const { return truth_; }

 private:
  HamiltonianSpec truth_;
  HamiltonianSpec structure_;
  GibbsState state_;
};

struct IterationRecord {
  int iteration = 0;  // 0 is the coarse phase
  double eta = 0.0;        // input error radius (target epsilon for the coarse phase)
  double max_error = 0.0;  // after this iteration
  double ratio = 0.0;      // max_error / previous max_error
  double ratio_eta = 0.0;  // max_error / eta
  long long samples = 0;
  long long samples_required = 0;
  long long q_evals = 0;
  int ell = 0;
};

struct LearnReport {
  std::string algorithm;  // "simple" | "iterative"
  std::vector<TermId> ids;
  std::vector<std::string> paulis;
  std::vector<double> learned;
  std::vector<double> truth;
  std::vector<double> truth_error;
  double max_error = 0.0;
  long long samples_used = 0;
  long long samples_required = 0;
  long long q_evals = 0;
  int rounds = 0;
  int iterations = 0;
  double wall_time_s = 0.0;
  bool rescaled = false;
  double beta_used = 0.0;
  double scale = 1.0;  // learned = internal / scale
  int ell = 0;
  double omega_cut = 0.0;
  double sigma = 0.0;
  std::vector<IterationRecord> history;
  LearnConfig config;
  std::optional<PaperParameters> paper;

  HamiltonianSpec as_spec(const HamiltonianSpec& structure) const;
};

// (A, gamma) pairs at a site with [A, P_gamma] != 0, and O = [A, P_gamma] / 2.
struct LocalTest {
  Pauli a_letter = Pauli::X;
  TermId gamma;
  PauliString a;
  PauliString o;
};
std::vector<LocalTest> local_tests(const HamiltonianSpec& h, int site);

// Probe names that score_candidate requires for cfg.
std::vector<std::string> probe_names(const LearnConfig& cfg, std::size_t num_candidates = 0);
std::string candidate_key(const HamiltonianSpec& k_candidate);
std::string job_label(int site, const LocalTest& t, const std::string& probe, const std::string& key);

// Sites whose tests score a candidate for `site` on the region (template
// positions): the site itself, plus with joint tests every site whose
// incident terms all lie in the region.
std::vector<int> test_sites(const HamiltonianSpec& h_template, const std::vector<std::size_t>& region, int site,
                            bool joint);

// max |Q_exp| over the tests at `sites` (default: {site}) and the probes for cfg.
double score_candidate(const HamiltonianSpec& k_candidate, int site, const LearnConfig& cfg,
                       const std::map<std::string, ShotEstimate>& estimates, std::size_t num_candidates = 0,
                       const std::vector<int>& sites = {});

LearnReport learn_simple(const HiddenGibbsSystem& system, const LearnConfig& cfg);
HamiltonianSpec iterate_once(const HiddenGibbsSystem& system, const HamiltonianSpec& h0, double eta,
                             const LearnConfig& cfg, IterationRecord* record = nullptr);
LearnReport learn_iterative(const HiddenGibbsSystem& system, const LearnConfig& cfg);

struct CoefficientError {
  std::map<TermId, double> per_term;
  double max = 0.0;
};
CoefficientError coefficient_error(const HamiltonianSpec& h1, const HamiltonianSpec& h2);
// sum over a in {X, Y, Z} of ||[A^a_i, H1 - H2]||_tau^2, from dense matrices.
double local_closeness_lhs(const HamiltonianSpec& h1, const HamiltonianSpec& h2, int site);
// 8 sum over terms touching i of (h1 - h2)^2.
double local_closeness_rhs(const HamiltonianSpec& h1, const HamiltonianSpec& h2, int site);

}  // namespace gibbslearn
