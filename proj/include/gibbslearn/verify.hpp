#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gibbslearn/io.hpp"

namespace gibbslearn {

enum class Suite { oft, identifiability, kms, lieb_robinson, kernels };
std::string to_string(Suite s);
// "all" expands to every suite; an empty selection is a MalformedInput.
std::vector<Suite> parse_suites(const std::vector<std::string>& names);

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::vector<int> sizes{2, 3, 4};
  std::vector<double> betas{0.5, 1.0, 2.0};
  int instances = 20;
  // Chain length for the truncation sweep.
  int lr_sites = 6;
};

// One named property over a batch of seeded instances. For equalities the
// residual is the worst deviation; for inequalities it is the worst
// left/right ratio and the tolerance is the allowed ratio.
struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double tolerance = 0.0;
  int instances = 0;
};

// Seeded random instance: chain of n sites with a random Hamiltonian H and
// unit-norm random operators.
struct RandomInstance {
  int n = 0;
  double beta = 1.0;
  HamiltonianSpec h;
  HamiltonianSpec h_other;  // same structure, fresh coefficients
  HamiltonianSpec g;        // unrelated random Hamiltonian
  Matrix o, a;
};
RandomInstance random_instance(const VerifyOptions& opt, int k);

CheckResult check_ground_truth_vanishing(const VerifyOptions& opt);
CheckResult check_identity_closure(const VerifyOptions& opt);
CheckResult check_cross_path(const VerifyOptions& opt);
std::vector<CheckResult> check_oft_identities(const VerifyOptions& opt);
CheckResult check_kms_faithfulness(const VerifyOptions& opt);
CheckResult check_local_closeness(const VerifyOptions& opt);
std::vector<CheckResult> check_lieb_robinson(const VerifyOptions& opt);

std::vector<CheckResult> run_suite(Suite s, const VerifyOptions& opt);
std::vector<CheckResult> run_verify(const std::vector<Suite>& suites, const VerifyOptions& opt);
Json verify_report_json(const std::vector<Suite>& suites, const VerifyOptions& opt,
                        const std::vector<CheckResult>& checks);

}  // namespace gibbslearn
