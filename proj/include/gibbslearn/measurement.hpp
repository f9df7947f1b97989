#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gibbslearn/dense.hpp"
#include "gibbslearn/spectral.hpp"

namespace gibbslearn {

// A family of observables on one register, assembled together because they
// share expensive setup (for instance one candidate Hamiltonian).
class OperatorBatch {
 public:
  virtual ~OperatorBatch() = default;
  virtual const SiteSet& support() const = 0;
  virtual std::size_t size() const = 0;
  // Q_op for every slot, as matrices on support().
  virtual std::vector<Matrix> assemble() const = 0;
  // Tr[Q_op rho] for every slot given the reduced state on support().
  virtual std::vector<cplx> exact_values(const Matrix& rho) const;
};

class DenseBatch : public OperatorBatch {
 public:
  DenseBatch(SiteSet support, std::vector<Matrix> ops) : support_(std::move(support)), ops_(std::move(ops)) {}
  const SiteSet& support() const override { return support_; }
  std::size_t size() const override { return ops_.size(); }
  std::vector<Matrix> assemble() const override { return ops_; }

 private:
  SiteSet support_;
  std::vector<Matrix> ops_;
};

struct ObservableJob {
  std::string label;
  SiteSet support;
  std::size_t batch = 0;
  std::size_t slot = 0;
};

struct MeasurementPlan {
  std::vector<ObservableJob> jobs;
  std::vector<std::shared_ptr<const OperatorBatch>> batches;
  std::vector<std::vector<std::size_t>> groups;  // job indices with disjoint supports
  int chi = 0;
  // Copies of rho per job. Zero selects the precision policy below.
  long long shots_per_job = 0;
  double precision = 0.0;  // target |Q_exp - Q| per job
  double p_fail = 0.1;
  std::uint64_t seed = 0;
};

struct ShotEstimate {
  cplx mean;
  long long shots = 0;
  double std_error = 0.0;
};

enum class MeasureMode { exact, shots };
std::string to_string(MeasureMode m);

struct PlanResult {
  std::map<std::string, ShotEstimate> estimates;
  // Copies of rho consumed: sum over groups of the largest job cost.
  long long copies = 0;
  // Copies the shots policy would use; equals `copies` in shots mode.
  long long copies_required = 0;
  std::vector<int> group_of;  // per job
  std::vector<long long> job_shots;
};

// (H1, H2) Hermitian with q = H1 + i H2.
std::pair<Matrix, Matrix> hermitian_split(const Matrix& q);

// Born-rule sampling of a Hermitian observable against rho.
ShotEstimate sample_expectation(const Matrix& h_obs, const Matrix& rho, long long shots, std::uint64_t seed);
ShotEstimate sample_expectation(const Matrix& h_obs, const GibbsState& rho, long long shots, std::uint64_t seed);

// Hoeffding shot count for a Hermitian part with eigenvalue range `range`
// so that the complex estimate is within eps with probability 1 - delta.
long long hoeffding_shots(double range, double eps, double delta);

// Greedy colouring of the support-overlap graph.
MeasurementPlan build_plan(std::vector<ObservableJob> jobs, std::vector<std::shared_ptr<const OperatorBatch>> batches,
                           long long shots_per_job, std::uint64_t seed);

// With `account` set, exact mode still evaluates the shots policy so that
// copies_required is reported.
PlanResult run_plan(const MeasurementPlan& plan, const GibbsState& rho, MeasureMode mode, bool account = false);

void write_transcript_csv(const std::string& path, const MeasurementPlan& plan, const PlanResult& result);

}  // namespace gibbslearn
