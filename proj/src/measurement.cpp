#include "gibbslearn/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/parallel.hpp"
#include "gibbslearn/random.hpp"

namespace gibbslearn {

std::vector<cplx> OperatorBatch::exact_values(const Matrix& rho) const {
  std::vector<cplx> out;
  for (const Matrix& q : assemble()) out.push_back((q.cwiseProduct(rho.transpose())).sum());
  return out;
}

std::string to_string(MeasureMode m) { return m == MeasureMode::exact ? "exact" : "shots"; }

std::pair<Matrix, Matrix> hermitian_split(const Matrix& q) {
  Matrix qd = q.adjoint();
  Matrix h1 = 0.5 * (q + qd);
  Matrix h2 = cplx(0.0, -0.5) * (q - qd);
  return {h1, h2};
}

namespace {

struct Outcomes {
  RealVector values;
  std::vector<double> probs;
};

Outcomes born_distribution(const Matrix& h_obs, const Matrix& rho) {
  const double scale = std::max(1.0, h_obs.cwiseAbs().maxCoeff());
  if (hermiticity_defect(h_obs) > 1e-9 * scale) throw ConsistencyError("sample_expectation: observable is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h_obs);
  const Matrix& v = es.eigenvectors();
  Matrix rv = rho * v;
  Outcomes out;
  out.values = es.eigenvalues();
  out.probs.resize(v.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    double p = (v.col(j).adjoint() * rv.col(j))(0, 0).real();
    if (p < -1e-10) throw NumericalStateError("sample_expectation: negative Born probability " + std::to_string(p));
    p = std::max(p, 0.0);
    out.probs[j] = p;
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) throw NumericalStateError("sample_expectation: Born probabilities sum to " + std::to_string(total));
  for (double& p : out.probs) p /= total;
  return out;
}

ShotEstimate draw(const Outcomes& o, long long shots, std::uint64_t seed) {
  if (shots < 1) throw RangeError("sample_expectation: shots must be >= 1");
  std::vector<double> cdf(o.probs.size());
  std::partial_sum(o.probs.begin(), o.probs.end(), cdf.begin());
  cdf.back() = 1.0;
  std::vector<long long> counts(cdf.size(), 0);
  Rng rng(seed);
  for (long long s = 0; s < shots; ++s) {
    const double u = rng.uniform01();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t k = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
    // Skip zero-probability outcomes that upper_bound can land on at ties.
    while (o.probs[k] == 0.0 && k + 1 < cdf.size()) ++k;
    ++counts[k];
  }
  double mean = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) mean += static_cast<double>(counts[k]) * o.values[k];
  mean /= static_cast<double>(shots);
  double ss = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) ss += static_cast<double>(counts[k]) * std::pow(o.values[k] - mean, 2);
  const double var = shots > 1 ? ss / static_cast<double>(shots - 1) : 0.0;
  return ShotEstimate{cplx(mean, 0.0), shots, std::sqrt(var / static_cast<double>(shots))};
}

}  // namespace

ShotEstimate sample_expectation(const Matrix& h_obs, const Matrix& rho, long long shots, std::uint64_t seed) {
  if (shots < 1) throw RangeError("sample_expectation: shots must be >= 1");
  return draw(born_distribution(h_obs, rho), shots, seed);
}

ShotEstimate sample_expectation(const Matrix& h_obs, const GibbsState& rho, long long shots, std::uint64_t seed) {
  return sample_expectation(h_obs, rho.rho(), shots, seed);
}

long long hoeffding_shots(double range, double eps, double delta) {
  if (!(eps > 0.0) || !(delta > 0.0) || delta >= 1.0) throw RangeError("hoeffding_shots: need eps > 0 and delta in (0,1)");
  if (range <= 0.0) return 0;
  const double n = range * range * std::log(4.0 / delta) / (eps * eps);
  if (n > 9e18) throw BudgetError("hoeffding_shots: shot count overflows", n);
  return std::max<long long>(1, static_cast<long long>(std::ceil(n)));
}

namespace {

// Smallest free colour >= c at one site, with path compression.
class FreeColours {
 public:
  int find(int c) {
    int root = c;
    while (root < static_cast<int>(next_.size()) && next_[root] != root) root = next_[root];
    while (c < static_cast<int>(next_.size()) && next_[c] != c) {
      int up = next_[c];
      next_[c] = root;
      c = up;
    }
    return root;
  }
  void take(int c) {
    const int old = static_cast<int>(next_.size());
    if (c + 2 > old) {
      next_.resize(c + 2);
      std::iota(next_.begin() + old, next_.end(), old);
    }
    next_[c] = c + 1;
  }

 private:
  std::vector<int> next_;
};

}  // namespace

MeasurementPlan build_plan(std::vector<ObservableJob> jobs, std::vector<std::shared_ptr<const OperatorBatch>> batches,
                           long long shots_per_job, std::uint64_t seed) {
  MeasurementPlan plan;
  std::map<int, FreeColours> sites;
  std::vector<int> colour(jobs.size(), 0);
  int chi = 0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const ObservableJob& job = jobs[j];
    if (job.batch >= batches.size() || job.slot >= batches[job.batch]->size())
      throw MalformedInput("build_plan: job '" + job.label + "' refers to a missing batch slot");
    int c = 0;
    for (bool moved = true; moved;) {
      moved = false;
      for (int s : job.support) {
        const int f = sites[s].find(c);
        if (f != c) {
          c = f;
          moved = true;
        }
      }
    }
    for (int s : job.support) sites[s].take(c);
    colour[j] = c;
    chi = std::max(chi, c + 1);
  }
  plan.groups.assign(chi, {});
  for (std::size_t j = 0; j < jobs.size(); ++j) plan.groups[colour[j]].push_back(j);
  plan.chi = chi;
  plan.jobs = std::move(jobs);
  plan.batches = std::move(batches);
  plan.shots_per_job = shots_per_job;
  plan.seed = seed;
  return plan;
}

namespace {

struct JobOutcome {
  ShotEstimate estimate;
  long long planned = 0;  // copies under the shots policy
};

double eigen_range(const Matrix& h) {
  if (h.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
}

bool is_zero(const Matrix& h) { return h.size() == 0 || h.cwiseAbs().maxCoeff() <= 1e-14; }

}  // namespace

PlanResult run_plan(const MeasurementPlan& plan, const GibbsState& rho, MeasureMode mode, bool account) {
  const std::size_t njobs = plan.jobs.size();
  std::vector<std::vector<std::size_t>> by_batch(plan.batches.size());
  for (std::size_t j = 0; j < njobs; ++j) by_batch[plan.jobs[j].batch].push_back(j);
  const bool policy = plan.shots_per_job <= 0;
  const bool need_ops = mode == MeasureMode::shots || account;
  if (need_ops && policy && !(plan.precision > 0.0))
    throw MalformedInput("run_plan: shots policy needs a positive precision");
  const double delta = plan.p_fail / static_cast<double>(std::max<std::size_t>(1, njobs));

  std::mutex cache_mu;
  std::map<SiteSet, std::shared_ptr<const Matrix>> reduced;
  auto reduced_for = [&](const SiteSet& s) {
    {
      std::lock_guard<std::mutex> lk(cache_mu);
      auto it = reduced.find(s);
      if (it != reduced.end()) return it->second;
    }
    auto m = std::make_shared<const Matrix>(rho.reduced(s));
    std::lock_guard<std::mutex> lk(cache_mu);
    return reduced.emplace(s, m).first->second;
  };

  std::vector<JobOutcome> out(njobs);
  parallel_for(plan.batches.size(), [&](std::size_t b) {
    if (by_batch[b].empty()) return;
    const OperatorBatch& batch = *plan.batches[b];
    auto r = reduced_for(batch.support());
    if (!need_ops) {
      std::vector<cplx> vals = batch.exact_values(*r);
      for (std::size_t j : by_batch[b]) out[j].estimate = ShotEstimate{vals[plan.jobs[j].slot], 1, 0.0};
      return;
    }
    std::vector<Matrix> ops = batch.assemble();
    for (std::size_t j : by_batch[b]) {
      const ObservableJob& job = plan.jobs[j];
      const Matrix& q = ops[job.slot];
      auto [h1, h2] = hermitian_split(q);
      const bool z1 = is_zero(h1), z2 = is_zero(h2);
      long long n1 = 0, n2 = 0;
      if (policy) {
        n1 = z1 ? 0 : hoeffding_shots(eigen_range(h1), plan.precision, delta);
        n2 = z2 ? 0 : hoeffding_shots(eigen_range(h2), plan.precision, delta);
      } else {
        const long long total = plan.shots_per_job;
        if (!z1 && !z2) {
          n1 = (total + 1) / 2;
          n2 = std::max<long long>(1, total / 2);
        } else if (!z1) {
          n1 = total;
        } else if (!z2) {
          n2 = total;
        }
      }
      JobOutcome& o = out[j];
      o.planned = policy ? n1 + n2 : plan.shots_per_job;
      if (mode == MeasureMode::exact) {
        o.estimate = ShotEstimate{(q.cwiseProduct(r->transpose())).sum(), 1, 0.0};
        continue;
      }
      cplx mean(0.0, 0.0);
      double var = 0.0;
      if (n1 > 0) {
        ShotEstimate e = sample_expectation(h1, *r, n1, derive_seed(plan.seed, job.label + "#re"));
        mean += e.mean.real();
        var += e.std_error * e.std_error;
      }
      if (n2 > 0) {
        ShotEstimate e = sample_expectation(h2, *r, n2, derive_seed(plan.seed, job.label + "#im"));
        mean += cplx(0.0, e.mean.real());
        var += e.std_error * e.std_error;
      }
      o.estimate = ShotEstimate{mean, std::max<long long>(1, o.planned), std::sqrt(var)};
    }
  });

  PlanResult res;
  res.group_of.assign(njobs, 0);
  res.job_shots.assign(njobs, 0);
  for (std::size_t g = 0; g < plan.groups.size(); ++g) {
    long long worst = 0;
    for (std::size_t j : plan.groups[g]) {
      res.group_of[j] = static_cast<int>(g);
      worst = std::max(worst, out[j].planned);
    }
    res.copies_required += worst;
  }
  res.copies = mode == MeasureMode::shots ? res.copies_required : 0;
  for (std::size_t j = 0; j < njobs; ++j) {
    res.job_shots[j] = out[j].planned;
    res.estimates[plan.jobs[j].label] = out[j].estimate;
  }
  return res;
}

void write_transcript_csv(const std::string& path, const MeasurementPlan& plan, const PlanResult& result) {
  std::ofstream f(path);
  if (!f) throw ResourceError("cannot open transcript file " + path);
  f << "label,group,shots,mean_re,mean_im,std_error\n" << std::setprecision(17);
  for (std::size_t j = 0; j < plan.jobs.size(); ++j) {
    const std::string& label = plan.jobs[j].label;
    const ShotEstimate& e = result.estimates.at(label);
    f << '"' << label << "\"," << result.group_of[j] << ',' << result.job_shots[j] << ',' << e.mean.real() << ','
      << e.mean.imag() << ',' << e.std_error << '\n';
  }
}

}  // namespace gibbslearn
