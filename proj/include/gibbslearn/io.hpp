#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gibbslearn/hamiltonian.hpp"
#include "gibbslearn/learner.hpp"

namespace gibbslearn {

using Json = nlohmann::ordered_json;

// Version written into every config and report; readers reject others.
constexpr int kSchemaVersion = 1;

void require_schema(const Json& j, const std::string& what);

Json to_json(const GeometrySpec& g);
GeometrySpec geometry_from_json(const Json& j);

// {"schema_version", "geometry", "terms": [{"pauli": "X1 Z2", "coefficient": c}]}
Json to_json(const HamiltonianSpec& h);
HamiltonianSpec hamiltonian_from_json(const Json& j);

Json to_json(const LearnConfig& c);
// Missing keys keep the values of `base`; unknown keys are rejected.
LearnConfig learn_config_from_json(const Json& j, LearnConfig base = {});

// The "timestamp" member is the only non-deterministic part.
Json to_json(const LearnReport& r, bool with_timestamp = true);
LearnReport report_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
void write_json_file(const std::string& path, const Json& j);

// term_id, pauli_string, learned, truth, abs_error
std::string report_csv(const LearnReport& r);
// Error and copies of rho per iteration.
std::string plot_csv(const LearnReport& r);

struct AggregateRow {
  std::string algorithm;
  std::string mode;
  double beta = 0.0;
  double epsilon = 0.0;
  int runs = 0;
  double success_rate = 0.0;  // fraction with max_error <= epsilon
  double mean_max_error = 0.0;
  double mean_samples_used = 0.0;
  double mean_samples_required = 0.0;
  double mean_q_evals = 0.0;
};

struct TrendRow {
  std::string algorithm;
  std::string mode;
  double beta = 0.0;
  int points = 0;
  // Least-squares slope of log(samples) against log(1/epsilon).
  double slope = 0.0;
};

std::vector<AggregateRow> aggregate_reports(const std::vector<LearnReport>& reports);
std::vector<TrendRow> sample_trends(const std::vector<AggregateRow>& rows);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::string trend_csv(const std::vector<TrendRow>& rows);

// Slope of the least-squares line through (x, y).
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gibbslearn
