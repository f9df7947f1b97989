#include "gibbslearn/io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "gibbslearn/errors.hpp"

namespace gibbslearn {

void require_schema(const Json& j, const std::string& what) {
  if (!j.is_object()) throw SchemaError(what + ": expected a JSON object");
  if (!j.contains("schema_version")) throw SchemaError(what + ": missing schema_version");
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
    throw SchemaError(what + ": unsupported schema_version " + j["schema_version"].dump() + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
}

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& what) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw MalformedInput(what + ": unknown key '" + it.key() + "'");
}

}  // namespace

Json to_json(const GeometrySpec& g) {
  Json j;
  j["kind"] = to_string(g.kind);
  j["extents"] = g.extents;
  j["periodic"] = g.periodic;
  if (g.kind == GeometryKind::custom) j["sites"] = g.site_labels;
  return j;
}

GeometrySpec geometry_from_json(const Json& j) {
  if (!j.is_object()) throw MalformedInput("geometry must be an object");
  reject_unknown(j, {"kind", "extents", "periodic", "sites"}, "geometry");
  GeometrySpec g;
  g.kind = geometry_kind_from_string(get_or<std::string>(j, "kind", "chain"));
  g.periodic = get_or<bool>(j, "periodic", false);
  if (g.kind == GeometryKind::custom) {
    if (!j.contains("sites")) throw MalformedInput("custom geometry needs a 'sites' list");
    return GeometrySpec::custom(j["sites"].get<std::vector<std::string>>());
  }
  g.extents = get_or<std::vector<int>>(j, "extents", {});
  g.validate();
  return g;
}

Json to_json(const HamiltonianSpec& h) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["geometry"] = to_json(h.geometry());
  Json terms = Json::array();
  for (const Term& t : h.terms()) terms.push_back(Json{{"pauli", t.pauli.to_string()}, {"coefficient", t.coefficient}});
  j["terms"] = terms;
  return j;
}

HamiltonianSpec hamiltonian_from_json(const Json& j) {
  require_schema(j, "hamiltonian");
  reject_unknown(j, {"schema_version", "geometry", "terms"}, "hamiltonian");
  if (!j.contains("geometry") || !j.contains("terms")) throw MalformedInput("hamiltonian needs geometry and terms");
  const GeometrySpec g = geometry_from_json(j["geometry"]);
  std::vector<PauliString> paulis;
  std::vector<double> coeffs;
  for (const Json& t : j["terms"]) {
    if (!t.is_object() || !t.contains("pauli") || !t.contains("coefficient"))
      throw MalformedInput("each term needs 'pauli' and 'coefficient'");
    reject_unknown(t, {"pauli", "coefficient"}, "term");
    paulis.push_back(PauliString::parse(t["pauli"].get<std::string>()));
    if (!t["coefficient"].is_number()) throw MalformedInput("term coefficient must be a number");
    coeffs.push_back(t["coefficient"].get<double>());
  }
  return HamiltonianSpec::from_paulis(g, paulis, coeffs);
}

namespace {

SearchStrategy strategy_from_string(const std::string& s) {
  if (s == "automatic") return SearchStrategy::automatic;
  if (s == "exhaustive") return SearchStrategy::exhaustive;
  if (s == "local") return SearchStrategy::local;
  throw MalformedInput("unknown search strategy '" + s + "'");
}

ProbeSet probes_from_string(const std::string& s) {
  if (s == "reduced") return ProbeSet::reduced;
  if (s == "full_net") return ProbeSet::full_net;
  throw MalformedInput("unknown probe set '" + s + "'");
}

MeasureMode mode_from_string(const std::string& s) {
  if (s == "exact") return MeasureMode::exact;
  if (s == "shots") return MeasureMode::shots;
  throw MalformedInput("unknown measurement mode '" + s + "'");
}

}  // namespace

Json to_json(const LearnConfig& c) {
  Json j;
  j["beta"] = c.beta;
  j["epsilon"] = c.epsilon;
  j["ell"] = c.ell;
  j["ell0"] = c.ell0;
  j["omega_cut"] = c.omega_cut;
  j["kappa"] = c.kappa;
  j["kappa0"] = c.kappa0;
  j["eta0"] = c.eta0;
  j["mode"] = to_string(c.mode);
  j["shots"] = c.shots;
  j["q_precision_factor"] = c.q_precision_factor;
  j["p_fail"] = c.p_fail;
  j["seed"] = c.seed;
  j["strategy"] = to_string(c.strategy);
  j["probes"] = to_string(c.probes);
  j["enumeration_cap"] = c.enumeration_cap;
  j["lm_max_iterations"] = c.lm_max_iterations;
  j["account_samples"] = c.account_samples;
  j["check_promise"] = c.check_promise;
  j["joint_tests"] = c.joint_tests;
  if (c.paper_constants) j["paper_constants"] = {c.paper_constants->c1, c.paper_constants->c2, c.paper_constants->c3};
  return j;
}

LearnConfig learn_config_from_json(const Json& j, LearnConfig c) {
  if (!j.is_object()) throw MalformedInput("learn config must be an object");
  reject_unknown(j,
                 {"beta", "epsilon", "ell", "ell0", "omega_cut", "kappa", "kappa0", "eta0", "mode", "shots",
                  "q_precision_factor", "p_fail", "seed", "strategy", "probes", "enumeration_cap", "lm_max_iterations",
                  "account_samples", "check_promise", "joint_tests", "paper_constants", "algorithm"},
                 "learn config");
  c.beta = get_or(j, "beta", c.beta);
  c.epsilon = get_or(j, "epsilon", c.epsilon);
  c.ell = get_or(j, "ell", c.ell);
  c.ell0 = get_or(j, "ell0", c.ell0);
  c.omega_cut = get_or(j, "omega_cut", c.omega_cut);
  c.kappa = get_or(j, "kappa", c.kappa);
  c.kappa0 = get_or(j, "kappa0", c.kappa0);
  c.eta0 = get_or(j, "eta0", c.eta0);
  if (j.contains("mode")) c.mode = mode_from_string(j["mode"].get<std::string>());
  c.shots = get_or(j, "shots", c.shots);
  c.q_precision_factor = get_or(j, "q_precision_factor", c.q_precision_factor);
  c.p_fail = get_or(j, "p_fail", c.p_fail);
  c.seed = get_or(j, "seed", c.seed);
  if (j.contains("strategy")) c.strategy = strategy_from_string(j["strategy"].get<std::string>());
  if (j.contains("probes")) c.probes = probes_from_string(j["probes"].get<std::string>());
  c.enumeration_cap = get_or(j, "enumeration_cap", c.enumeration_cap);
  c.lm_max_iterations = get_or(j, "lm_max_iterations", c.lm_max_iterations);
  c.account_samples = get_or(j, "account_samples", c.account_samples);
  c.check_promise = get_or(j, "check_promise", c.check_promise);
  c.joint_tests = get_or(j, "joint_tests", c.joint_tests);
  if (j.contains("paper_constants")) {
    auto v = j["paper_constants"].get<std::vector<double>>();
    if (v.size() != 3) throw MalformedInput("paper_constants needs three numbers");
    c.paper_constants = PaperConstants{v[0], v[1], v[2]};
  }
  c.validate();
  return c;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

Json to_json(const LearnReport& r, bool with_timestamp) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "learn_report";
  j["algorithm"] = r.algorithm;
  j["config"] = to_json(r.config);
  j["parameters"] = {{"beta_used", r.beta_used}, {"scale", r.scale},       {"rescaled", r.rescaled},
                     {"ell", r.ell},             {"omega_cut", r.omega_cut}, {"sigma", r.sigma}};
  Json terms = Json::array();
  for (std::size_t k = 0; k < r.ids.size(); ++k)
    terms.push_back(Json{{"term_id", r.ids[k].index},
                         {"pauli", r.paulis[k]},
                         {"learned", r.learned[k]},
                         {"truth", r.truth[k]},
                         {"abs_error", r.truth_error[k]}});
  j["terms"] = terms;
  j["max_error"] = r.max_error;
  j["success"] = r.max_error <= r.config.epsilon;
  j["samples_used"] = r.samples_used;
  j["samples_required"] = r.samples_required;
  j["q_evals"] = r.q_evals;
  j["rounds"] = r.rounds;
  j["iterations"] = r.iterations;
  Json hist = Json::array();
  for (const IterationRecord& h : r.history)
    hist.push_back(Json{{"iteration", h.iteration},
                        {"eta", h.eta},
                        {"max_error", h.max_error},
                        {"ratio", h.ratio},
                        {"ratio_eta", h.ratio_eta},
                        {"samples", h.samples},
                        {"samples_required", h.samples_required},
                        {"q_evals", h.q_evals},
                        {"ell", h.ell}});
  j["history"] = hist;
  if (r.paper) {
    const PaperParameters& p = *r.paper;
    j["paper_bounds"] = {{"alpha_exponent_active", kAlphaExponentCondition},
                         {"alpha_exponent_alternative", kAlphaExponentProof},
                         {"log_alpha", p.log_alpha},
                         {"log_alpha_alternative", p.log_alpha_proof},
                         {"omega_cut", p.omega_cut},
                         {"ell", p.ell},
                         {"log_kappa", p.log_kappa},
                         {"omega_cut_iterative", p.omega_cut_iterative},
                         {"ell0", p.ell0},
                         {"log_kappa0", p.log_kappa0}};
  }
  if (with_timestamp) j["timestamp"] = {{"utc", utc_now()}, {"wall_time_s", r.wall_time_s}};
  return j;
}

LearnReport report_from_json(const Json& j) {
  require_schema(j, "learn report");
  if (get_or<std::string>(j, "kind", "") != "learn_report") throw SchemaError("not a learn report");
  LearnReport r;
  try {
    r.algorithm = j.at("algorithm").get<std::string>();
    r.config = learn_config_from_json(j.at("config"));
    const Json& p = j.at("parameters");
    r.beta_used = p.at("beta_used").get<double>();
    r.scale = p.at("scale").get<double>();
    r.rescaled = p.at("rescaled").get<bool>();
    r.ell = p.at("ell").get<int>();
    r.omega_cut = p.at("omega_cut").get<double>();
    r.sigma = p.at("sigma").get<double>();
    for (const Json& t : j.at("terms")) {
      r.ids.push_back(TermId{t.at("term_id").get<int>()});
      r.paulis.push_back(t.at("pauli").get<std::string>());
      r.learned.push_back(t.at("learned").get<double>());
      r.truth.push_back(t.at("truth").get<double>());
      r.truth_error.push_back(t.at("abs_error").get<double>());
    }
    r.max_error = j.at("max_error").get<double>();
    r.samples_used = j.at("samples_used").get<long long>();
    r.samples_required = j.at("samples_required").get<long long>();
    r.q_evals = j.at("q_evals").get<long long>();
    r.rounds = j.at("rounds").get<int>();
    r.iterations = j.at("iterations").get<int>();
    for (const Json& h : j.at("history")) {
      IterationRecord rec;
      rec.iteration = h.at("iteration").get<int>();
      rec.eta = h.at("eta").get<double>();
      rec.max_error = h.at("max_error").get<double>();
      rec.ratio = h.at("ratio").get<double>();
      rec.ratio_eta = h.at("ratio_eta").get<double>();
      rec.samples = h.at("samples").get<long long>();
      rec.samples_required = h.at("samples_required").get<long long>();
      rec.q_evals = h.at("q_evals").get<long long>();
      rec.ell = h.at("ell").get<int>();
      r.history.push_back(rec);
    }
    if (j.contains("timestamp")) r.wall_time_s = j["timestamp"].value("wall_time_s", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("learn report: ") + e.what());
  }
  return r;
}

Json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ResourceError("cannot open " + path);
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedInput(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ResourceError("cannot write " + path);
  f << text;
  if (!f) throw ResourceError("write failed for " + path);
}

void write_json_file(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

std::string report_csv(const LearnReport& r) {
  std::ostringstream os;
  os << "term_id,pauli_string,learned,truth,abs_error\n";
  for (std::size_t k = 0; k < r.ids.size(); ++k)
    os << r.ids[k].index << ",\"" << r.paulis[k] << "\"," << num(r.learned[k]) << ',' << num(r.truth[k]) << ','
       << num(r.truth_error[k]) << '\n';
  return os.str();
}

std::string plot_csv(const LearnReport& r) {
  std::ostringstream os;
  os << "iteration,eta,max_error,ratio,ratio_eta,samples,samples_required,q_evals,ell\n";
  for (const IterationRecord& h : r.history)
    os << h.iteration << ',' << num(h.eta) << ',' << num(h.max_error) << ',' << num(h.ratio) << ','
       << num(h.ratio_eta) << ',' << h.samples << ',' << h.samples_required << ',' << h.q_evals << ',' << h.ell
       << '\n';
  return os.str();
}

std::vector<AggregateRow> aggregate_reports(const std::vector<LearnReport>& reports) {
  using Key = std::tuple<std::string, std::string, double, double>;
  std::map<Key, AggregateRow> rows;
  for (const LearnReport& r : reports) {
    const std::string mode = to_string(r.config.mode);
    AggregateRow& a = rows[Key{r.algorithm, mode, r.config.beta, r.config.epsilon}];
    a.algorithm = r.algorithm;
    a.mode = mode;
    a.beta = r.config.beta;
    a.epsilon = r.config.epsilon;
    ++a.runs;
    a.success_rate += r.max_error <= r.config.epsilon ? 1.0 : 0.0;
    a.mean_max_error += r.max_error;
    a.mean_samples_used += static_cast<double>(r.samples_used);
    a.mean_samples_required += static_cast<double>(r.samples_required);
    a.mean_q_evals += static_cast<double>(r.q_evals);
  }
  std::vector<AggregateRow> out;
  for (auto& [key, a] : rows) {
    const double n = a.runs;
    a.success_rate /= n;
    a.mean_max_error /= n;
    a.mean_samples_used /= n;
    a.mean_samples_required /= n;
    a.mean_q_evals /= n;
    out.push_back(a);
  }
  return out;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw RangeError("fit_slope needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (sxx == 0.0) throw RangeError("fit_slope: all x values coincide");
  return sxy / sxx;
}

std::vector<TrendRow> sample_trends(const std::vector<AggregateRow>& rows) {
  using Key = std::tuple<std::string, std::string, double>;
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> pts;
  for (const AggregateRow& a : rows) {
    const double s = a.mode == "shots" ? a.mean_samples_used : a.mean_samples_required;
    if (s <= 0.0) continue;
    auto& p = pts[Key{a.algorithm, a.mode, a.beta}];
    p.first.push_back(std::log(1.0 / a.epsilon));
    p.second.push_back(std::log(s));
  }
  std::vector<TrendRow> out;
  for (const auto& [key, p] : pts) {
    if (p.first.size() < 2) continue;
    TrendRow t;
    std::tie(t.algorithm, t.mode, t.beta) = key;
    t.points = static_cast<int>(p.first.size());
    t.slope = fit_slope(p.first, p.second);
    out.push_back(t);
  }
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream os;
  os << "algorithm,mode,beta,epsilon,runs,success_rate,mean_max_error,mean_samples_used,mean_samples_required,"
        "mean_q_evals\n";
  for (const AggregateRow& a : rows)
    os << a.algorithm << ',' << a.mode << ',' << num(a.beta) << ',' << num(a.epsilon) << ',' << a.runs << ','
       << num(a.success_rate) << ',' << num(a.mean_max_error) << ',' << num(a.mean_samples_used) << ','
       << num(a.mean_samples_required) << ',' << num(a.mean_q_evals) << '\n';
  return os.str();
}

std::string trend_csv(const std::vector<TrendRow>& rows) {
  std::ostringstream os;
  os << "algorithm,mode,beta,points,slope_log_samples_vs_log_inv_epsilon\n";
  for (const TrendRow& t : rows)
    os << t.algorithm << ',' << t.mode << ',' << num(t.beta) << ',' << t.points << ',' << num(t.slope) << '\n';
  return os.str();
}

}  // namespace gibbslearn
