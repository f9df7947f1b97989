// Command-line front end: gen, verify, learn, report.
#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <filesystem>
#include <iostream>
#include <optional>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/io.hpp"
#include "gibbslearn/learner.hpp"
#include "gibbslearn/parallel.hpp"
#include "gibbslearn/verify.hpp"

namespace fs = std::filesystem;
using namespace gibbslearn;

namespace {

constexpr int kExitFailure = 1;  // checks failed or learned error above epsilon
constexpr int kExitUsage = 2;
constexpr int kExitError = 3;

struct Globals {
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out = ".";
  int threads = 0;
  std::size_t dense_cap = 4096;
};

std::string out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

int cmd_gen(const Globals& g, const std::string& geometry, const std::vector<int>& extents, bool periodic,
            const std::string& model, bool random_coefficients, const std::string& name) {
  GeometrySpec geo;
  if (geometry == "chain") {
    if (extents.size() != 1) throw MalformedInput("chain geometry takes one extent");
    geo = GeometrySpec::chain(extents[0], periodic);
  } else if (geometry == "lattice2d") {
    if (extents.size() != 2) throw MalformedInput("lattice2d geometry takes two extents");
    geo = GeometrySpec::lattice(extents[0], extents[1], periodic);
  } else {
    throw MalformedInput("gen supports chain and lattice2d geometries");
  }
  checked_dimension(geo.num_sites());
  const Model m = model_from_string(model);
  const HamiltonianSpec h = make_model(geo, m, g.seed, random_coefficients || m == Model::random);
  const std::string path = out_path(g, name);
  write_json_file(path, to_json(h));
  std::cout << "wrote " << path << " (" << h.size() << " terms on " << h.num_sites() << " sites)\n";
  return 0;
}

int cmd_verify(const Globals& g, const std::vector<std::string>& names, const std::vector<int>& sizes,
               int instances) {
  const std::vector<Suite> suites = parse_suites(names);
  VerifyOptions opt;
  opt.seed = g.seed;
  if (!sizes.empty()) opt.sizes = sizes;
  opt.instances = instances;
  const auto checks = run_verify(suites, opt);
  bool ok = true;
  for (const CheckResult& c : checks) {
    ok = ok && c.pass;
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.suite << "/" << c.name << " residual=" << c.residual
              << " tolerance=" << c.tolerance << " instances=" << c.instances << "\n";
  }
  const std::string path = out_path(g, "verify_report.json");
  write_json_file(path, verify_report_json(suites, opt, checks));
  std::cout << "wrote " << path << "\n";
  return ok ? 0 : kExitFailure;
}

struct LearnArgs {
  std::string config;
  std::string hamiltonian;
  std::string algorithm;
  std::optional<double> beta, epsilon;
  bool exact = false;
  std::optional<long long> shots;
  std::vector<double> paper_constants;
  bool test_mode = false;
  bool no_timestamp = false;
};

int cmd_learn(const Globals& g, const LearnArgs& a) {
  Json hamiltonian_json;
  Json learn_json = Json::object();
  fs::path base = ".";
  if (!a.config.empty()) {
    const Json cfg = read_json_file(a.config);
    require_schema(cfg, "learn config file");
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
      if (it.key() != "schema_version" && it.key() != "hamiltonian" && it.key() != "learn")
        throw MalformedInput("config file: unknown key '" + it.key() + "'");
    base = fs::path(a.config).parent_path();
    if (cfg.contains("hamiltonian")) {
      const Json& hj = cfg["hamiltonian"];
      hamiltonian_json = hj.is_string() ? read_json_file((base / hj.get<std::string>()).string()) : hj;
    }
    if (cfg.contains("learn")) learn_json = cfg["learn"];
  }
  if (!a.hamiltonian.empty()) hamiltonian_json = read_json_file(a.hamiltonian);
  if (hamiltonian_json.is_null()) throw MalformedInput("learn needs a Hamiltonian (--hamiltonian or config)");
  const HamiltonianSpec truth = hamiltonian_from_json(hamiltonian_json);
  checked_dimension(truth.num_sites());

  std::string algorithm = learn_json.value("algorithm", std::string("simple"));
  if (!a.algorithm.empty()) algorithm = a.algorithm;
  if (algorithm != "simple" && algorithm != "iterative")
    throw MalformedInput("algorithm must be simple or iterative");

  LearnConfig cfg = learn_config_from_json(learn_json);
  if (a.beta) cfg.beta = *a.beta;
  if (a.epsilon) cfg.epsilon = *a.epsilon;
  if (g.seed_set) cfg.seed = g.seed;
  if (a.exact) cfg.mode = MeasureMode::exact;
  if (a.shots) {
    cfg.mode = MeasureMode::shots;
    cfg.shots = *a.shots;
  }
  if (!a.paper_constants.empty()) {
    if (a.paper_constants.size() != 3) throw MalformedInput("--paper-constants takes three numbers");
    cfg.paper_constants = PaperConstants{a.paper_constants[0], a.paper_constants[1], a.paper_constants[2]};
  }
  cfg.validate();

  const HiddenGibbsSystem system(truth, cfg.beta);
  const LearnReport report = algorithm == "simple" ? learn_simple(system, cfg) : learn_iterative(system, cfg);

  write_json_file(out_path(g, "report.json"), to_json(report, !a.no_timestamp));
  write_text_file(out_path(g, "report.csv"), report_csv(report));
  write_text_file(out_path(g, "plot.csv"), plot_csv(report));
  std::cout << algorithm << ": max_error=" << report.max_error << " epsilon=" << cfg.epsilon
            << " samples_used=" << report.samples_used << " samples_required=" << report.samples_required
            << " rounds=" << report.rounds << "\n";
  std::cout << "wrote " << out_path(g, "report.json") << ", report.csv, plot.csv\n";
  if (a.test_mode)
    for (double e : report.truth_error)
      if (e > cfg.epsilon) {
        std::cout << "test mode: a coefficient misses epsilon\n";
        return kExitFailure;
      }
  return 0;
}

int cmd_report(const Globals& g, const std::vector<std::string>& inputs) {
  std::vector<LearnReport> reports;
  for (const std::string& p : inputs) reports.push_back(report_from_json(read_json_file(p)));
  const auto rows = aggregate_reports(reports);
  const auto trends = sample_trends(rows);
  write_text_file(out_path(g, "aggregate.csv"), aggregate_csv(rows));
  write_text_file(out_path(g, "trend.csv"), trend_csv(trends));
  std::cout << aggregate_csv(rows);
  if (!trends.empty()) std::cout << trend_csv(trends);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn local Hamiltonians from simulated Gibbs-state measurements"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Global seed")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
  app.add_option("--dense-cap", g.dense_cap, "Largest dense Hilbert-space dimension")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen", "Write a model Hamiltonian file");
  std::string geometry = "chain", model = "tfim", name = "hamiltonian.json";
  std::vector<int> extents;
  bool periodic = false, random_coefficients = false;
  gen->add_option("--geometry", geometry, "chain | lattice2d");
  gen->add_option("--extents", extents, "Sites per axis")->required();
  gen->add_flag("--periodic", periodic);
  gen->add_option("--model", model, "tfim | heisenberg | random");
  gen->add_flag("--random-coefficients", random_coefficients, "Draw named-model couplings from U[-1, 1]");
  gen->add_option("--name", name, "Output file name");

  auto* verify = app.add_subcommand("verify", "Run the numerical identity suites");
  std::vector<std::string> suites;
  std::vector<int> sizes;
  int instances = 20;
  verify->add_option("suites", suites, "all | oft | identifiability | kms | lieb_robinson | kernels");
  verify->add_option("--sizes", sizes, "Qubit counts of the random instances");
  verify->add_option("--instances", instances)->check(CLI::PositiveNumber);

  auto* learn = app.add_subcommand("learn", "Learn the coefficients of a hidden Hamiltonian");
  LearnArgs la;
  learn->add_option("--config", la.config, "Config JSON");
  learn->add_option("--hamiltonian", la.hamiltonian, "Hamiltonian JSON (overrides the config)");
  learn->add_option("--algorithm", la.algorithm, "simple | iterative");
  learn->add_option("--beta", la.beta);
  learn->add_option("--epsilon", la.epsilon);
  auto* exact = learn->add_flag("--exact", la.exact, "Infinite-shot estimates");
  learn->add_option("--shots", la.shots, "Shots per job (0 = Hoeffding policy)")->excludes(exact);
  learn->add_option("--paper-constants", la.paper_constants, "c1 c2 c3 for the bound report")->expected(3);
  learn->add_flag("--test-mode", la.test_mode, "Exit nonzero if any coefficient misses epsilon");
  learn->add_flag("--no-timestamp", la.no_timestamp, "Omit the timestamp block from report.json");

  auto* report = app.add_subcommand("report", "Aggregate learn reports");
  std::vector<std::string> inputs;
  report->add_option("inputs", inputs, "report.json files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (g.threads > 0) set_thread_count(g.threads);
    set_dense_dimension_cap(g.dense_cap);
    if (*gen) return cmd_gen(g, geometry, extents, periodic, model, random_coefficients, name);
    if (*verify) return cmd_verify(g, suites, sizes, instances);
    if (*learn) return cmd_learn(g, la);
    if (*report) return cmd_report(g, inputs);
  } catch (const MalformedInput& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
