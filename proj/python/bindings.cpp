#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gibbslearn/errors.hpp"
#include "gibbslearn/identifiability.hpp"
#include "gibbslearn/io.hpp"
#include "gibbslearn/learner.hpp"
#include "gibbslearn/measurement.hpp"
#include "gibbslearn/parallel.hpp"
#include "gibbslearn/verify.hpp"

namespace py = pybind11;
using namespace gibbslearn;

namespace {

// Structured values cross the boundary as JSON text; the Python side wraps
// them with json.loads / json.dumps.
HamiltonianSpec spec_from_text(const std::string& text) { return hamiltonian_from_json(Json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_gibbslearn, m) {
  m.doc() = "Dense-simulation Hamiltonian learning from Gibbs states";

  auto base = py::register_exception<Error>(m, "GibbsLearnError");
  py::register_exception<MalformedInput>(m, "MalformedInput", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<ResourceError>(m, "ResourceError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<BudgetError>(m, "BudgetError", base.ptr());
  py::register_exception<ModeMismatch>(m, "ModeMismatch", base.ptr());

  m.def("set_threads", &set_thread_count, py::arg("n"));

  m.def(
      "make_model",
      [](const std::string& geometry, const std::vector<int>& extents, const std::string& model, std::uint64_t seed,
         bool random_coefficients, bool periodic) {
        GeometrySpec geo;
        if (geometry == "chain" && extents.size() == 1) geo = GeometrySpec::chain(extents[0], periodic);
        else if (geometry == "lattice2d" && extents.size() == 2) geo = GeometrySpec::lattice(extents[0], extents[1], periodic);
        else throw MalformedInput("geometry must be chain (one extent) or lattice2d (two extents)");
        const Model md = model_from_string(model);
        return to_json(make_model(geo, md, seed, random_coefficients || md == Model::random)).dump();
      },
      py::arg("geometry"), py::arg("extents"), py::arg("model") = "tfim", py::arg("seed") = 1,
      py::arg("random_coefficients") = false, py::arg("periodic") = false);

  m.def("hamiltonian_matrix", [](const std::string& spec) { return to_dense(spec_from_text(spec)); },
        py::arg("spec_json"));
  m.def("pauli_matrix", [](const std::string& p, int n) { return to_dense(PauliString::parse(p), n); },
        py::arg("pauli"), py::arg("num_sites"));
  m.def("gibbs_state", [](const std::string& spec, double beta) { return GibbsState(spec_from_text(spec), beta).rho(); },
        py::arg("spec_json"), py::arg("beta"));

  m.def("f_hat", &kernels::f_hat, py::arg("omega"), py::arg("sigma"));
  m.def("g_hat", &kernels::g_hat, py::arg("nu"));
  m.def("g_beta", &kernels::g_beta, py::arg("t"), py::arg("beta"));

  auto make_inputs = [](const Matrix& o, const std::string& g, const Matrix& a, const std::string& k,
                        const std::string& truth, double beta, double sigma, double omega_cut) {
    const GibbsState state(spec_from_text(truth), beta);
    KernelParams p{beta, sigma > 0.0 ? sigma : 1.0 / beta, omega_cut};
    return QInputs::make(o, spec_from_text(g), a, spec_from_text(k), state, p);
  };
  m.def(
      "q_value",
      [make_inputs](const Matrix& o, const std::string& g, const Matrix& a, const std::string& k,
                    const std::string& truth, double beta, double omega_cut, double sigma, const std::string& path,
                    double tol) {
        const QInputs in = make_inputs(o, g, a, k, truth, beta, sigma, omega_cut);
        if (path == "frequency") return std::make_pair(q_frequency_exact(in).value, 0.0);
        if (path != "time") throw MalformedInput("path must be 'frequency' or 'time'");
        const QValue v = q_time_quadrature(in, kernels::choose_truncation(in.params, in.op_norm_product(), tol, in.bandwidth()));
        return std::make_pair(v.value, v.est_error);
      },
      py::arg("o"), py::arg("g_json"), py::arg("a"), py::arg("k_json"), py::arg("truth_json"), py::arg("beta"),
      py::arg("omega_cut"), py::arg("sigma") = 0.0, py::arg("path") = "frequency", py::arg("tol") = 1e-8);
  m.def(
      "identifiability_lhs",
      [](const Matrix& o, const Matrix& a, const std::string& h, const std::string& h2, double beta) {
        const HamiltonianSpec hs = spec_from_text(h);
        return identifiability_lhs(o, a, hs, spec_from_text(h2), GibbsState(hs, beta));
      },
      py::arg("o"), py::arg("a"), py::arg("h_json"), py::arg("h_prime_json"), py::arg("beta"));

  m.def(
      "sample_expectation",
      [](const Matrix& obs, const Matrix& rho, long long shots, std::uint64_t seed) {
        const ShotEstimate e = sample_expectation(obs, rho, shots, seed);
        return py::make_tuple(e.mean, e.shots, e.std_error);
      },
      py::arg("observable"), py::arg("rho"), py::arg("shots"), py::arg("seed"));

  m.def(
      "learn",
      [](const std::string& spec, const std::string& config, const std::string& algorithm) {
        const LearnConfig cfg = learn_config_from_json(Json::parse(config));
        const HiddenGibbsSystem sys(spec_from_text(spec), cfg.beta);
        py::gil_scoped_release release;
        LearnReport r;
        if (algorithm == "simple") r = learn_simple(sys, cfg);
        else if (algorithm == "iterative") r = learn_iterative(sys, cfg);
        else throw MalformedInput("algorithm must be simple or iterative");
        return to_json(r, false).dump();
      },
      py::arg("spec_json"), py::arg("config_json") = "{}", py::arg("algorithm") = "simple");

  m.def(
      "verify",
      [](const std::vector<std::string>& suites, std::uint64_t seed, const std::vector<int>& sizes, int instances) {
        const auto chosen = parse_suites(suites);
        VerifyOptions opt;
        opt.seed = seed;
        opt.sizes = sizes;
        opt.instances = instances;
        return verify_report_json(chosen, opt, run_verify(chosen, opt)).dump();
      },
      py::arg("suites"), py::arg("seed") = 1, py::arg("sizes") = std::vector<int>{2, 3, 4},
      py::arg("instances") = 20);

  m.def(
      "aggregate",
      [](const std::vector<std::string>& reports) {
        std::vector<LearnReport> rs;
        for (const auto& r : reports) rs.push_back(report_from_json(Json::parse(r)));
        const auto rows = aggregate_reports(rs);
        return py::make_tuple(aggregate_csv(rows), trend_csv(sample_trends(rows)));
      },
      py::arg("report_jsons"));
}
