#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "oclab/cli.hpp"
#include "oclab/coding.hpp"
#include "oclab/info.hpp"
#include "oclab/json_io.hpp"
#include "oclab/optquant.hpp"
#include "oclab/transport.hpp"
#include "oclab/types.hpp"

namespace py = pybind11;
using namespace oclab;

namespace {

nlohmann::json parse_config(const std::string& config_json) {
  return nlohmann::json::parse(config_json);
}

SimConfig sim_config_from_json(const std::string& config_json) {
  // Reuse the CLI schema by piping through run_command for full validation,
  // but for the in-process API build the struct directly.
  const nlohmann::json j = parse_config(config_json);
  SimConfig cfg;
  const std::string mode = j.at("mode").get<std::string>();
  cfg.mode = mode == "finite" ? SimMode::finite
                              : (mode == "continuous" ? SimMode::continuous : SimMode::iid_codebook);
  if (cfg.mode == SimMode::continuous) {
    auto dens = [](const nlohmann::json& d) {
      if (d.at("family") == "gaussian")
        return DensitySpec{DensitySpec::Family::gaussian, d.value("mean", 0.0), d.value("std", 1.0)};
      return DensitySpec{DensitySpec::Family::uniform, d.at("lo").get<double>(),
                         d.at("hi").get<double>()};
    };
    cfg.mu_density = dens(j.at("muDensity"));
    cfg.psi_density = dens(j.at("psiDensity"));
    cfg.k = j.value("k", 4.0);
    cfg.levels = j.value("levels", 16);
  } else {
    cfg.mu = pmf_from_json(j.at("mu"));
    cfg.psi = pmf_from_json(j.at("psi"));
    if (j.at("rho").is_string()) {
      const std::string r = j.at("rho").get<std::string>();
      cfg.rho = r == "hamming"
                    ? DistortionMatrix::hamming(cfg.mu->alphabet(), cfg.psi->alphabet())
                    : DistortionMatrix::squared_error(cfg.mu->alphabet(), cfg.psi->alphabet());
    } else {
      cfg.rho = distortion_matrix_from_json(j.at("rho"));
    }
  }
  cfg.rate_bits = j.at("R").get<double>();
  cfg.n_list = j.at("nList").get<std::vector<int>>();
  cfg.trials = j.at("trials").get<int>();
  cfg.seed = j.value("seed", 0ull);
  cfg.fixed_codebook = j.value("fixedCodebook", false);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_oclab, m) {
  m.doc() = "finite-alphabet laboratory for output-constrained randomized quantization";

  py::class_<Alphabet>(m, "Alphabet")
      .def(py::init<std::vector<double>>(), py::arg("points"))
      .def_property_readonly("points", &Alphabet::points)
      .def("__len__", &Alphabet::size);

  py::class_<Pmf>(m, "Pmf")
      .def(py::init<Alphabet, std::vector<double>>(), py::arg("alphabet"), py::arg("mass"))
      .def_property_readonly("alphabet", &Pmf::alphabet)
      .def_property_readonly("mass", &Pmf::mass)
      .def("__len__", &Pmf::size);

  py::class_<JointPmf>(m, "JointPmf")
      .def(py::init<Alphabet, Alphabet, std::vector<double>>(), py::arg("x_alphabet"),
           py::arg("y_alphabet"), py::arg("mass_row_major"))
      .def_property_readonly("mass", &JointPmf::mass)
      .def_property_readonly("shape",
                             [](const JointPmf& v) { return std::pair(v.rows(), v.cols()); })
      .def("at", &JointPmf::at);

  py::class_<DistortionMatrix>(m, "DistortionMatrix")
      .def(py::init<std::size_t, std::size_t, std::vector<double>>(), py::arg("rows"),
           py::arg("cols"), py::arg("cost_row_major"))
      .def_static("hamming", &DistortionMatrix::hamming)
      .def_static("squared_error", &DistortionMatrix::squared_error)
      .def_property_readonly("cost", &DistortionMatrix::cost)
      .def("at", &DistortionMatrix::at);

  py::class_<DeterministicQuantizer>(m, "DeterministicQuantizer")
      .def(py::init<std::vector<std::size_t>, std::size_t>(), py::arg("map"),
           py::arg("level_budget"))
      .def_property_readonly("map", &DeterministicQuantizer::map)
      .def_property_readonly("level_budget", &DeterministicQuantizer::level_budget);

  py::class_<FiniteMixtureQuantizer>(m, "FiniteMixtureQuantizer")
      .def(py::init<std::vector<double>, std::vector<DeterministicQuantizer>>(),
           py::arg("weights"), py::arg("quantizers"))
      .def_property_readonly("weights", &FiniteMixtureQuantizer::weights)
      .def_property_readonly("quantizers", &FiniteMixtureQuantizer::quantizers);

  m.def("induced_joint", &induced_joint, py::arg("q"), py::arg("mu"), py::arg("y_alphabet"));
  m.def("mixture_joint", &mixture_joint, py::arg("mixture"), py::arg("mu"), py::arg("y_alphabet"));
  m.def("distortion", &distortion, py::arg("joint"), py::arg("rho"));
  m.def("output_marginal", &output_marginal);
  m.def("x_marginal", &x_marginal);
  m.def("mutual_information_bits", &mutual_information_bits);

  py::class_<TransportResult>(m, "TransportResult")
      .def_readonly("coupling", &TransportResult::coupling)
      .def_readonly("cost", &TransportResult::cost)
      .def_readonly("pivots", &TransportResult::pivots)
      .def_readonly("dual_residual", &TransportResult::dual_residual);
  m.def("ot_solve", &ot_solve, py::arg("mu"), py::arg("psi"), py::arg("rho"));
  m.def("quantile_coupling_1d", &quantile_coupling_1d, py::arg("mu"), py::arg("psi"));

  py::class_<ProkhorovResult>(m, "ProkhorovResult")
      .def_readonly("distance", &ProkhorovResult::distance)
      .def_readonly("witness_set", &ProkhorovResult::witness_set);
  m.def("prokhorov_distance", &prokhorov_distance, py::arg("a"), py::arg("b"), py::arg("metric"));
  m.def("tv_distance", &tv_distance);
  m.def("kl_divergence_nats", [](const Pmf& a, const Pmf& b) { return kl_divergence(a, b).nats; });
  m.def("kl_divergence_bits",
        [](const Pmf& a, const Pmf& b) { return kl_divergence(a, b).bits(); });

  py::class_<IminResult>(m, "IminResult")
      .def_readonly("bits", &IminResult::bits)
      .def_readonly("beta", &IminResult::beta)
      .def_property_readonly("coupling", [](const IminResult& r) {
        return r.coupling.has_value() ? py::cast(*r.coupling) : py::none().cast<py::object>();
      });
  m.def("i_min", &i_min, py::arg("mu"), py::arg("psi"), py::arg("rho"), py::arg("d"));
  m.def("d_curve", &d_curve, py::arg("mu"), py::arg("psi"), py::arg("rho"), py::arg("rate_bits"));
  m.def("d_classic", &d_classic, py::arg("mu"), py::arg("rho"), py::arg("rate_bits"));

  m.def("closest_ntype_counts", [](const Pmf& psi, int n) {
    return closest_ntype(psi, n).counts();
  });
  m.def("type_class_log_size_bits", [](const std::vector<std::int64_t>& counts, int n) {
    return type_class_log_size_bits(NType(counts, n));
  });
  m.def("normalized_type_kl_bits", &normalized_type_kl_bits, py::arg("psi"), py::arg("n"));
  m.def(
      "sample_uniform_type_class",
      [](const std::vector<std::int64_t>& counts, int n, std::uint64_t seed) {
        Rng rng(seed);
        return sample_uniform_type_class(NType(counts, n), rng);
      },
      py::arg("counts"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "solve_p1",
      [](const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, std::size_t levels,
         const std::string& cell_shape) {
        LpSolution sol = solve_p1(mu, psi, rho, levels,
                                  cell_shape == "interval" ? CellShape::interval : CellShape::all);
        py::dict d;
        d["status"] = sol.status == LpStatus::optimal ? "optimal" : "infeasible";
        d["objective"] = sol.objective;
        d["dual_residual"] = sol.dual_residual;
        if (sol.mixture.has_value()) d["mixture"] = py::cast(*sol.mixture);
        return d;
      },
      py::arg("mu"), py::arg("psi"), py::arg("rho"), py::arg("levels"),
      py::arg("cell_shape") = "all");
  m.def(
      "solve_p3",
      [](const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, std::size_t levels,
         double delta, const DistortionMatrix& metric) {
        LpSolution sol = solve_p3(mu, psi, rho, levels, delta, metric);
        py::dict d;
        d["status"] = sol.status == LpStatus::optimal ? "optimal" : "infeasible";
        d["objective"] = sol.objective;
        d["boundary_attained"] = sol.boundary_attained;
        if (sol.mixture.has_value()) d["mixture"] = py::cast(*sol.mixture);
        return d;
      },
      py::arg("mu"), py::arg("psi"), py::arg("rho"), py::arg("levels"), py::arg("delta"),
      py::arg("metric"));

  m.def(
      "discretize",
      [](const std::string& family, double a, double b, double k, int levels) {
        DensitySpec d{family == "gaussian" ? DensitySpec::Family::gaussian
                                           : DensitySpec::Family::uniform,
                      a, b};
        return discretize(d, k, levels);
      },
      py::arg("family"), py::arg("a"), py::arg("b"), py::arg("k"), py::arg("levels"));

  m.def(
      "simulate_json",
      [](const std::string& config_json, int threads) {
        const SimConfig cfg = sim_config_from_json(config_json);
        SimResult r;
        {
          py::gil_scoped_release release;
          r = cfg.mode == SimMode::finite
                  ? simulate_finite(cfg, threads)
                  : (cfg.mode == SimMode::continuous ? simulate_continuous(cfg, threads)
                                                     : simulate_iid_codebook(cfg, threads));
        }
        return sim_result_to_json(r);
      },
      py::arg("config_json"), py::arg("threads") = 1);

  m.def(
      "run_command_json",
      [](const std::string& command, const std::string& config_json) {
        return cli::run_command(command, parse_config(config_json));
      },
      py::arg("command"), py::arg("config_json"),
      "Run a CLI subcommand against a JSON config string; returns the exit code.");
}
