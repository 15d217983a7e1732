#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "adcons/algorithms.hpp"
#include "adcons/analysis.hpp"
#include "adcons/graph.hpp"
#include "adcons/harness.hpp"
#include "adcons/mixing.hpp"
#include "adcons/problems.hpp"
#include "adcons/pruning.hpp"

namespace py = pybind11;
using namespace adcons;

namespace {

Beta to_beta(const py::object& b) {
  if (py::isinstance<py::str>(b)) {
    if (b.cast<std::string>() == "greedy") return Beta::greedy();
    throw py::value_error("beta must be a number or 'greedy'");
  }
  return Beta(b.cast<double>());
}

std::size_t to_tau(const py::object& t) {
  if (t.is_none()) return kTauInfinite;
  if (py::isinstance<py::float_>(t) && std::isinf(t.cast<double>())) return kTauInfinite;
  return t.cast<std::size_t>();
}

RunConfig make_config(Algorithm algo, const Graph& g, double kappa, std::optional<double> kappa_lower,
                      const py::object& tau, const py::object& beta, std::uint64_t seed, std::size_t max_iters,
                      double tolerance) {
  RunConfig cfg;
  cfg.algorithm = algo;
  cfg.graph = g;
  cfg.prune = PruneParams::uniform(kappa, kappa_lower.value_or(1.0 - kappa), to_beta(beta));
  cfg.tau = to_tau(tau);
  cfg.seed = seed;
  cfg.max_iters = max_iters;
  cfg.tolerance = tolerance;
  return cfg;
}

py::dict trace_dict(const RunTrace& t) {
  std::vector<std::size_t> k;
  std::vector<std::uint64_t> volume, rounds;
  std::vector<double> consensus;
  std::vector<std::optional<double>> optimality;
  for (const auto& r : t.rows) {
    k.push_back(r.k);
    volume.push_back(r.comm_volume);
    rounds.push_back(r.comm_rounds);
    consensus.push_back(r.consensus_error);
    optimality.push_back(r.optimality_error);
  }
  py::dict d;
  d["k"] = k;
  d["comm_volume"] = volume;
  d["comm_rounds"] = rounds;
  d["consensus_error"] = consensus;
  d["optimality_error"] = optimality;
  d["disagreement"] = t.disagreement;
  d["final_state"] = t.final_state;
  d["volume"] = t.ledger.volume;
  d["rounds"] = t.ledger.rounds;
  d["converged"] = t.converged;
  d["diverged"] = t.diverged;
  d["max_tracking_gap"] = t.max_tracking_gap;
  d["cycle_gaps"] = t.cycle_gaps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_adcons, m) {
  m.doc() = "Adaptive edge pruning for decentralized consensus and optimization.";

  py::class_<Graph>(m, "Graph")
      .def(py::init<std::size_t>())
      .def(py::init([](std::size_t n, const std::vector<Edge>& edges) { return Graph(n, edges); }))
      .def_static("complete", &Graph::complete)
      .def_static("path", &Graph::path)
      .def_static("cycle", &Graph::cycle)
      .def("add_edge", &Graph::add_edge)
      .def("remove_edge", &Graph::remove_edge)
      .def("has_edge", &Graph::has_edge)
      .def("degree", &Graph::degree)
      .def("max_degree", &Graph::max_degree)
      .def("neighbors", &Graph::neighbors)
      .def("edges", &Graph::edges)
      .def_property_readonly("n", &Graph::size)
      .def_property_readonly("edge_count", &Graph::edge_count)
      .def("__eq__", [](const Graph& a, const Graph& b) { return a == b; })
      .def("__repr__", [](const Graph& g) {
        return "Graph(n=" + std::to_string(g.size()) + ", edges=" + std::to_string(g.edge_count()) + ")";
      });

  m.def("erdos_renyi", &erdos_renyi, py::arg("n"), py::arg("p"), py::arg("seed"));
  m.def("connected_erdos_renyi", &connected_erdos_renyi, py::arg("n"), py::arg("p"), py::arg("seed"));
  m.def("is_connected", &is_connected);
  m.def("diameter", [](const Graph& g) -> std::optional<std::size_t> {
    const auto d = diameter(g);
    if (d == kInfiniteDiameter) return std::nullopt;
    return d;
  });

  m.def("metropolis_hastings", [](const Graph& g) { return metropolis_hastings(g).weights(); });
  m.def("spectral_gap", py::overload_cast<const Matrix&>(&spectral_gap));
  m.def("ergodicity_coefficient", &ergodicity_coefficient);
  m.def("row_dissimilarity", &row_dissimilarity);
  m.def("deviation_norm", &deviation_norm);
  m.def("symmetric_eigenvalues", [](const Matrix& a) { return symmetric_eigenvalues(a); });

  m.def(
      "prune",
      [](const Graph& g, const Matrix& estimates, double kappa, std::optional<double> kappa_lower,
         const py::object& beta, std::uint64_t seed, std::uint64_t cycle) {
        const PruneParams params = PruneParams::uniform(kappa, kappa_lower.value_or(1.0 - kappa), to_beta(beta));
        params.validate(g.size());
        PruneOutcome out = execute_pruning(g, estimates, params, PruneStream{seed, cycle, 0});
        return py::make_tuple(out.pruned_graph, out.candidates);
      },
      py::arg("graph"), py::arg("estimates"), py::arg("kappa"), py::arg("kappa_lower") = py::none(),
      py::arg("beta") = 1.0, py::arg("seed") = 0, py::arg("cycle") = 0,
      "One pass of the pruning protocol. Returns (pruned_graph, candidates).");

  m.def(
      "ac_run",
      [](const Graph& g, const Matrix& x0, double kappa, std::optional<double> kappa_lower, const py::object& tau,
         const py::object& beta, std::uint64_t seed, std::size_t max_iters, double tolerance) {
        RunConfig cfg = make_config(Algorithm::AC, g, kappa, kappa_lower, tau, beta, seed, max_iters, tolerance);
        cfg.track_spectral_gap = true;
        return trace_dict(ac_run(cfg, x0));
      },
      py::arg("graph"), py::arg("x0"), py::arg("kappa") = 0.75, py::arg("kappa_lower") = py::none(),
      py::arg("tau") = 10, py::arg("beta") = 1.0, py::arg("seed") = 0, py::arg("max_iters") = 1000,
      py::arg("tolerance") = 0.0);

  m.def(
      "dist_avg_run",
      [](const Graph& g, const Matrix& x0, std::size_t max_iters, double tolerance) {
        return trace_dict(dist_avg_run(g, x0, max_iters, tolerance));
      },
      py::arg("graph"), py::arg("x0"), py::arg("max_iters") = 1000, py::arg("tolerance") = 0.0);

  m.def(
      "random_gossip_run",
      [](const Graph& g, const Matrix& x0, std::size_t max_iters, double tolerance, std::uint64_t seed) {
        return trace_dict(random_gossip_run(g, x0, max_iters, tolerance, seed));
      },
      py::arg("graph"), py::arg("x0"), py::arg("max_iters") = 1000, py::arg("tolerance") = 0.0, py::arg("seed") = 0);

  m.def(
      "acgt_linreg",
      [](const Graph& g, const Matrix& features, const Vector& labels, double alpha, double kappa,
         std::optional<double> kappa_lower, const py::object& tau, const py::object& beta, bool shared_prune,
         std::uint64_t seed, std::size_t max_iters, double tolerance, double lambda) {
        Dataset data{features, labels};
        RegressionObjective f(make_objective_spec(ProblemKind::Linear, data, g.size(), lambda, seed), data);
        RunConfig cfg = make_config(Algorithm::ACGT, g, kappa, kappa_lower, tau, beta, seed, max_iters, tolerance);
        cfg.alpha = alpha;
        cfg.shared_prune = shared_prune;
        py::dict d = trace_dict(acgt_run(cfg, f, Matrix::Zero(g.size(), data.dim())));
        d["x_star"] = f.reference().x_star;
        return d;
      },
      py::arg("graph"), py::arg("features"), py::arg("labels"), py::arg("alpha"), py::arg("kappa") = 0.5,
      py::arg("kappa_lower") = py::none(), py::arg("tau") = 10, py::arg("beta") = 1.0, py::arg("shared_prune") = false,
      py::arg("seed") = 0, py::arg("max_iters") = 1000, py::arg("tolerance") = 0.0, py::arg("lambda_") = 0.0,
      "AC-GT on least squares with the samples split evenly over the nodes; x0 = 0.");

  m.def(
      "gen_linear_synthetic",
      [](std::size_t samples, std::size_t dim, double noise, std::uint64_t seed) {
        SyntheticLinear s = gen_linear_synthetic(samples, dim, noise, seed);
        return py::make_tuple(s.data.features, s.data.labels, s.x_true);
      },
      py::arg("samples"), py::arg("dim"), py::arg("noise"), py::arg("seed"));

  m.def("corollary_eta", [](double q, std::size_t tau_bar, std::size_t d_G, std::size_t n) {
    return corollary_eta(EnvelopeParams{q, tau_bar, d_G}, n);
  });
  m.def(
      "suggest_step_size",
      [](double q, std::size_t tau_bar, std::size_t d_G, std::size_t n, double L) {
        StepSizeReport r = suggest_step_size(EnvelopeParams{q, tau_bar, d_G}, n, L);
        py::dict d;
        d["eta"] = r.eta;
        d["tau_eta"] = r.tau_eta;
        d["tau_hat"] = r.tau_hat;
        d["rho_prime"] = r.rho_prime;
        d["alpha_max"] = r.alpha_max;
        return d;
      },
      py::arg("q"), py::arg("tau_bar"), py::arg("d_G"), py::arg("n"), py::arg("L"));
  m.def("compute_rho_prime", [](const std::vector<Matrix>& seq, std::size_t k, std::size_t tau_hat) {
    std::vector<MixingMatrix> mats(seq.begin(), seq.end());
    return compute_rho_prime(mats, k, tau_hat);
  });

  m.def(
      "run_sweep",
      [](const std::string& config_json, bool write) {
        ExperimentConfig cfg = parse_config(config_json);
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = run_sweep(cfg);
        }
        if (write) write_sweep_outputs(cfg, r);
        std::ostringstream summary, baseline;
        write_summary_csv(summary, r.summary);
        write_summary_csv(baseline, r.baseline);
        return py::make_tuple(summary.str(), baseline.str());
      },
      py::arg("config_json"), py::arg("write") = false,
      "Runs a sweep from a JSON config; returns (summary_csv, baseline_csv).");

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  m.attr("TRACE_HEADER") = kTraceHeader;
  m.attr("SUMMARY_HEADER") = kSummaryHeader;
}
