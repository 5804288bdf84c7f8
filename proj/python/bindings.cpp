// Python bindings for the core operations: FSP solves, snapshot simulation,
// multifidelity inference, and the schedule-tuning numerics. Heavy work stays
// in C++; everything crosses the boundary as numpy arrays or plain dicts.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mfstmcmc/dataset.hpp"
#include "mfstmcmc/errors.hpp"
#include "mfstmcmc/fsp_solver.hpp"
#include "mfstmcmc/io.hpp"
#include "mfstmcmc/likelihood.hpp"
#include "mfstmcmc/model.hpp"
#include "mfstmcmc/multifi.hpp"
#include "mfstmcmc/ssa.hpp"
#include "mfstmcmc/state_space.hpp"

namespace py = pybind11;
using namespace mfst;

namespace {

Eigen::MatrixXi states_matrix(const TruncatedStateSpace& space) {
  Eigen::MatrixXi m(space.size(), space.num_species());
  for (int s = 0; s < space.size(); ++s)
    for (int j = 0; j < space.num_species(); ++j)
      m(s, j) = space.state_ptr(s)[j];
  return m;
}

py::dict level_record_dict(const LevelRecord& r) {
  py::dict d;
  d["level"] = r.level;
  d["beta"] = r.beta;
  d["fidelity"] = r.fidelity;
  d["delta_beta"] = r.delta_beta;
  d["ess"] = r.ess;
  d["cov"] = r.cov;
  d["acceptance"] = r.acceptance;
  d["sweep_iters"] = r.sweep_iters;
  d["wall_time"] = r.wall_time;
  d["strategy_decision"] = r.strategy_decision;
  d["it_criterion_value"] = r.it_criterion_value;
  d["cross_cov"] = r.cross_cov;
  d["log_c_l"] = r.log_c_l;
  return d;
}

ModelHierarchy hierarchy_from_bounds(const std::vector<FidelityBound>& bounds,
                                     double fsp_tol) {
  ModelHierarchy h;
  h.bounds = bounds;
  h.fsp_tol.assign(bounds.size(), fsp_tol);
  return h;
}

SamplerConfig sampler_config_from_kwargs(int num_particles, double kappa,
                                         double kappa_bridge, double kappa_cross,
                                         double corr_target, int max_sweep_iters,
                                         int n_it, int max_levels, int workers) {
  SamplerConfig cfg;
  cfg.num_particles = num_particles;
  cfg.kappa = kappa;
  cfg.kappa_bridge = kappa_bridge;
  cfg.kappa_cross = kappa_cross;
  cfg.corr_target = corr_target;
  cfg.max_sweep_iters = max_sweep_iters;
  cfg.n_it = n_it;
  cfg.max_levels = max_levels;
  cfg.workers = workers;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Multifidelity sequential tempered MCMC for stochastic reaction "
      "networks: adaptive FSP solves, snapshot simulation, and Bayesian "
      "inference over nested state-space truncations.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SamplerError>(m, "SamplerError", PyExc_RuntimeError);

  py::class_<ReactionNetwork>(m, "ReactionNetwork")
      .def_property_readonly("name",
                             [](const ReactionNetwork& n) { return n.name; })
      .def_property_readonly("species",
                             [](const ReactionNetwork& n) { return n.species; })
      .def_property_readonly("parameters",
                             [](const ReactionNetwork& n) {
                               std::vector<std::string> out;
                               for (const auto& p : n.parameters) out.push_back(p.name);
                               return out;
                             })
      .def_property_readonly("num_species", &ReactionNetwork::num_species)
      .def("theta_log10",
           [](const ReactionNetwork& n, const std::map<std::string, double>& lin) {
             return theta_log10_from_map(n, lin);
           },
           py::arg("linear_values"),
           "Pack linear-scale parameter values into the log10 vector the "
           "samplers use, ordered like `parameters`.")
      .def("__repr__", [](const ReactionNetwork& n) {
        return "<ReactionNetwork '" + n.name + "', " +
               std::to_string(n.species.size()) + " species, " +
               std::to_string(n.parameters.size()) + " parameters>";
      });

  py::class_<SnapshotDataset>(m, "SnapshotDataset")
      .def(py::init<>())
      .def_readwrite("observed_species", &SnapshotDataset::observed_species)
      .def_readwrite("times", &SnapshotDataset::times)
      .def_readwrite("cells", &SnapshotDataset::cells)
      .def_property_readonly("total_cells", &SnapshotDataset::total_cells)
      .def("save", &save_dataset_csv, py::arg("path"))
      .def("__repr__", [](const SnapshotDataset& d) {
        return "<SnapshotDataset " + std::to_string(d.times.size()) +
               " times, " + std::to_string(d.total_cells()) + " cells>";
      });

  py::class_<FspSolution>(m, "FspSolution")
      .def_property_readonly("times",
                             [](const FspSolution& s) { return s.times; })
      .def_property_readonly(
          "states", [](const FspSolution& s) { return states_matrix(*s.space); },
          "Row i is the state vector of ordinal i in each distribution.")
      .def_property_readonly("dist",
                             [](const FspSolution& s) { return s.dist; })
      .def_property_readonly("expansions",
                             [](const FspSolution& s) { return s.expansions; })
      .def("error_bound", &FspSolution::error_bound, py::arg("k"),
           "l1 bound on truncation error at output time k.")
      .def("__repr__", [](const FspSolution& s) {
        return "<FspSolution " + std::to_string(s.space->size()) + " states, " +
               std::to_string(s.times.size()) + " times>";
      });

  py::class_<RunResult>(m, "RunResult")
      .def_property_readonly(
          "samples",
          [](const RunResult& r) {
            if (r.posterior.empty()) return Eigen::MatrixXd(0, 0);
            Eigen::MatrixXd m(static_cast<Eigen::Index>(r.posterior.size()),
                              r.posterior[0].theta.size());
            for (size_t i = 0; i < r.posterior.size(); ++i)
              m.row(static_cast<Eigen::Index>(i)) = r.posterior[i].theta;
            return m;
          },
          "Posterior draws, one row per particle, log10 parameter scale.")
      .def_property_readonly("log_like",
                             [](const RunResult& r) {
                               Eigen::VectorXd v(r.posterior.size());
                               for (size_t i = 0; i < r.posterior.size(); ++i)
                                 v[static_cast<Eigen::Index>(i)] = r.posterior[i].log_like;
                               return v;
                             })
      .def_property_readonly("log_evidence",
                             [](const RunResult& r) { return r.log_evidence; })
      .def_property_readonly(
          "log_evidence_sigma",
          [](const RunResult& r) { return r.log_evidence_sigma; })
      .def_property_readonly("levels",
                             [](const RunResult& r) {
                               py::list out;
                               for (const auto& rec : r.levels)
                                 out.append(level_record_dict(rec));
                               return out;
                             })
      .def("__repr__", [](const RunResult& r) {
        return "<RunResult " + std::to_string(r.posterior.size()) +
               " samples, log_evidence " + format_g17(r.log_evidence) + ">";
      });

  m.def("load_model", &load_model, py::arg("path"),
        "Read a reaction network from its JSON description.");
  m.def("load_dataset", &load_dataset_csv, py::arg("path"));

  m.def(
      "solve_cme",
      [](const ReactionNetwork& net, const Eigen::VectorXd& theta_log10,
         const FidelityBound& bound, const std::vector<double>& times,
         double fsp_tol) {
        FspSolveOptions opts;
        opts.fsp_tol = fsp_tol;
        return solve_cme_adaptive(net, theta_log10, bound, times, opts);
      },
      py::arg("model"), py::arg("theta_log10"), py::arg("bound"),
      py::arg("times"), py::arg("fsp_tol") = 1e-8,
      "Adaptive finite state projection solve of the chemical master "
      "equation, expanding the truncation until the error bound meets "
      "fsp_tol at every output time.");

  m.def(
      "simulate",
      [](const ReactionNetwork& net, const Eigen::VectorXd& theta_log10,
         const std::vector<double>& times, int n_cells,
         const std::vector<std::string>& observed, uint64_t seed) {
        return generate_snapshot_dataset(net, theta_log10, times, n_cells,
                                         observed, seed);
      },
      py::arg("model"), py::arg("theta_log10"), py::arg("times"),
      py::arg("n_cells"), py::arg("observed"), py::arg("seed"),
      "Exact stochastic simulation of independent cells observed at fixed "
      "snapshot times.");

  m.def(
      "infer",
      [](const ReactionNetwork& net, const SnapshotDataset& data,
         const std::vector<FidelityBound>& bounds, const std::string& strategy,
         double fsp_tol, uint64_t seed, int num_particles, double kappa,
         double kappa_bridge, double kappa_cross, double corr_target,
         int max_sweep_iters, int n_it, int max_levels, int workers,
         const std::function<void(py::dict)>& on_level) {
        ModelHierarchy hier = hierarchy_from_bounds(bounds, fsp_tol);
        LikelihoodConfig lc;
        lc.fsp.fsp_tol = fsp_tol;
        CmeLikelihood like(net, data, hier, lc);
        PriorSpec prior;
        prior.log_density = [&net](const Eigen::VectorXd& th) {
          return prior_log_density(net.parameters, th);
        };
        prior.sample = [&net](RngStream& rng) {
          return prior_sample(net.parameters, rng);
        };
        SamplerConfig cfg = sampler_config_from_kwargs(
            num_particles, kappa, kappa_bridge, kappa_cross, corr_target,
            max_sweep_iters, n_it, max_levels, workers);
        LevelCallback cb;
        if (on_level)
          cb = [&on_level](const LevelRecord& r) {
            py::gil_scoped_acquire gil;
            on_level(level_record_dict(r));
          };
        RunResult res;
        {
          py::gil_scoped_release release;
          res = run_multifidelity(like, prior, parse_strategy(strategy), cfg,
                                  seed, cb);
        }
        py::dict out;
        out["result"] = res;
        out["full_model_solves"] = like.solve_counts().back();
        out["solve_counts"] = like.solve_counts();
        return out;
      },
      py::arg("model"), py::arg("dataset"), py::arg("bounds"),
      py::arg("strategy") = "tuned-it", py::arg("fsp_tol") = 1e-6,
      py::arg("seed") = 0, py::arg("num_particles") = 512,
      py::arg("kappa") = 1.0, py::arg("kappa_bridge") = 0.0,
      py::arg("kappa_cross") = 1.0, py::arg("corr_target") = 0.6,
      py::arg("max_sweep_iters") = 100, py::arg("n_it") = 0,
      py::arg("max_levels") = 200, py::arg("workers") = 1,
      py::arg("on_level") = nullptr,
      "Posterior sampling and evidence estimation over a nested hierarchy "
      "of state-space truncations. The lognormal prior on each parameter "
      "comes from the model description. Returns a dict with the RunResult "
      "and per-level solve counts.");

  // schedule numerics, handy for diagnostics and notebooks
  m.def("it_criterion",
        [](const std::vector<double>& lk, const std::vector<double>& lm,
           double beta, double delta_beta) {
          return it_criterion(lk, lm, beta, delta_beta);
        },
        py::arg("log_like_full"), py::arg("log_like_surrogate"), py::arg("beta"),
        py::arg("delta_beta"),
        "Signed criterion deciding whether another tempering step on the "
        "surrogate still informs the full-model posterior; negative favors "
        "bridging up the hierarchy.");
  m.def("tune_delta_beta", &tune_delta_beta, py::arg("log_likes"),
        py::arg("beta"), py::arg("kappa"),
        "Largest tempering step whose importance weights stay at the target "
        "coefficient of variation.");
  m.def("tune_beta_cross_fidelity",
        [](const std::vector<double>& lm, const std::vector<double>& lm1,
           double beta, double kappa_cross) {
          double cov = 0.0;
          double b = tune_beta_cross_fidelity(lm, lm1, beta, kappa_cross, &cov);
          return py::make_tuple(b, cov);
        },
        py::arg("log_like_surrogate"), py::arg("log_like_next"), py::arg("beta"),
        py::arg("kappa_cross"),
        "Inverse temperature to jump to when switching fidelities, with the "
        "weight dispersion reached there. Returns (beta_new, cov).");
  m.def("cross_weight_cov", &cross_weight_cov, py::arg("log_like_old"),
        py::arg("log_like_new"), py::arg("beta"), py::arg("beta_new"));
}
