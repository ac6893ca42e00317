#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <random>
#include <sstream>

#include "csaclb/barrier.hpp"
#include "csaclb/harness.hpp"
#include "csaclb/optbench.hpp"

namespace py = pybind11;
using namespace csaclb;

namespace {

// Python sees an env with its own RNG so reset() can take a plain seed.
struct PyEnv {
  std::unique_ptr<Env> env;
  std::mt19937_64 rng;
};

py::dict bench_row_dict(const BenchRow& r) {
  py::dict d;
  d["problem"] = r.problem;
  d["mu"] = r.mu;
  d["m"] = r.m;
  d["x_tilde"] = r.x_tilde;
  d["f_value"] = r.f_value;
  d["p_star"] = r.p_star;
  d["gap"] = r.gap;
  d["bound"] = r.bound;
  d["kkt_residual"] = r.kkt_residual;
  d["ok"] = r.ok;
  return d;
}

}  // namespace

PYBIND11_MODULE(_csaclb, m) {
  m.doc() = "Constrained SAC with a smoothed log barrier";

  m.def("log_barrier", py::vectorize(&log_barrier), py::arg("x"), py::arg("mu"));
  m.def("smoothed_log_barrier", py::vectorize(&smoothed_log_barrier), py::arg("x"), py::arg("mu"));
  m.def("smoothed_log_barrier_grad", py::vectorize(&smoothed_log_barrier_grad), py::arg("x"), py::arg("mu"));
  m.def(
      "shifted_barrier",
      py::vectorize([](double x, double mu, double d) { return shifted_barrier(x, {mu, d}); }),
      py::arg("x"), py::arg("mu"), py::arg("cost_limit") = 0.0);
  m.def(
      "shifted_barrier_grad",
      py::vectorize([](double x, double mu, double d) { return shifted_barrier_grad(x, {mu, d}); }),
      py::arg("x"), py::arg("mu"), py::arg("cost_limit") = 0.0);
  m.def("performance_bound", &performance_bound, py::arg("mu"), py::arg("m"));

  m.def(
      "bench_bound",
      [](const std::vector<double>& mus, const std::string& problem) {
        std::vector<ConvexProblem> ps;
        if (problem == "all") {
          ps = bundled_problems();
        } else {
          ps.push_back(problem_by_name(problem));
        }
        py::list out;
        for (const auto& r : run_bench(ps, mus)) out.append(bench_row_dict(r));
        return out;
      },
      py::arg("mus") = std::vector<double>{1.0, 1.5, 2.0, 3.0, 5.0}, py::arg("problem") = "all");

  m.def("default_config_json", [] { return config_to_json(TrainConfig{}).dump(); });
  m.def(
      "resolve_config_json", [](const std::string& text) { return config_to_json(parse_config(text)).dump(); },
      py::arg("config_json"));
  m.def(
      "train_json",
      [](const std::string& text) {
        const TrainConfig c = parse_config(text);
        RunLog run;
        {
          py::gil_scoped_release release;
          run = train(c);
        }
        py::dict d;
        d["log_csv"] = log_to_csv(run.rows);
        d["checkpoint_json"] = checkpoint_to_json(run).dump();
        d["env_steps"] = run.env_steps;
        d["gradient_updates"] = run.gradient_updates;
        d["aborted"] = run.aborted;
        d["diagnostic"] = run.diagnostic;
        return d;
      },
      py::arg("config_json"));

  py::class_<PyEnv>(m, "Env")
      .def(py::init([](const std::string& name, int horizon) {
             return PyEnv{make_env(parse_env_kind(name), horizon), std::mt19937_64(0)};
           }),
           py::arg("name"), py::arg("horizon") = 0)
      .def_property_readonly("obs_dim", [](const PyEnv& e) { return e.env->obs_dim(); })
      .def_property_readonly("action_dim", [](const PyEnv& e) { return e.env->action_dim(); })
      .def_property_readonly("horizon", [](const PyEnv& e) { return e.env->horizon(); })
      .def(
          "reset",
          [](PyEnv& e, std::uint64_t seed) {
            e.rng = make_stream(seed, "env-init");
            return Eigen::VectorXd(e.env->reset(e.rng));
          },
          py::arg("seed"))
      .def(
          "step",
          [](PyEnv& e, const Eigen::VectorXd& action) {
            const StepResult r = e.env->step(action);
            return py::make_tuple(r.obs, r.reward, r.cost, r.done);
          },
          py::arg("action"));
}
