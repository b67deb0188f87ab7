#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "kvsopt/app.hpp"
#include "kvsopt/baselines.hpp"
#include "kvsopt/diagnostics.hpp"
#include "kvsopt/errors.hpp"
#include "kvsopt/harness.hpp"
#include "kvsopt/moments.hpp"

namespace py = pybind11;
using namespace kvs;

namespace {

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Kinetic variable-sample consensus optimization";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<BoundsUnavailable>(m, "BoundsUnavailable", base.ptr());

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream_id") = 0)
      .def("derive", &RngStream::derive)
      .def("next_u64", &RngStream::next_u64)
      .def("next_uniform", &RngStream::next_uniform)
      .def("next_standard_normal", &RngStream::next_standard_normal)
      .def_property_readonly("words_consumed", &RngStream::words_consumed);

  py::enum_<DiffusionKind>(m, "DiffusionKind")
      .value("isotropic", DiffusionKind::isotropic)
      .value("anisotropic", DiffusionKind::anisotropic);

  py::class_<OptimizerParams>(m, "OptimizerParams")
      .def(py::init<>())
      .def_readwrite("lambda_", &OptimizerParams::lambda)
      .def_readwrite("sigma", &OptimizerParams::sigma)
      .def_readwrite("alpha", &OptimizerParams::alpha)
      .def_readwrite("dt", &OptimizerParams::dt)
      .def_readwrite("eta", &OptimizerParams::eta)
      .def_readwrite("epsilon", &OptimizerParams::epsilon)
      .def_readwrite("N", &OptimizerParams::N)
      .def_readwrite("M", &OptimizerParams::M)
      .def_readwrite("n_it", &OptimizerParams::n_it)
      .def_readwrite("diffusion", &OptimizerParams::diffusion)
      .def_readwrite("n_sY", &OptimizerParams::n_sY)
      .def_readwrite("init_lo", &OptimizerParams::init_lo)
      .def_readwrite("init_hi", &OptimizerParams::init_hi)
      .def("validate", &OptimizerParams::validate);

  py::class_<SampleLaw>(m, "SampleLaw")
      .def_readonly("k", &SampleLaw::k)
      .def("mean", &SampleLaw::mean)
      .def("variance", &SampleLaw::variance)
      .def("name", &SampleLaw::name);
  m.def("make_law", &make_law, py::arg("theta"), py::arg("k") = 2);

  py::class_<SampleBatch>(m, "SampleBatch")
      .def(py::init<std::size_t, std::vector<double>>(), py::arg("k"), py::arg("entries"))
      .def("__len__", &SampleBatch::size)
      .def_property_readonly("dim", &SampleBatch::dim)
      .def("means", [](const SampleBatch& b) { return to_vec(b.means()); });
  m.def("draw_batch", &draw_batch, py::arg("law"), py::arg("M"), py::arg("stream"));

  py::class_<ObjectiveOptions>(m, "ObjectiveOptions")
      .def(py::init<>())
      .def_readwrite("dim", &ObjectiveOptions::dim)
      .def_readwrite("B", &ObjectiveOptions::B)
      .def_readwrite("C", &ObjectiveOptions::C)
      .def_readwrite("mean_y1", &ObjectiveOptions::mean_y1)
      .def_readwrite("mean_y2", &ObjectiveOptions::mean_y2);

  py::class_<StochasticObjective>(m, "StochasticObjective")
      .def_readonly("name", &StochasticObjective::name)
      .def_readonly("dim_x", &StochasticObjective::dim_x)
      .def_readonly("dim_y", &StochasticObjective::dim_y)
      .def_readonly("minimizer", &StochasticObjective::minimizer)
      .def("eval", [](const StochasticObjective& o, const std::vector<double>& x,
                      const std::vector<double>& y) { return o.eval(x, y); })
      .def("expectation", [](const StochasticObjective& o, const std::vector<double>& x) {
        if (!o.has_expectation()) throw ConfigError("objective '" + o.name + "' has no closed-form expectation");
        return o.expectation(x);
      });
  m.def("make_objective", &make_objective, py::arg("name"), py::arg("options"));
  m.def("registered_objectives", &registered_objectives);
  m.def("eval_fhat_M", [](const StochasticObjective& o, const std::vector<double>& x, const SampleBatch& b) {
    return eval_fhat_M(o, x, b);
  });

  py::class_<ConsensusPoint>(m, "ConsensusPoint")
      .def_readonly("point", &ConsensusPoint::point)
      .def_readonly("weight_log_norm", &ConsensusPoint::weight_log_norm);
  m.def(
      "consensus_point",
      [](std::size_t n, std::size_t d, std::vector<double> positions, const std::vector<double>& values,
         double alpha) { return consensus_point(ParticleEnsemble(n, d, std::move(positions)), values, alpha); },
      py::arg("n"), py::arg("d"), py::arg("positions"), py::arg("values"), py::arg("alpha"));

  py::class_<TraceRow>(m, "TraceRow")
      .def_readonly("h", &TraceRow::h)
      .def_readonly("m", &TraceRow::m)
      .def_readonly("V", &TraceRow::V)
      .def_readonly("cp", &TraceRow::cp);

  py::class_<RunReport>(m, "RunReport")
      .def_readonly("candidate", &RunReport::candidate)
      .def_readonly("iterations", &RunReport::iterations)
      .def_readonly("n_collide", &RunReport::n_collide)
      .def_readonly("eval_count", &RunReport::eval_count)
      .def_readonly("wall_time_s", &RunReport::wall_time_s)
      .def_readonly("trace", &RunReport::trace);

  m.def(
      "run_optimizer",
      [](const std::string& kind, const OptimizerParams& p, const StochasticObjective& obj, const SampleLaw& law,
         RngStream& stream, bool record_trace) {
        RunOptions opt;
        opt.record_trace = record_trace;
        py::gil_scoped_release release;
        return run_optimizer(parse_optimizer(kind), p, obj, law, stream, opt);
      },
      py::arg("kind"), py::arg("params"), py::arg("objective"), py::arg("law"), py::arg("stream"),
      py::arg("record_trace") = false);

  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def(py::init<>())
      .def_property(
          "optimizer", [](const ExperimentSpec& s) { return std::string(to_string(s.optimizer)); },
          [](ExperimentSpec& s, const std::string& v) { s.optimizer = parse_optimizer(v); })
      .def_readwrite("params", &ExperimentSpec::params)
      .def_readwrite("objective", &ExperimentSpec::objective)
      .def_readwrite("objective_options", &ExperimentSpec::objective_options)
      .def_readwrite("law", &ExperimentSpec::law)
      .def_readwrite("n_runs", &ExperimentSpec::n_runs)
      .def_readwrite("success_threshold", &ExperimentSpec::success_threshold)
      .def_readwrite("record_rate_target", &ExperimentSpec::record_rate_target)
      .def_readwrite("track_iterates", &ExperimentSpec::track_iterates)
      .def_readwrite("eval_iterate", &ExperimentSpec::eval_iterate)
      .def_readwrite("master_seed", &ExperimentSpec::master_seed)
      .def_readwrite("workers", &ExperimentSpec::workers);

  py::class_<BenchmarkResult>(m, "BenchmarkResult")
      .def_readonly("n_runs", &BenchmarkResult::n_runs)
      .def_readonly("n_success", &BenchmarkResult::n_success)
      .def_readonly("success_rate", &BenchmarkResult::success_rate)
      .def_readonly("expected_error", &BenchmarkResult::expected_error)
      .def_readonly("wilson_lo", &BenchmarkResult::wilson_lo)
      .def_readonly("wilson_hi", &BenchmarkResult::wilson_hi)
      .def_readonly("first_iter_at_target", &BenchmarkResult::first_iter_at_target)
      .def_readonly("success_by_iterate", &BenchmarkResult::success_by_iterate)
      .def("format_cell", &format_cell, py::arg("show_iterate") = false);
  m.def("run_benchmark", [](const ExperimentSpec& s) {
    py::gil_scoped_release release;
    return run_benchmark(s);
  });

  py::class_<MomentState>(m, "MomentState")
      .def(py::init([](std::vector<double> mm, double V, double t) { return MomentState{std::move(mm), V, t}; }),
           py::arg("m"), py::arg("V"), py::arg("t") = 0.0)
      .def_readonly("m", &MomentState::m)
      .def_readonly("V", &MomentState::V)
      .def_readonly("t", &MomentState::t);
  py::class_<ApproxSystemParams>(m, "ApproxSystemParams")
      .def(py::init<>())
      .def_readwrite("lambda_", &ApproxSystemParams::lambda)
      .def_readwrite("sigma", &ApproxSystemParams::sigma)
      .def_readwrite("kappa", &ApproxSystemParams::kappa)
      .def_readwrite("x_tilde", &ApproxSystemParams::x_tilde)
      .def_readwrite("eta_scale", &ApproxSystemParams::eta_scale);
  py::class_<JacobianSpectrum>(m, "JacobianSpectrum")
      .def_readonly("eig_m", &JacobianSpectrum::eig_m)
      .def_readonly("eig_V", &JacobianSpectrum::eig_V)
      .def_readonly("stable", &JacobianSpectrum::stable);
  m.def("approx_rhs", [](const MomentState& s, const ApproxSystemParams& p) {
    const auto r = approx_rhs(s, p);
    return py::make_tuple(r.dm, r.dV);
  });
  m.def("jacobian_eigen", &jacobian_eigen);
  m.def("approx_params_for", &approx_params_for, py::arg("params"), py::arg("d"), py::arg("x_tilde"));
  m.def(
      "integrate_moments",
      [](const ApproxSystemParams& p, const MomentState& s0, const std::vector<double>& times, double rel,
         double abs) { return integrate_moments(p, s0, times, rel, abs); },
      py::arg("params"), py::arg("s0"), py::arg("times"), py::arg("rel_tol") = 1e-8, py::arg("abs_tol") = 1e-12);

  py::class_<CAlphaEstimate>(m, "CAlphaEstimate")
      .def_readonly("value", &CAlphaEstimate::value)
      .def_readonly("std_err", &CAlphaEstimate::std_err);
  m.def("estimate_c_alpha", &estimate_c_alpha, py::arg("objective"), py::arg("law"), py::arg("M"), py::arg("alpha"),
        py::arg("n_mc"), py::arg("stream"));
  m.def("convergence_mu", [](double l, double s, double k, double C) {
    const auto r = convergence_mu(l, s, k, C);
    return py::make_tuple(r.mu, r.positive);
  });

  m.def(
      "run_command",
      [](const std::string& sub, const std::string& config, const std::vector<std::string>& overrides,
         const std::string& output_dir, std::optional<std::uint64_t> seed) {
        CliOptions cli;
        cli.config_path = config;
        cli.overrides = overrides;
        cli.output_dir = output_dir;
        cli.seed = seed;
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_command(sub, cli, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("subcommand"), py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{},
      py::arg("output_dir") = ".", py::arg("seed") = py::none());
}
