#include "kvsopt/baselines.hpp"

#include <string>

#include "kvsopt/errors.hpp"

namespace kvs {

namespace {

detail::SchemeSettings euler_maruyama_settings(const OptimizerParams& params) {
  OptimizerParams p = params;
  p.epsilon = 1.0;
  return detail::settings_for(p, p.N);
}

}  // namespace

RunReport run_cbo(const OptimizerParams& params, const StochasticObjective& obj, RngStream& stream,
                  const RunOptions& options) {
  params.validate();
  if (!obj.has_expectation()) {
    throw ConfigError("objective '" + obj.name + "' has no closed-form expectation; CBO needs one");
  }
  auto ensemble = ParticleEnsemble::uniform_box(params.N, obj.dim_x, params.init_lo, params.init_hi, stream);

  RunReport report;
  const std::size_t d = obj.dim_x;
  detail::ValueSource source = [&](const ParticleEnsemble& ens, std::span<double> out, RngStream&) {
    const auto pos = ens.positions();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = obj.expectation(pos.subspan(i * d, d));
    report.eval_count += out.size();
  };
  detail::run_scheme(std::move(ensemble), euler_maruyama_settings(params), source, stream, options, report);
  return report;
}

RunReport run_cbo_ffs(const OptimizerParams& params, const StochasticObjective& obj, const SampleLaw& law,
                      RngStream& stream, const RunOptions& options) {
  params.validate();
  law.validate();
  if (obj.dim_y != law.k) {
    throw ConfigError("sampling law has " + std::to_string(law.k) + " components but objective '" + obj.name +
                      "' expects " + std::to_string(obj.dim_y));
  }

  RunReport report;
  report.candidate.assign(obj.dim_x, 0.0);
  const auto settings = euler_maruyama_settings(params);
  const std::uint64_t per_iterate = static_cast<std::uint64_t>(params.N) * params.M;

  for (std::size_t s = 0; s < params.n_sY; ++s) {
    RngStream inner = stream.derive(s);
    auto ensemble = ParticleEnsemble::uniform_box(params.N, obj.dim_x, params.init_lo, params.init_hi, inner);
    const SampleBatch batch = draw_batch(law, params.M, inner);

    RunReport run;
    detail::ValueSource source = [&](const ParticleEnsemble& ens, std::span<double> out, RngStream&) {
      eval_fhat_M_rows(obj, ens.positions(), std::span(&batch, 1), out);
      run.eval_count += per_iterate;
    };
    detail::run_scheme(std::move(ensemble), settings, source, inner, options, run);

    for (std::size_t r = 0; r < obj.dim_x; ++r) report.candidate[r] += run.candidate[r];
    report.eval_count += run.eval_count;
    report.wall_time_s += run.wall_time_s;
    report.sample_candidates.push_back(std::move(run.candidate));
    if (options.record_trace) {
      report.trace.insert(report.trace.end(), run.trace.begin(), run.trace.end());
    }
    report.final_ensemble = std::move(run.final_ensemble);
  }
  for (auto& c : report.candidate) c /= static_cast<double>(params.n_sY);
  report.iterations = params.n_it;
  report.n_collide = params.N;
  return report;
}

}  // namespace kvs
