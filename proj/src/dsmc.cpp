#include "kvsopt/dsmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "kvsopt/errors.hpp"
#include "kvsopt/moments.hpp"

namespace kvs {

double OptimizerParams::collision_rate() const noexcept {
  return static_cast<double>(N) * (dt / (eta_value() * epsilon));
}

void OptimizerParams::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("optimizer.lambda must be positive");
  if (!(sigma >= 0.0)) throw ConfigError("optimizer.sigma must be nonnegative");
  if (!(alpha > 0.0)) throw ConfigError("optimizer.alpha must be positive");
  if (!(dt > 0.0)) throw ConfigError("optimizer.dt must be positive");
  if (!(eta_value() > 0.0)) throw ConfigError("optimizer.eta must be positive");
  if (dt / eta_value() > 1.0) throw ConfigError("optimizer.dt / optimizer.eta must not exceed 1");
  if (!(epsilon > 0.0)) throw ConfigError("optimizer.epsilon must be positive");
  if (N == 0) throw ConfigError("optimizer.N must be positive");
  if (M == 0) throw ConfigError("sampling.M must be positive");
  if (n_sY == 0) throw ConfigError("optimizer.n_sY must be positive");
  if (!(init_lo < init_hi)) throw ConfigError("optimizer.init_lo must be below optimizer.init_hi");
}

std::size_t iround(double x, RngStream& stream) {
  const double u = stream.next_uniform();
  const double fl = std::floor(x);
  return static_cast<std::size_t>(fl) + ((u < x - fl) ? 1u : 0u);
}

std::size_t collision_count(const OptimizerParams& params, RngStream& stream) {
  return std::min(iround(params.collision_rate(), stream), params.N);
}

IterateState initialize(const OptimizerParams& params, const StochasticObjective& obj, RngStream& stream) {
  params.validate();
  IterateState state;
  state.ensemble = ParticleEnsemble::uniform_box(params.N, obj.dim_x, params.init_lo, params.init_hi, stream);
  state.n_collide = collision_count(params, stream);
  return state;
}

namespace detail {

SchemeSettings settings_for(const OptimizerParams& p, std::size_t n_collide) {
  return {p.lambda * p.epsilon * p.dt, p.sigma * std::sqrt(p.epsilon) * std::sqrt(p.dt), p.alpha, p.diffusion,
          p.n_it, n_collide};
}

void apply_collisions(ParticleEnsemble& ensemble, const ConsensusPoint& cp, const SchemeSettings& s,
                      std::size_t iterate, RngStream& stream) {
  const std::size_t n = ensemble.size();
  const std::size_t d = ensemble.dim();
  const std::size_t nc = std::min(s.n_collide, n);
  if (nc == 0) return;

  std::vector<std::size_t> selected(n);
  std::iota(selected.begin(), selected.end(), std::size_t{0});
  if (nc < n) {
    // Partial Fisher-Yates: uniform subset of size nc without replacement.
    for (std::size_t i = 0; i < nc; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(stream.next_index(n - i));
      std::swap(selected[i], selected[j]);
    }
    selected.resize(nc);
    std::sort(selected.begin(), selected.end());
  }

  std::vector<double> diff(d);
  for (const std::size_t l : selected) {
    auto x = ensemble.row(l);
    for (std::size_t r = 0; r < d; ++r) diff[r] = cp.point[r] - x[r];
    double iso = 0.0;
    if (s.diffusion == DiffusionKind::isotropic) {
      for (double v : diff) iso += v * v;
      iso = std::sqrt(iso);
    }
    for (std::size_t r = 0; r < d; ++r) {
      const double z = stream.next_standard_normal();
      const double dr = s.diffusion == DiffusionKind::isotropic ? iso : diff[r];
      x[r] += s.drift * diff[r] + s.noise * dr * z;
      if (!std::isfinite(x[r])) throw NonFinitePosition(l, iterate);
    }
  }
}

void run_scheme(ParticleEnsemble ensemble, const SchemeSettings& s, const ValueSource& values, RngStream& stream,
                const RunOptions& options, RunReport& report) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> vals(ensemble.size());
  for (std::size_t h = 0;; ++h) {
    values(ensemble, vals, stream);
    ConsensusPoint cp = consensus_point(ensemble, vals, s.alpha);
    if (options.record_trace) {
      const MomentState ms = empirical_moments(ensemble);
      report.trace.push_back({h, ms.m, ms.V, cp.point});
    }
    if (options.observer) options.observer(IterateView{h, ensemble, cp});
    if (h == s.n_it) {
      report.candidate = std::move(cp.point);
      break;
    }
    apply_collisions(ensemble, cp, s, h, stream);
  }
  report.iterations = s.n_it;
  report.n_collide = s.n_collide;
  report.final_ensemble = std::move(ensemble);
  report.wall_time_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

namespace {

void check_dims(const OptimizerParams& params, const StochasticObjective& obj, const SampleLaw& law) {
  params.validate();
  law.validate();
  if (obj.dim_y != law.k) {
    throw ConfigError("sampling law has " + std::to_string(law.k) + " components but objective '" + obj.name +
                      "' expects " + std::to_string(obj.dim_y));
  }
}

RunReport run_variable_sample(const OptimizerParams& params, const StochasticObjective& obj, const SampleLaw& law,
                              std::size_t n_batches, RngStream& stream, const RunOptions& options) {
  check_dims(params, obj, law);
  IterateState state = initialize(params, obj, stream);

  RunReport report;
  std::vector<SampleBatch> batches(n_batches);
  const std::uint64_t per_iterate =
      static_cast<std::uint64_t>(n_batches) * static_cast<std::uint64_t>(params.N) * params.M;
  detail::ValueSource source = [&](const ParticleEnsemble& ens, std::span<double> out, RngStream& st) {
    for (auto& b : batches) b = draw_batch(law, params.M, st);
    eval_fhat_M_rows(obj, ens.positions(), batches, out);
    report.eval_count += per_iterate;
  };
  const detail::SchemeSettings s = detail::settings_for(params, state.n_collide);
  detail::run_scheme(std::move(state.ensemble), s, source, stream, options, report);
  return report;
}

}  // namespace

IterateState step(IterateState state, const OptimizerParams& params, const StochasticObjective& obj,
                  const SampleLaw& law, RngStream& stream) {
  check_dims(params, obj, law);
  state.last_batch = draw_batch(law, params.M, stream);
  std::vector<double> vals(state.ensemble.size());
  eval_fhat_M_rows(obj, state.ensemble.positions(), std::span(&state.last_batch, 1), vals);
  state.last_consensus = consensus_point(state.ensemble, vals, params.alpha);
  const detail::SchemeSettings s = detail::settings_for(params, state.n_collide);
  detail::apply_collisions(state.ensemble, state.last_consensus, s, state.h, stream);
  ++state.h;
  return state;
}

RunReport run_lkbo_fvse(const OptimizerParams& params, const StochasticObjective& obj, const SampleLaw& law,
                        RngStream& stream, const RunOptions& options) {
  return run_variable_sample(params, obj, law, 1, stream, options);
}

RunReport run_lkbo_fvse_sy(const OptimizerParams& params, const StochasticObjective& obj, const SampleLaw& law,
                           RngStream& stream, const RunOptions& options) {
  return run_variable_sample(params, obj, law, params.n_sY, stream, options);
}

}  // namespace kvs
