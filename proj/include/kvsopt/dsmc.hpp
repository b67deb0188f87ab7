#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kvsopt/consensus.hpp"
#include "kvsopt/objectives.hpp"
#include "kvsopt/prng.hpp"
#include "kvsopt/sampling.hpp"

namespace kvs {

struct OptimizerParams {
  double lambda = 1.0;
  double sigma = 7.0;
  double alpha = 30.0;
  double dt = 0.01;
  std::optional<double> eta;  // defaults to dt
  double epsilon = 1.0;
  std::size_t N = 50;
  std::size_t M = 50;
  std::size_t n_it = 10000;
  DiffusionKind diffusion = DiffusionKind::anisotropic;
  std::size_t n_sY = 1;
  double init_lo = -3.0;
  double init_hi = 3.0;

  double eta_value() const noexcept { return eta.value_or(dt); }

  /// N * dt / (eta * epsilon), the expected number of colliding particles per iterate.
  double collision_rate() const noexcept;

  /// Throws ConfigError on out-of-domain parameters, including dt / eta > 1.
  void validate() const;
};

/// Stochastic rounding: floor(x) + Bernoulli(frac(x)). Always consumes one uniform.
std::size_t iround(double x, RngStream& stream);

/// Iround(N dt / (eta epsilon)) clamped to [0, N].
std::size_t collision_count(const OptimizerParams& params, RngStream& stream);

struct IterateState {
  ParticleEnsemble ensemble;
  std::size_t h = 0;
  std::size_t n_collide = 0;
  /// Consensus point that drove the most recent update, with the batch it was computed from.
  ConsensusPoint last_consensus;
  SampleBatch last_batch;
};

/// Passed to observers once per iterate h = 0..n_it, after the consensus point is formed
/// and before the collision update.
struct IterateView {
  std::size_t h;
  const ParticleEnsemble& ensemble;
  const ConsensusPoint& consensus;
};

struct TraceRow {
  std::size_t h;
  std::vector<double> m;
  double V;
  std::vector<double> cp;
};

struct RunOptions {
  bool record_trace = false;
  std::function<void(const IterateView&)> observer;
};

struct RunReport {
  /// Final consensus point, or the average of per-sample candidates for CBO-FFS.
  std::vector<double> candidate;
  std::size_t iterations = 0;
  std::size_t n_collide = 0;
  /// Number of F(x, y^(j)) terms entering the sample averages.
  std::uint64_t eval_count = 0;
  double wall_time_s = 0.0;
  std::vector<TraceRow> trace;
  std::vector<std::vector<double>> sample_candidates;
  ParticleEnsemble final_ensemble;
};

/// Initial ensemble from U(init_lo, init_hi)^d and the collision count, in that draw order.
IterateState initialize(const OptimizerParams& params, const StochasticObjective& obj, RngStream& stream);

/**
 * One Nanbu iterate: draws a fresh batch, evaluates fhat_M at all particles, forms the
 * consensus point, then moves the n_collide selected particles by
 *   x <- x + lambda eps (cp - x) dt + sigma sqrt(eps) D sqrt(dt) z.
 *
 * RNG order: batch, selection (only when n_collide < N), then d normals per colliding
 * particle in ascending index order.
 */
IterateState step(IterateState state, const OptimizerParams& params, const StochasticObjective& obj,
                  const SampleLaw& law, RngStream& stream);

/// LKBO-FVSe: n_it iterates, candidate = consensus of the final ensemble under a fresh batch.
RunReport run_lkbo_fvse(const OptimizerParams& params, const StochasticObjective& obj, const SampleLaw& law,
                        RngStream& stream, const RunOptions& options = {});

/// LKBO-FVSe-sY: each iterate draws n_sY batches and uses the averaged estimator.
RunReport run_lkbo_fvse_sy(const OptimizerParams& params, const StochasticObjective& obj, const SampleLaw& law,
                           RngStream& stream, const RunOptions& options = {});

namespace detail {

/// Fills one objective value per particle for the current iterate. May draw from the stream.
using ValueSource = std::function<void(const ParticleEnsemble&, std::span<double>, RngStream&)>;

struct SchemeSettings {
  double drift;      // lambda * eps * dt
  double noise;      // sigma * sqrt(eps) * sqrt(dt)
  double alpha;
  DiffusionKind diffusion;
  std::size_t n_it;
  std::size_t n_collide;
};

SchemeSettings settings_for(const OptimizerParams& params, std::size_t n_collide);

/// Moves the selected particles toward cp. Shared by every optimizer in the library.
void apply_collisions(ParticleEnsemble& ensemble, const ConsensusPoint& cp, const SchemeSettings& s,
                      std::size_t iterate, RngStream& stream);

/// Runs the consensus loop for h = 0..n_it and fills candidate, iterations and trace.
void run_scheme(ParticleEnsemble ensemble, const SchemeSettings& s, const ValueSource& values, RngStream& stream,
                const RunOptions& options, RunReport& report);

}  // namespace detail

}  // namespace kvs
