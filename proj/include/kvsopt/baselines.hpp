#pragma once

#include "kvsopt/dsmc.hpp"

namespace kvs {

/**
 * Standard CBO on the closed-form expectation f: Euler-Maruyama steps
 *   x <- x + lambda (cp - x) dt + sigma D sqrt(dt) z
 * for every particle, with cp weighted by f. Consumes no sampling draws, so the RNG
 * footprint does not depend on M. eta and epsilon are ignored.
 *
 * eval_count counts evaluations of f. Throws ConfigError if the objective has no expectation.
 */
RunReport run_cbo(const OptimizerParams& params, const StochasticObjective& obj, RngStream& stream,
                  const RunOptions& options = {});

/**
 * CBO-FFS: n_sY independent fixed-sample CBO runs, run s optimizing fhat_M(., y_s) for one
 * batch y_s drawn up front. The candidate is the average of the n_sY final consensus points.
 * Inner run s uses stream.derive(s). Observers see each inner run in turn.
 */
RunReport run_cbo_ffs(const OptimizerParams& params, const StochasticObjective& obj, const SampleLaw& law,
                      RngStream& stream, const RunOptions& options = {});

}  // namespace kvs
