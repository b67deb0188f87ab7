#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kvsopt/consensus.hpp"
#include "kvsopt/objectives.hpp"
#include "kvsopt/prng.hpp"
#include "kvsopt/sampling.hpp"

namespace kvs {

struct CAlphaEstimate {
  double value;
  double std_err;
};

/**
 * Monte Carlo estimate of C_alpha = E[exp(alpha (fbar_M - flow_M))] over n_mc batch draws,
 * where fbar_M and flow_M are the batch averages of the objective's upper and lower bounds.
 *
 * Throws BoundsUnavailable when the objective has no bounds, ConfigError when n_mc < 1000,
 * and NumericError when an exponent exceeds 700.
 */
CAlphaEstimate estimate_c_alpha(const StochasticObjective& obj, const SampleLaw& law, std::size_t M, double alpha,
                                std::size_t n_mc, RngStream& stream);

/// One estimate per alpha from the same n_mc batches, so the result is monotone in alpha.
std::vector<CAlphaEstimate> estimate_c_alpha_sweep(const StochasticObjective& obj, const SampleLaw& law,
                                                   std::size_t M, std::span<const double> alphas, std::size_t n_mc,
                                                   RngStream& stream);

struct MuResult {
  double mu;
  bool positive;
};

/// mu = 2 lambda - 2 (lambda^2 + kappa sigma^2) C_alpha.
MuResult convergence_mu(double lambda, double sigma, double kappa, double C_alpha);

struct NuInputs {
  double mu;
  double C_alpha;
  double alpha;
  double lambda;
  double sigma;
  double kappa;
  double c1;
  double c2;
  double f_lower;
  double V0;
  double omega_norm;
};

struct NuResult {
  double nu;
  bool feasible;
};

/// nu = (2 / (mu |omega|)) alpha e^{-alpha f_lower} (2 lambda c1 sqrt(C) + L c2 C) max(sqrt(V0), V0),
/// feasible when nu < 1/2. Throws ConfigError("concentration condition fails") when mu <= 0.
NuResult convergence_nu(const NuInputs& in);

/// Monte Carlo estimate of E[exp(-alpha f(X))] for X ~ U(lo, hi)^d.
CAlphaEstimate estimate_omega_norm(const PointFn& f, std::size_t d, double lo, double hi, double alpha,
                                   std::size_t n_mc, RngStream& stream);

/**
 * Empirical counterpart of the mixed term in the true variance equation:
 * the batch average of (1/N) sum_i |x^alpha(ybar) - x_i|^2 over n_batches fresh batches.
 */
CAlphaEstimate empirical_consensus_spread(const ParticleEnsemble& ensemble, const StochasticObjective& obj,
                                          const SampleLaw& law, std::size_t M, double alpha,
                                          std::size_t n_batches, RngStream& stream);

struct ConvergenceReport {
  double C_alpha = 1.0;
  double estimator_std_err = 0.0;
  double mu = 0.0;
  bool mu_positive = false;
  std::optional<double> nu;
  std::optional<bool> nu_feasible;

  std::string to_json() const;
};

}  // namespace kvs
