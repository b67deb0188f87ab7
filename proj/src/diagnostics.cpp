#include "kvsopt/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "kvsopt/errors.hpp"

namespace kvs {

namespace {

CAlphaEstimate mean_and_err(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

void check_sample_count(std::size_t n_mc) {
  if (n_mc < 1000) throw ConfigError("diagnose.n_mc must be at least 1000");
}

}  // namespace

std::vector<CAlphaEstimate> estimate_c_alpha_sweep(const StochasticObjective& obj, const SampleLaw& law,
                                                   std::size_t M, std::span<const double> alphas, std::size_t n_mc,
                                                   RngStream& stream) {
  if (!obj.has_bounds()) throw BoundsUnavailable();
  check_sample_count(n_mc);
  law.validate();
  if (M == 0) throw ConfigError("sampling.M must be positive");

  std::vector<double> gaps(n_mc);
  for (auto& g : gaps) {
    const SampleBatch batch = draw_batch(law, M, stream);
    const SampleBounds b = assumption1_bounds(obj, batch);
    g = std::max(0.0, b.upper - b.lower);
  }

  std::vector<CAlphaEstimate> out;
  out.reserve(alphas.size());
  std::vector<double> terms(n_mc);
  for (double alpha : alphas) {
    for (std::size_t i = 0; i < n_mc; ++i) {
      const double e = alpha * gaps[i];
      if (e > 700.0) throw NumericError("C_alpha numerically infinite; reduce alpha");
      terms[i] = std::exp(e);
    }
    out.push_back(mean_and_err(terms));
  }
  return out;
}

CAlphaEstimate estimate_c_alpha(const StochasticObjective& obj, const SampleLaw& law, std::size_t M, double alpha,
                                std::size_t n_mc, RngStream& stream) {
  return estimate_c_alpha_sweep(obj, law, M, std::span(&alpha, 1), n_mc, stream).front();
}

MuResult convergence_mu(double lambda, double sigma, double kappa, double C_alpha) {
  const double mu = 2.0 * lambda - 2.0 * (lambda * lambda + kappa * sigma * sigma) * C_alpha;
  return {mu, mu > 0.0};
}

NuResult convergence_nu(const NuInputs& in) {
  if (!(in.mu > 0.0)) throw ConfigError("concentration condition fails");
  const double L = in.lambda * in.lambda + in.kappa * in.sigma * in.sigma;
  const double v = std::max(std::sqrt(in.V0), in.V0);
  const double bracket = 2.0 * in.lambda * in.c1 * std::sqrt(in.C_alpha) + L * in.c2 * in.C_alpha;
  const double nu = (2.0 / (in.mu * in.omega_norm)) * in.alpha * std::exp(-in.alpha * in.f_lower) * bracket * v;
  return {nu, nu < 0.5};
}

CAlphaEstimate estimate_omega_norm(const PointFn& f, std::size_t d, double lo, double hi, double alpha,
                                   std::size_t n_mc, RngStream& stream) {
  if (!f) throw ConfigError("omega norm estimate needs a closed-form expectation");
  check_sample_count(n_mc);
  std::vector<double> x(d);
  std::vector<double> terms(n_mc);
  for (auto& t : terms) {
    for (auto& xr : x) xr = lo + (hi - lo) * stream.next_uniform();
    t = std::exp(-alpha * f(x));
  }
  return mean_and_err(terms);
}

CAlphaEstimate empirical_consensus_spread(const ParticleEnsemble& ensemble, const StochasticObjective& obj,
                                          const SampleLaw& law, std::size_t M, double alpha,
                                          std::size_t n_batches, RngStream& stream) {
  const std::size_t n = ensemble.size();
  const std::size_t d = ensemble.dim();
  std::vector<double> vals(n);
  std::vector<double> spreads(n_batches);
  for (auto& s : spreads) {
    const SampleBatch batch = draw_batch(law, M, stream);
    eval_fhat_M_rows(obj, ensemble.positions(), std::span(&batch, 1), vals);
    const ConsensusPoint cp = consensus_point(ensemble, vals, alpha);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = ensemble.row(i);
      for (std::size_t r = 0; r < d; ++r) acc += (cp.point[r] - x[r]) * (cp.point[r] - x[r]);
    }
    s = acc / static_cast<double>(n);
  }
  return mean_and_err(spreads);
}

std::string ConvergenceReport::to_json() const {
  nlohmann::ordered_json j;
  j["C_alpha"] = C_alpha;
  j["estimator_std_err"] = estimator_std_err;
  j["mu"] = mu;
  j["mu_positive"] = mu_positive;
  j["nu"] = nu ? nlohmann::ordered_json(*nu) : nlohmann::ordered_json(nullptr);
  j["nu_feasible"] = nu_feasible ? nlohmann::ordered_json(*nu_feasible) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

}  // namespace kvs
