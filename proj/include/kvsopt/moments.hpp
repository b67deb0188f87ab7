#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "kvsopt/consensus.hpp"

namespace kvs {

struct OptimizerParams;

/// Mean position m and variance V = (1/2) E|x - m|^2 at time t.
struct MomentState {
  std::vector<double> m;
  double V = 0.0;
  double t = 0.0;
};

/// m = (1/N) sum x_i, V = (1/2) ((1/N) sum |x_i|^2 - |m|^2), evaluated in centered form.
MomentState empirical_moments(const ParticleEnsemble& ensemble);

/// Coefficients of the linearized moment system around the consensus x_tilde.
struct ApproxSystemParams {
  double lambda = 1.0;
  double sigma = 0.0;
  double kappa = 1.0;
  std::vector<double> x_tilde;
  /// Multiplies the whole right-hand side (1/eta for a collision frequency 1/eta).
  double eta_scale = 1.0;
};

/**
 * System parameters matching the particle scheme in physical time t_h = h dt.
 *
 * One iterate applies the collision rule with drift lambda eps dt and noise sigma sqrt(eps dt)
 * to a fraction dt / (eta eps) of the particles, so the effective coefficients are
 * lambda' = lambda eps dt, sigma' = sigma sqrt(eps dt) and the frequency is 1 / (eta eps).
 */
ApproxSystemParams approx_params_for(const OptimizerParams& params, std::size_t d, std::vector<double> x_tilde);

struct MomentRates {
  std::vector<double> dm;
  double dV = 0.0;
};

/// dm = -lambda m + lambda x~,
/// dV = (L - 2 lambda) V + (L/2) |m|^2 - (L/2) |x~|^2 with L = lambda^2 + kappa sigma^2,
/// both scaled by eta_scale.
MomentRates approx_rhs(const MomentState& s, const ApproxSystemParams& p);

struct JacobianSpectrum {
  double eig_m;  // multiplicity d
  double eig_V;  // multiplicity 1
  bool stable;
};

/// Eigenvalues of the Jacobian at (x~, 0): -lambda and (lambda^2 + kappa sigma^2) - 2 lambda,
/// times eta_scale.
JacobianSpectrum jacobian_eigen(const ApproxSystemParams& p);

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Accepted steps of an adaptive integration with cubic Hermite dense output.
class OdeTrajectory {
 public:
  void push(double t, std::vector<double> y, std::vector<double> f);

  std::size_t size() const noexcept { return t_.size(); }
  std::span<const double> times() const noexcept { return t_; }
  const std::vector<double>& state(std::size_t i) const { return y_[i]; }
  const std::vector<double>& back() const { return y_.back(); }

  /// Interpolated state at t within [t_0, t_end].
  std::vector<double> at(double t) const;

  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;

 private:
  std::vector<double> t_;
  std::vector<std::vector<double>> y_;
  std::vector<std::vector<double>> f_;
};

/**
 * Dormand-Prince 5(4) with FSAL and standard step-size control on the mixed
 * error norm |err_i| / (abs_tol + rel_tol max(|y_i|, |y_new_i|)).
 *
 * Throws StiffnessError when the step falls below 1e-14 |t_end - t0|.
 */
OdeTrajectory integrate_ode(const OdeRhs& rhs, double t0, std::vector<double> y0, double t_end, double rel_tol,
                            double abs_tol);

/// Integrates the approximated system from s0 and samples it at the requested times.
std::vector<MomentState> integrate_moments(const ApproxSystemParams& p, const MomentState& s0,
                                           std::span<const double> times, double rel_tol = 1e-8,
                                           double abs_tol = 1e-12);

}  // namespace kvs
