#include "kvsopt/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kvsopt/dsmc.hpp"
#include "kvsopt/errors.hpp"

namespace kvs {

MomentState empirical_moments(const ParticleEnsemble& ensemble) {
  const std::size_t n = ensemble.size();
  const std::size_t d = ensemble.dim();
  MomentState s;
  s.m.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = ensemble.row(i);
    for (std::size_t r = 0; r < d; ++r) s.m[r] += x[r];
  }
  for (auto& v : s.m) v /= static_cast<double>(n);
  double spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = ensemble.row(i);
    for (std::size_t r = 0; r < d; ++r) spread += (x[r] - s.m[r]) * (x[r] - s.m[r]);
  }
  s.V = 0.5 * spread / static_cast<double>(n);
  return s;
}

ApproxSystemParams approx_params_for(const OptimizerParams& params, std::size_t d, std::vector<double> x_tilde) {
  ApproxSystemParams p;
  p.lambda = params.lambda * params.epsilon * params.dt;
  p.sigma = params.sigma * std::sqrt(params.epsilon * params.dt);
  p.kappa = kappa(params.diffusion, d);
  p.x_tilde = std::move(x_tilde);
  p.eta_scale = 1.0 / (params.eta_value() * params.epsilon);
  return p;
}

MomentRates approx_rhs(const MomentState& s, const ApproxSystemParams& p) {
  const double L = p.lambda * p.lambda + p.kappa * p.sigma * p.sigma;
  const std::size_t d = s.m.size();
  MomentRates r;
  r.dm.resize(d);
  double m2 = 0.0;
  double x2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double xt = p.x_tilde.empty() ? 0.0 : p.x_tilde[i];
    r.dm[i] = p.eta_scale * (-p.lambda * s.m[i] + p.lambda * xt);
    m2 += s.m[i] * s.m[i];
    x2 += xt * xt;
  }
  r.dV = p.eta_scale * ((L - 2.0 * p.lambda) * s.V + 0.5 * L * m2 - 0.5 * L * x2);
  return r;
}

JacobianSpectrum jacobian_eigen(const ApproxSystemParams& p) {
  const double L = p.lambda * p.lambda + p.kappa * p.sigma * p.sigma;
  const double eig_m = -p.lambda * p.eta_scale;
  const double eig_V = (L - 2.0 * p.lambda) * p.eta_scale;
  return {eig_m, eig_V, eig_m < 0.0 && eig_V < 0.0};
}

void OdeTrajectory::push(double t, std::vector<double> y, std::vector<double> f) {
  t_.push_back(t);
  y_.push_back(std::move(y));
  f_.push_back(std::move(f));
}

std::vector<double> OdeTrajectory::at(double t) const {
  if (t_.empty()) throw std::logic_error("OdeTrajectory::at on an empty trajectory");
  if (t <= t_.front()) return y_.front();
  if (t >= t_.back()) return y_.back();
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  const double h = t_[i + 1] - t_[i];
  const double s = (t - t_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  std::vector<double> y(y_[i].size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    y[k] = h00 * y_[i][k] + h10 * h * f_[i][k] + h01 * y_[i + 1][k] + h11 * h * f_[i + 1][k];
  }
  return y;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double scaled_norm(std::span<const double> v, std::span<const double> scale) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += (v[i] / scale[i]) * (v[i] / scale[i]);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

OdeTrajectory integrate_ode(const OdeRhs& rhs, double t0, std::vector<double> y0, double t_end, double rel_tol,
                            double abs_tol) {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("integrate_ode: tolerances must be positive");
  const std::size_t n = y0.size();
  OdeTrajectory traj;

  std::vector<double> y = std::move(y0);
  std::vector<double> f(n);
  rhs(t0, y, f);
  traj.rhs_evaluations = 1;
  traj.push(t0, y, f);
  const double span = t_end - t0;
  if (span <= 0.0 || n == 0) return traj;

  std::vector<double> k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n), scale(n);

  // Starting step (Hairer, Norsett & Wanner, II.4).
  double h;
  {
    for (std::size_t i = 0; i < n; ++i) scale[i] = abs_tol + rel_tol * std::abs(y[i]);
    const double d0 = scaled_norm(y, scale);
    const double d1 = scaled_norm(f, scale);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h0 * f[i];
    rhs(t0 + h0, tmp, k2);
    ++traj.rhs_evaluations;
    for (std::size_t i = 0; i < n; ++i) err[i] = k2[i] - f[i];
    const double d2 = scaled_norm(err, scale) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, span});
  }

  const double h_min = 1e-14 * std::abs(span);
  double t = t0;
  bool last_rejected = false;
  while (t < t_end) {
    if (h < h_min) throw StiffnessError("integrate_ode: step size underflow at t = " + std::to_string(t));
    const bool final_step = t + h >= t_end;
    if (final_step) h = t_end - t;

    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * f[i];
    rhs(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * f[i] + a32 * k2[i]);
    rhs(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * f[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a61 * f[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const double t_new = final_step ? t_end : t + h;
    rhs(t_new, ynew, k7);
    traj.rhs_evaluations += 6;

    for (std::size_t i = 0; i < n; ++i) {
      err[i] = h * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      scale[i] = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
    }
    const double enorm = scaled_norm(err, scale);
    if (!std::isfinite(enorm)) throw NumericError("integrate_ode: non-finite error estimate");

    if (enorm <= 1.0) {
      t = t_new;
      y.swap(ynew);
      f.swap(k7);
      traj.push(t, y, f);
      double fac = enorm == 0.0 ? 5.0 : 0.9 * std::pow(enorm, -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h *= fac;
      last_rejected = false;
    } else {
      ++traj.rejected_steps;
      h *= std::max(0.2, 0.9 * std::pow(enorm, -0.2));
      last_rejected = true;
    }
  }
  return traj;
}

std::vector<MomentState> integrate_moments(const ApproxSystemParams& p, const MomentState& s0,
                                           std::span<const double> times, double rel_tol, double abs_tol) {
  const std::size_t d = s0.m.size();
  std::vector<double> y0(s0.m);
  y0.push_back(s0.V);
  const OdeRhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    MomentState s{{y.begin(), y.begin() + static_cast<std::ptrdiff_t>(d)}, y[d], 0.0};
    const MomentRates r = approx_rhs(s, p);
    std::copy(r.dm.begin(), r.dm.end(), dy.begin());
    dy[d] = r.dV;
  };
  const double t_end = times.empty() ? s0.t : std::max(s0.t, times.back());
  const OdeTrajectory traj = integrate_ode(rhs, s0.t, std::move(y0), t_end, rel_tol, abs_tol);

  std::vector<MomentState> out;
  out.reserve(times.size());
  for (double t : times) {
    const auto y = traj.at(t);
    out.push_back({{y.begin(), y.begin() + static_cast<std::ptrdiff_t>(d)}, y[d], t});
  }
  return out;
}

}  // namespace kvs
