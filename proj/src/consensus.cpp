#include "kvsopt/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kvsopt/errors.hpp"

namespace kvs {

ParticleEnsemble::ParticleEnsemble(std::size_t n, std::size_t d, std::vector<double> positions)
    : n_(n), d_(d), pos_(std::move(positions)) {
  if (n_ == 0 || d_ == 0 || pos_.size() != n_ * d_) {
    throw std::invalid_argument("ParticleEnsemble: positions must hold N * d values with N, d >= 1");
  }
}

ParticleEnsemble ParticleEnsemble::uniform_box(std::size_t n, std::size_t d, double lo, double hi,
                                               RngStream& stream) {
  std::vector<double> pos(n * d);
  for (auto& v : pos) v = lo + (hi - lo) * stream.next_uniform();
  return ParticleEnsemble(n, d, std::move(pos));
}

ConsensusPoint consensus_point(const ParticleEnsemble& ensemble, std::span<const double> values, double alpha) {
  const std::size_t n = ensemble.size();
  const std::size_t d = ensemble.dim();
  if (values.size() != n) throw std::invalid_argument("consensus_point: one value per particle required");

  double vmin = std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (std::isnan(v)) throw NumericError("consensus_point: NaN objective value");
    vmin = std::min(vmin, v);
  }
  if (!std::isfinite(vmin)) throw NumericError("consensus_point: no finite objective value");

  ConsensusPoint cp;
  cp.point.assign(d, 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(-alpha * (values[i] - vmin));
    if (w == 0.0) continue;
    wsum += w;
    const auto x = ensemble.row(i);
    for (std::size_t r = 0; r < d; ++r) cp.point[r] += w * x[r];
  }
  for (auto& c : cp.point) c /= wsum;
  cp.weight_log_norm = -alpha * vmin + std::log(wsum);
  return cp;
}

DiffusionKind parse_diffusion(std::string_view name) {
  if (name == "isotropic") return DiffusionKind::isotropic;
  if (name == "anisotropic") return DiffusionKind::anisotropic;
  throw ConfigError("optimizer.diffusion: expected isotropic or anisotropic, got '" + std::string(name) + "'");
}

std::string_view to_string(DiffusionKind kind) noexcept {
  return kind == DiffusionKind::isotropic ? "isotropic" : "anisotropic";
}

double kappa(DiffusionKind kind, std::size_t d) noexcept {
  return kind == DiffusionKind::isotropic ? static_cast<double>(d) : 1.0;
}

std::vector<double> diffusion_matrix_diag(std::span<const double> x, const ConsensusPoint& cp, DiffusionKind kind) {
  std::vector<double> diag(x.size());
  for (std::size_t r = 0; r < x.size(); ++r) diag[r] = cp.point[r] - x[r];
  if (kind == DiffusionKind::isotropic) {
    double s = 0.0;
    for (double v : diag) s += v * v;
    std::fill(diag.begin(), diag.end(), std::sqrt(s));
  }
  return diag;
}

}  // namespace kvs
