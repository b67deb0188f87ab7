#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "kvsopt/prng.hpp"

namespace kvs {

/// N particle positions in R^d, stored row-major.
class ParticleEnsemble {
 public:
  ParticleEnsemble() = default;
  ParticleEnsemble(std::size_t n, std::size_t d, std::vector<double> positions);

  /// N * d independent U(lo, hi) draws, particle-major.
  static ParticleEnsemble uniform_box(std::size_t n, std::size_t d, double lo, double hi, RngStream& stream);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }

  std::span<const double> row(std::size_t i) const noexcept { return {pos_.data() + i * d_, d_}; }
  std::span<double> row(std::size_t i) noexcept { return {pos_.data() + i * d_, d_}; }
  std::span<const double> positions() const noexcept { return pos_; }
  std::span<double> positions() noexcept { return pos_; }

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> pos_;
};

struct ConsensusPoint {
  std::vector<double> point;
  /// log sum_i exp(-alpha * values[i]).
  double weight_log_norm = 0.0;
};

/// Laplace-weighted average sum_i x_i w_i / sum_i w_i with w_i = exp(-alpha values[i]),
/// formed with weights shifted by the minimum value so the largest weight is exactly 1.
ConsensusPoint consensus_point(const ParticleEnsemble& ensemble, std::span<const double> values, double alpha);

enum class DiffusionKind { isotropic, anisotropic };

DiffusionKind parse_diffusion(std::string_view name);
std::string_view to_string(DiffusionKind kind) noexcept;

/// kappa = d for isotropic and 1 for anisotropic exploration.
double kappa(DiffusionKind kind, std::size_t d) noexcept;

/// Diagonal of D: isotropic gives |cp - x| in every entry, anisotropic gives cp - x.
std::vector<double> diffusion_matrix_diag(std::span<const double> x, const ConsensusPoint& cp, DiffusionKind kind);

}  // namespace kvs
