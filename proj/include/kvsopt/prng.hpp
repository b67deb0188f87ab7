#pragma once

#include <array>
#include <cstdint>

namespace kvs {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer, used to derive substream keys.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/**
 * Counter-based random stream.
 *
 * The master seed is the Philox key; the stream id occupies the upper half of the
 * counter, so streams with distinct ids never share a block. The lower half counts
 * blocks. Each block yields two 64-bit words.
 *
 * A stream is single-owner: hand each concurrent task its own stream (see derive()).
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Child stream keyed on (seed, hash(stream_id, sub)); independent of this stream's position.
  RngStream derive(std::uint64_t sub) const noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform() noexcept;

  /// Standard normal via Box-Muller. Uniforms are consumed in pairs and both outputs
  /// are used, so two normals always cost exactly two uniforms.
  double next_standard_normal() noexcept;

  /// Uniform integer in [0, n). Consumes one uniform. n must be positive.
  std::uint64_t next_index(std::uint64_t n) noexcept;

  /// Number of 64-bit words consumed so far.
  std::uint64_t words_consumed() const noexcept { return words_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  std::uint64_t words_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace kvs
