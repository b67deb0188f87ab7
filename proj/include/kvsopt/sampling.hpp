#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "kvsopt/objectives.hpp"
#include "kvsopt/prng.hpp"

namespace kvs {

enum class LawKind { uniform, exponential, normal };

/// Product law for one sample entry: k independent components, each drawn from the same scalar law.
struct SampleLaw {
  LawKind kind = LawKind::uniform;
  double p1 = 0.1;  // uniform: a, exponential: rate, normal: mean
  double p2 = 1.9;  // uniform: b, normal: variance, unused otherwise
  std::size_t k = 2;

  static SampleLaw uniform(double a, double b, std::size_t k = 2);
  static SampleLaw exponential(double rate, std::size_t k = 2);
  static SampleLaw normal(double mean, double variance, std::size_t k = 2);

  /// Throws ConfigError when parameters are out of domain.
  void validate() const;
  double mean() const;
  double variance() const;
  std::string name() const;
};

/// Shipped laws by name: "uniform" = U(0.1, 1.9), "exponential" = E(1), "normal" = N(1, 1).
SampleLaw make_law(std::string_view theta, std::size_t k = 2);

/// One scalar draw; uniform and exponential use one uniform, normal uses Box-Muller.
double draw_scalar(const SampleLaw& law, RngStream& stream);

/// M independent entries of k components each, drawn entry-major.
SampleBatch draw_batch(const SampleLaw& law, std::size_t M, RngStream& stream);

/// Density of the scalar law at y.
double law_density(const SampleLaw& law, double y);

}  // namespace kvs
