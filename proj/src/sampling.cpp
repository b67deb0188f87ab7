#include "kvsopt/sampling.hpp"

#include <cmath>
#include <numbers>

#include "kvsopt/errors.hpp"

namespace kvs {

SampleLaw SampleLaw::uniform(double a, double b, std::size_t k) { return {LawKind::uniform, a, b, k}; }

SampleLaw SampleLaw::exponential(double rate, std::size_t k) { return {LawKind::exponential, rate, 0.0, k}; }

SampleLaw SampleLaw::normal(double mean, double variance, std::size_t k) {
  return {LawKind::normal, mean, variance, k};
}

void SampleLaw::validate() const {
  if (k == 0) throw ConfigError("sampling law needs at least one component");
  switch (kind) {
    case LawKind::uniform:
      if (!(p1 < p2)) throw ConfigError("uniform law requires a < b");
      break;
    case LawKind::exponential:
      if (!(p1 > 0.0)) throw ConfigError("exponential law requires rate > 0");
      break;
    case LawKind::normal:
      if (!(p2 > 0.0)) throw ConfigError("normal law requires variance > 0");
      break;
  }
}

double SampleLaw::mean() const {
  switch (kind) {
    case LawKind::uniform: return 0.5 * (p1 + p2);
    case LawKind::exponential: return 1.0 / p1;
    case LawKind::normal: return p1;
  }
  return 0.0;
}

double SampleLaw::variance() const {
  switch (kind) {
    case LawKind::uniform: return (p2 - p1) * (p2 - p1) / 12.0;
    case LawKind::exponential: return 1.0 / (p1 * p1);
    case LawKind::normal: return p2;
  }
  return 0.0;
}

std::string SampleLaw::name() const {
  switch (kind) {
    case LawKind::uniform: return "uniform";
    case LawKind::exponential: return "exponential";
    case LawKind::normal: return "normal";
  }
  return {};
}

SampleLaw make_law(std::string_view theta, std::size_t k) {
  if (theta == "uniform") return SampleLaw::uniform(0.1, 1.9, k);
  if (theta == "exponential") return SampleLaw::exponential(1.0, k);
  if (theta == "normal") return SampleLaw::normal(1.0, 1.0, k);
  throw ConfigError("sampling.theta: unknown law '" + std::string(theta) + "'");
}

double draw_scalar(const SampleLaw& law, RngStream& stream) {
  switch (law.kind) {
    case LawKind::uniform: return law.p1 + (law.p2 - law.p1) * stream.next_uniform();
    case LawKind::exponential: return -std::log1p(-stream.next_uniform()) / law.p1;
    case LawKind::normal: return law.p1 + std::sqrt(law.p2) * stream.next_standard_normal();
  }
  return 0.0;
}

SampleBatch draw_batch(const SampleLaw& law, std::size_t M, RngStream& stream) {
  if (M == 0) throw ConfigError("sample size M must be positive");
  std::vector<double> entries(M * law.k);
  for (auto& v : entries) v = draw_scalar(law, stream);
  return SampleBatch(law.k, std::move(entries));
}

double law_density(const SampleLaw& law, double y) {
  switch (law.kind) {
    case LawKind::uniform: return (y >= law.p1 && y <= law.p2) ? 1.0 / (law.p2 - law.p1) : 0.0;
    case LawKind::exponential: return y < 0.0 ? 0.0 : law.p1 * std::exp(-law.p1 * y);
    case LawKind::normal: {
      const double z = y - law.p1;
      return std::exp(-0.5 * z * z / law.p2) / std::sqrt(2.0 * std::numbers::pi * law.p2);
    }
  }
  return 0.0;
}

}  // namespace kvs
