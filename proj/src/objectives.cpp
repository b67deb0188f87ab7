#include "kvsopt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "kvsopt/errors.hpp"

namespace kvs {

SampleBatch::SampleBatch(std::size_t k, std::vector<double> entries)
    : k_(k), entries_(std::move(entries)), means_(k, 0.0) {
  if (k_ == 0 || entries_.size() % k_ != 0) {
    throw std::invalid_argument("SampleBatch: entry block is not a multiple of k");
  }
  const std::size_t m = size();
  if (m == 0) return;
  // Shifted by the first entry, so a batch of identical entries has that entry as its exact mean.
  for (std::size_t j = 1; j < m; ++j) {
    for (std::size_t c = 0; c < k_; ++c) means_[c] += entries_[j * k_ + c] - entries_[c];
  }
  for (std::size_t c = 0; c < k_; ++c) means_[c] = entries_[c] + means_[c] / static_cast<double>(m);
}

namespace {

[[noreturn]] void throw_first_nonfinite(const StochasticObjective& obj, std::span<const double> x,
                                        const SampleBatch& batch, double fallback) {
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const double v = obj.eval(x, batch.entry(j));
    if (!std::isfinite(v)) throw NonFiniteValue({x.begin(), x.end()}, j, v);
  }
  // Every term was finite but the average overflowed.
  throw NonFiniteValue({x.begin(), x.end()}, batch.size(), fallback);
}

double affine_value(std::span<const double> phi, std::span<const double> means) {
  double v = phi[0];
  for (std::size_t c = 0; c < means.size(); ++c) v += means[c] * phi[c + 1];
  return v;
}

}  // namespace

double eval_fhat_M(const StochasticObjective& obj, std::span<const double> x, const SampleBatch& batch) {
  double value = 0.0;
  if (obj.is_affine()) {
    std::vector<double> phi(batch.dim() + 1);
    obj.affine_features(x, phi);
    value = affine_value(phi, batch.means());
    if (!std::isfinite(value)) throw_first_nonfinite(obj, x, batch, value);
    return value;
  }
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const double v = obj.eval(x, batch.entry(j));
    if (!std::isfinite(v)) throw NonFiniteValue({x.begin(), x.end()}, j, v);
    value += v;
  }
  return value / static_cast<double>(batch.size());
}

void eval_fhat_M_rows(const StochasticObjective& obj, std::span<const double> positions,
                      std::span<const SampleBatch> batches, std::span<double> out) {
  const std::size_t d = obj.dim_x;
  const std::size_t n = out.size();
  const double inv_b = 1.0 / static_cast<double>(batches.size());
  if (obj.is_affine()) {
    std::vector<double> phi(obj.dim_y + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = positions.subspan(i * d, d);
      obj.affine_features(x, phi);
      double acc = 0.0;
      for (const auto& batch : batches) {
        const double v = affine_value(phi, batch.means());
        if (!std::isfinite(v)) throw_first_nonfinite(obj, x, batch, v);
        acc += v;
      }
      out[i] = batches.size() == 1 ? acc : acc * inv_b;
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = positions.subspan(i * d, d);
    double acc = 0.0;
    for (const auto& batch : batches) acc += eval_fhat_M(obj, x, batch);
    out[i] = batches.size() == 1 ? acc : acc * inv_b;
  }
}

SampleBounds assumption1_bounds(const StochasticObjective& obj, const SampleBatch& batch) {
  if (!obj.has_bounds()) throw BoundsUnavailable();
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    lo += obj.lower_bound(batch.entry(j));
    hi += obj.upper_bound(batch.entry(j));
  }
  const auto m = static_cast<double>(batch.size());
  return {lo / m, hi / m};
}

StochasticObjective stochastic_rastrigin(std::size_t d, double B, double C, double mean_y1, double mean_y2) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double inv_d = 1.0 / static_cast<double>(d);
  // F(x, y) = (10 + C) + y1 * (1/d) sum z^2 + y2 * (-10/d) sum cos(2 pi z), z = x - B.
  auto features = [=](std::span<const double> x, std::span<double> phi) {
    double sq = 0.0;
    double cs = 0.0;
    for (double xr : x) {
      const double z = xr - B;
      sq += z * z;
      cs += std::cos(two_pi * z);
    }
    phi[0] = 10.0 + C;
    phi[1] = sq * inv_d;
    phi[2] = -10.0 * cs * inv_d;
  };

  StochasticObjective obj;
  obj.name = "stochastic_rastrigin";
  obj.dim_x = d;
  obj.dim_y = 2;
  obj.eval = [features](std::span<const double> x, std::span<const double> y) {
    double phi[3];
    features(x, phi);
    return affine_value(phi, y);
  };
  obj.expectation = [features, mean_y1, mean_y2](std::span<const double> x) {
    double phi[3];
    features(x, phi);
    const double means[2] = {mean_y1, mean_y2};
    return affine_value(phi, means);
  };
  obj.affine_features = features;
  obj.minimizer.assign(d, B);
  return obj;
}

StochasticObjective bounded_cosine_toy(std::size_t d, double mean_y1) {
  const double inv_d = 1.0 / static_cast<double>(d);
  auto shape = [inv_d](std::span<const double> x) {
    double s = 0.0;
    for (double xr : x) s += 1.0 - std::cos(xr);
    return s * inv_d;
  };

  StochasticObjective obj;
  obj.name = "bounded_cosine_toy";
  obj.dim_x = d;
  obj.dim_y = 2;
  obj.eval = [shape](std::span<const double> x, std::span<const double> y) { return y[0] * shape(x); };
  obj.expectation = [shape, mean_y1](std::span<const double> x) { return mean_y1 * shape(x); };
  obj.affine_features = [shape](std::span<const double> x, std::span<double> phi) {
    phi[0] = 0.0;
    phi[1] = shape(x);
    phi[2] = 0.0;
  };
  // Valid for y1 >= 0, which holds for the uniform and exponential laws.
  obj.lower_bound = [](std::span<const double>) { return 0.0; };
  obj.upper_bound = [](std::span<const double> y) { return 2.0 * y[0]; };
  obj.grad_bound = [inv_d](std::span<const double> y) { return std::abs(y[0]) * std::sqrt(inv_d); };
  obj.hess_bound = [inv_d](std::span<const double> y) { return std::abs(y[0]) * inv_d; };
  obj.minimizer.assign(d, 0.0);
  return obj;
}

StochasticObjective quadratic_objective(std::size_t d, std::size_t k) {
  auto sq = [](std::span<const double> x) {
    double s = 0.0;
    for (double xr : x) s += xr * xr;
    return s;
  };
  StochasticObjective obj;
  obj.name = "quadratic";
  obj.dim_x = d;
  obj.dim_y = k;
  obj.eval = [sq](std::span<const double> x, std::span<const double>) { return sq(x); };
  obj.expectation = sq;
  obj.affine_features = [sq](std::span<const double> x, std::span<double> phi) {
    std::fill(phi.begin(), phi.end(), 0.0);
    phi[0] = sq(x);
  };
  obj.minimizer.assign(d, 0.0);
  return obj;
}

StochasticObjective constant_objective(std::size_t d, double c, std::size_t k) {
  StochasticObjective obj;
  obj.name = "constant";
  obj.dim_x = d;
  obj.dim_y = k;
  obj.eval = [c](std::span<const double>, std::span<const double>) { return c; };
  obj.expectation = [c](std::span<const double>) { return c; };
  obj.affine_features = [c](std::span<const double>, std::span<double> phi) {
    std::fill(phi.begin(), phi.end(), 0.0);
    phi[0] = c;
  };
  obj.lower_bound = [c](std::span<const double>) { return c; };
  obj.upper_bound = [c](std::span<const double>) { return c; };
  obj.grad_bound = [](std::span<const double>) { return 0.0; };
  obj.hess_bound = [](std::span<const double>) { return 0.0; };
  return obj;
}

namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, ObjectiveFactory, std::less<>> factories{
      {"stochastic_rastrigin",
       [](const ObjectiveOptions& o) { return stochastic_rastrigin(o.dim, o.B, o.C, o.mean_y1, o.mean_y2); }},
      {"bounded_cosine_toy", [](const ObjectiveOptions& o) { return bounded_cosine_toy(o.dim, o.mean_y1); }},
      {"quadratic", [](const ObjectiveOptions& o) { return quadratic_objective(o.dim); }},
  };
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_objective(std::string name, ObjectiveFactory factory) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.factories[std::move(name)] = std::move(factory);
}

StochasticObjective make_objective(std::string_view name, const ObjectiveOptions& options) {
  if (options.dim == 0) throw ConfigError("objective.dim must be positive");
  ObjectiveFactory factory;
  {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    const auto it = r.factories.find(name);
    if (it == r.factories.end()) {
      throw ConfigError("objective.name: unknown objective '" + std::string(name) + "'");
    }
    factory = it->second;
  }
  return factory(options);
}

std::vector<std::string> registered_objectives() {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  std::vector<std::string> names;
  for (const auto& [name, _] : r.factories) names.push_back(name);
  return names;
}

}  // namespace kvs
