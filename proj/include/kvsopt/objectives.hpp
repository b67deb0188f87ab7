#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kvs {

/// A drawn sample (y^(1), ..., y^(M)), stored row-major as M entries of k components.
class SampleBatch {
 public:
  SampleBatch() = default;
  SampleBatch(std::size_t k, std::vector<double> entries);

  std::size_t size() const noexcept { return k_ == 0 ? 0 : entries_.size() / k_; }
  std::size_t dim() const noexcept { return k_; }
  bool empty() const noexcept { return entries_.empty(); }

  std::span<const double> entry(std::size_t j) const noexcept {
    return {entries_.data() + j * k_, k_};
  }
  std::span<const double> data() const noexcept { return entries_; }

  /// Componentwise sample means, summed in entry order.
  std::span<const double> means() const noexcept { return means_; }

 private:
  std::size_t k_ = 0;
  std::vector<double> entries_;
  std::vector<double> means_;
};

using PointFn = std::function<double(std::span<const double>)>;
using SampleFn = std::function<double(std::span<const double>)>;

/**
 * Evaluator for F(x, y) with x in R^d and y in R^k.
 *
 * Only `eval` is mandatory. `affine_features`, when present, states that
 * F(x, y) = phi_0(x) + sum_k y_k phi_k(x); it writes (phi_0, ..., phi_k) for a point
 * and lets sample averages be formed from the batch means in O(d + k) per particle.
 */
struct StochasticObjective {
  std::string name;
  std::size_t dim_x = 1;
  std::size_t dim_y = 2;

  std::function<double(std::span<const double> x, std::span<const double> y)> eval;
  PointFn expectation;

  // Sample-wise bounds: lower_bound(y) <= F(x, y) <= upper_bound(y) for all x.
  SampleFn lower_bound;
  SampleFn upper_bound;
  // Optional sup-norm bounds on the gradient and Hessian in x, never inferred.
  SampleFn grad_bound;
  SampleFn hess_bound;

  std::function<void(std::span<const double> x, std::span<double> phi)> affine_features;

  /// Known global minimizer of the expectation; empty when unknown.
  std::vector<double> minimizer;

  bool has_bounds() const noexcept { return lower_bound && upper_bound; }
  bool has_expectation() const noexcept { return static_cast<bool>(expectation); }
  bool is_affine() const noexcept { return static_cast<bool>(affine_features); }
};

/// Sample average approximation (1/M) sum_j F(x, y^(j)). Throws NonFiniteValue.
double eval_fhat_M(const StochasticObjective& obj, std::span<const double> x, const SampleBatch& batch);

/**
 * Evaluates the averaged estimator at every row of a row-major N x d position block:
 * out[i] = (1/B) sum_b fhat_M(x_i, batches[b]). With one batch this is exactly eval_fhat_M.
 */
void eval_fhat_M_rows(const StochasticObjective& obj, std::span<const double> positions,
                      std::span<const SampleBatch> batches, std::span<double> out);

struct SampleBounds {
  double lower;
  double upper;
};

/// Per-batch averages of the lower and upper bound functions. Throws BoundsUnavailable.
SampleBounds assumption1_bounds(const StochasticObjective& obj, const SampleBatch& batch);

/// F(x, y) = (1/d) sum_r [y1 (x_r - B)^2 - 10 y2 cos(2 pi (x_r - B)) + 10] + C.
/// The expectation uses E[Y1] = mean_y1 and E[Y2] = mean_y2.
StochasticObjective stochastic_rastrigin(std::size_t d, double B = 0.0, double C = 0.0,
                                         double mean_y1 = 1.0, double mean_y2 = 1.0);

/// F(x, y) = y1 * (1/d) sum_r (1 - cos x_r); bounds 0 <= F <= 2 y1. k = 2, y2 unused.
StochasticObjective bounded_cosine_toy(std::size_t d, double mean_y1 = 1.0);

/// F(x, y) = |x|^2, independent of y.
StochasticObjective quadratic_objective(std::size_t d, std::size_t k = 2);

/// F(x, y) = c.
StochasticObjective constant_objective(std::size_t d, double c, std::size_t k = 2);

struct ObjectiveOptions {
  std::size_t dim = 1;
  double B = 0.0;
  double C = 0.0;
  double mean_y1 = 1.0;
  double mean_y2 = 1.0;
};

using ObjectiveFactory = std::function<StochasticObjective(const ObjectiveOptions&)>;

/// Adds or replaces a named factory in the process-wide registry.
void register_objective(std::string name, ObjectiveFactory factory);

/// Builds a registered objective. Throws ConfigError for unknown names.
StochasticObjective make_objective(std::string_view name, const ObjectiveOptions& options);

std::vector<std::string> registered_objectives();

}  // namespace kvs
