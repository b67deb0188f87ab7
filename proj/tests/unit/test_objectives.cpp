#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "kvsopt/errors.hpp"
#include "kvsopt/objectives.hpp"
#include "kvsopt/prng.hpp"
#include "kvsopt/sampling.hpp"

using namespace kvs;

namespace {

// Direct transcription of the stochastic Rastrigin formula, independent of the library's feature form.
double rastrigin_ref(std::span<const double> x, double y1, double y2, double B = 0.0, double C = 0.0) {
  double s = 0.0;
  for (double xr : x) {
    const double z = xr - B;
    s += y1 * z * z - 10.0 * y2 * std::cos(2.0 * std::numbers::pi * z) + 10.0;
  }
  return s / static_cast<double>(x.size()) + C;
}

SampleBatch batch_of(std::vector<std::vector<double>> rows) {
  std::vector<double> flat;
  for (auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return SampleBatch(rows.front().size(), flat);
}

}  // namespace

TEST_CASE("rastrigin at the origin with y2 = 1 is zero") {
  const auto obj = stochastic_rastrigin(20);
  const std::vector<double> x(20, 0.0);
  CHECK(eval_fhat_M(obj, x, batch_of({{0.3, 1.0}, {1.7, 1.0}, {5.0, 1.0}})) == 0.0);
  CHECK(obj.expectation(x) == 0.0);
}

TEST_CASE("rastrigin hand value d=1, y=(2, 0.5), x=1 is 7") {
  const auto obj = stochastic_rastrigin(1);
  const std::vector<double> x{1.0};
  CHECK(eval_fhat_M(obj, x, batch_of({{2.0, 0.5}})) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(obj.eval(x, std::vector<double>{2.0, 0.5}) == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("rastrigin expectation at ones in d=20 is 1") {
  const auto obj = stochastic_rastrigin(20);
  const std::vector<double> x(20, 1.0);
  CHECK(obj.expectation(x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("F(x, (1,1)) equals the expectation and the reference formula") {
  const auto obj = stochastic_rastrigin(5, 0.3, -1.25);
  RngStream s(11, 0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(5);
    for (auto& v : x) v = -3.0 + 6.0 * s.next_uniform();
    const std::vector<double> y{1.0, 1.0};
    CHECK(obj.eval(x, y) == obj.expectation(x));
    CHECK(obj.eval(x, y) == doctest::Approx(rastrigin_ref(x, 1.0, 1.0, 0.3, -1.25)).epsilon(1e-12));
    const std::vector<double> y2{0.4, 1.6};
    CHECK(obj.eval(x, y2) == doctest::Approx(rastrigin_ref(x, 0.4, 1.6, 0.3, -1.25)).epsilon(1e-12));
  }
}

TEST_CASE("affine fast path matches the per-entry average") {
  const auto obj = stochastic_rastrigin(4);
  RngStream s(3, 1);
  const SampleBatch batch = draw_batch(SampleLaw::normal(1.0, 1.0), 200, s);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(4);
    for (auto& v : x) v = -3.0 + 6.0 * s.next_uniform();
    double ref = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
      ref += rastrigin_ref(x, batch.entry(j)[0], batch.entry(j)[1]);
    }
    ref /= static_cast<double>(batch.size());
    CHECK(eval_fhat_M(obj, x, batch) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("constant objective gives its constant") {
  const auto obj = constant_objective(3, 2.5);
  const std::vector<double> x{1.0, -7.0, 0.1};
  CHECK(eval_fhat_M(obj, x, batch_of({{0.1, 0.2}, {9.0, 3.0}})) == 2.5);
  const auto b = assumption1_bounds(obj, batch_of({{0.1, 0.2}}));
  CHECK(b.lower == 2.5);
  CHECK(b.upper == 2.5);
}

TEST_CASE("toy objective bounds") {
  const auto obj = bounded_cosine_toy(1);
  const auto ones = assumption1_bounds(obj, batch_of({{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}}));
  CHECK(ones.lower == 0.0);
  CHECK(ones.upper == doctest::Approx(2.0));
  const auto mixed = assumption1_bounds(obj, batch_of({{0.1, 0.0}, {1.9, 0.0}}));
  CHECK(mixed.lower == 0.0);
  CHECK(mixed.upper == doctest::Approx((0.2 + 3.8) / 2.0));
}

TEST_CASE("toy objective respects its bounds at random points") {
  const auto obj = bounded_cosine_toy(3);
  RngStream s(8, 0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> x(3);
    for (auto& v : x) v = -20.0 + 40.0 * s.next_uniform();
    const std::vector<double> y{0.1 + 1.8 * s.next_uniform(), 1.0};
    const double f = obj.eval(x, y);
    CHECK(f >= obj.lower_bound(y));
    CHECK(f <= obj.upper_bound(y));
  }
}

TEST_CASE("rastrigin has no bounds") {
  const auto obj = stochastic_rastrigin(2);
  CHECK_THROWS_AS(assumption1_bounds(obj, batch_of({{1.0, 1.0}})), BoundsUnavailable);
  CHECK_THROWS_WITH(assumption1_bounds(obj, batch_of({{1.0, 1.0}})), "bounds unavailable");
}

TEST_CASE("fhat_M is permutation invariant and exact for identical entries") {
  const auto obj = stochastic_rastrigin(3);
  const std::vector<double> x{0.2, -1.1, 2.4};
  const auto a = batch_of({{0.5, 1.2}, {1.5, 0.3}, {0.9, 1.9}});
  const auto b = batch_of({{0.9, 1.9}, {0.5, 1.2}, {1.5, 0.3}});
  CHECK(eval_fhat_M(obj, x, a) == doctest::Approx(eval_fhat_M(obj, x, b)).epsilon(1e-14));

  const std::vector<double> y{0.1, 0.7};
  const auto same = batch_of({y, y, y, y, y, y, y});
  CHECK(eval_fhat_M(obj, x, same) == obj.eval(x, y));
}

TEST_CASE("fhat_M converges to f for M = 1e5") {
  const auto obj = stochastic_rastrigin(20);
  const auto law = make_law("uniform");
  RngStream s(12, 0);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> x(20);
    for (auto& v : x) v = -3.0 + 6.0 * s.next_uniform();
    const SampleBatch batch = draw_batch(law, 100'000, s);
    CHECK(std::abs(eval_fhat_M(obj, x, batch) - obj.expectation(x)) < 0.05);
  }
}

TEST_CASE("rows evaluation with one batch equals the scalar estimator bitwise") {
  const auto obj = stochastic_rastrigin(6);
  RngStream s(4, 2);
  const SampleBatch batch = draw_batch(make_law("exponential"), 50, s);
  std::vector<double> pos(6 * 10);
  for (auto& v : pos) v = -3.0 + 6.0 * s.next_uniform();
  std::vector<double> out(10);
  eval_fhat_M_rows(obj, pos, std::span(&batch, 1), out);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(out[i] == eval_fhat_M(obj, std::span<const double>(pos).subspan(i * 6, 6), batch));
  }
}

TEST_CASE("non-finite value reports the offending entry") {
  StochasticObjective obj;
  obj.name = "blowup";
  obj.dim_x = 1;
  obj.dim_y = 1;
  obj.eval = [](std::span<const double> x, std::span<const double> y) { return x[0] / (y[0] - 2.0); };
  const std::vector<double> x{1.0};
  try {
    eval_fhat_M(obj, x, batch_of({{1.0}, {3.0}, {2.0}, {4.0}}));
    FAIL("expected NonFiniteValue");
  } catch (const NonFiniteValue& e) {
    CHECK(e.sample_index() == 2);
    CHECK(e.x() == x);
    CHECK(std::isinf(e.value()));
  }
}

TEST_CASE("registry") {
  const auto names = registered_objectives();
  CHECK(std::find(names.begin(), names.end(), "stochastic_rastrigin") != names.end());
  CHECK(std::find(names.begin(), names.end(), "bounded_cosine_toy") != names.end());
  ObjectiveOptions o;
  o.dim = 3;
  CHECK(make_objective("stochastic_rastrigin", o).dim_x == 3);
  CHECK_THROWS_AS(make_objective("nope", o), ConfigError);
  register_objective("shifted_quadratic", [](const ObjectiveOptions& opt) {
    auto q = quadratic_objective(opt.dim);
    q.name = "shifted_quadratic";
    return q;
  });
  CHECK(make_objective("shifted_quadratic", o).name == "shifted_quadratic");
}
