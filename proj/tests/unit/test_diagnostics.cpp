#include <cmath>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "kvsopt/diagnostics.hpp"
#include "kvsopt/errors.hpp"

using namespace kvs;

TEST_CASE("C_alpha of a constant objective is exactly one") {
  RngStream s(1, 0);
  const auto est = estimate_c_alpha(constant_objective(2, 3.0), make_law("uniform"), 10, 50.0, 2000, s);
  CHECK(est.value == 1.0);
  CHECK(est.std_err == 0.0);
}

TEST_CASE("C_alpha tends to one as alpha tends to zero") {
  RngStream s(2, 0);
  const auto est = estimate_c_alpha(bounded_cosine_toy(2), make_law("uniform"), 5, 1e-9, 5000, s);
  CHECK(std::abs(est.value - 1.0) <= std::max(3.0 * est.std_err, 1e-8));
}

TEST_CASE("C_alpha Monte Carlo agrees with a quadrature oracle") {
  const auto law = make_law("uniform");
  const double alpha = 0.1;
  // Midpoint rule on the support of the scalar density with 1e4 nodes.
  const double a = 0.0, b = 2.0;
  const int n = 10'000;
  double quad = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = a + (b - a) * (i + 0.5) / n;
    quad += std::exp(alpha * 2.0 * y) * law_density(law, y);
  }
  quad *= (b - a) / n;
  const double closed = (std::exp(0.38) - std::exp(0.02)) / (0.2 * 1.8);
  CHECK(quad == doctest::Approx(closed).epsilon(1e-3));

  RngStream s(3, 0);
  const auto est = estimate_c_alpha(bounded_cosine_toy(1), law, 1, alpha, 100'000, s);
  CHECK(std::abs(est.value - quad) <= 3.0 * est.std_err);
}

TEST_CASE("C_alpha errors") {
  RngStream s(4, 0);
  CHECK_THROWS_AS(estimate_c_alpha(stochastic_rastrigin(2), make_law("uniform"), 5, 1.0, 2000, s), BoundsUnavailable);
  CHECK_THROWS_AS(estimate_c_alpha(bounded_cosine_toy(2), make_law("uniform"), 5, 1.0, 999, s), ConfigError);
  CHECK_THROWS_WITH_AS(estimate_c_alpha(bounded_cosine_toy(2), make_law("uniform"), 1, 1e4, 2000, s),
                       "C_alpha numerically infinite; reduce alpha", NumericError);
}

TEST_CASE("C_alpha sweep is monotone and at least one") {
  RngStream s(5, 0);
  const std::vector<double> alphas{0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  const auto est = estimate_c_alpha_sweep(bounded_cosine_toy(2), make_law("exponential"), 3, alphas, 3000, s);
  REQUIRE(est.size() == alphas.size());
  CHECK(est[0].value == 1.0);
  for (std::size_t i = 0; i < est.size(); ++i) {
    CHECK(est[i].value >= 1.0);
    if (i > 0) CHECK(est[i].value >= est[i - 1].value);
  }
}

TEST_CASE("sweep entries match single estimates on the same stream") {
  const std::vector<double> alphas{0.3, 1.7};
  RngStream a(6, 0);
  const auto sweep = estimate_c_alpha_sweep(bounded_cosine_toy(1), make_law("uniform"), 4, alphas, 1000, a);
  RngStream b(6, 0);
  const auto single = estimate_c_alpha(bounded_cosine_toy(1), make_law("uniform"), 4, 1.7, 1000, b);
  CHECK(sweep[1].value == single.value);
}

TEST_CASE("mu by hand") {
  auto a = convergence_mu(1.0, 0.0, 1.0, 1.0);
  CHECK(a.mu == 0.0);
  CHECK_FALSE(a.positive);
  auto b = convergence_mu(0.5, 0.1, 1.0, 1.2);
  CHECK(b.mu == doctest::Approx(0.376).epsilon(1e-14));
  CHECK(b.positive);
  auto c = convergence_mu(1.0, 7.0, 1.0, 1.0);
  CHECK(c.mu == -98.0);
  CHECK_FALSE(c.positive);
}

TEST_CASE("mu decreases in C_alpha and sigma, and respects the eigenvalue bound") {
  RngStream s(7, 0);
  for (int t = 0; t < 500; ++t) {
    const double l = 0.01 + 3.0 * s.next_uniform();
    const double sg = 3.0 * s.next_uniform();
    const double k = s.next_uniform() < 0.5 ? 1.0 : 20.0;
    const double C = 1.0 + 10.0 * s.next_uniform();
    const double mu = convergence_mu(l, sg, k, C).mu;
    CHECK(convergence_mu(l, sg, k, C + 0.5).mu < mu);
    CHECK(convergence_mu(l, sg + 0.1, k, C).mu < mu);
    const double L = l * l + k * sg * sg;
    CHECK(mu <= 2.0 * l - L + 1e-12);
  }
}

TEST_CASE("nu by hand") {
  NuInputs in{1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0};
  auto r = convergence_nu(in);
  CHECK(r.nu == 4.0);
  CHECK_FALSE(r.feasible);

  in.V0 = 0.0;
  r = convergence_nu(in);
  CHECK(r.nu == 0.0);
  CHECK(r.feasible);

  in.V0 = 2.0;
  in.c1 = 0.0;
  in.c2 = 0.0;
  r = convergence_nu(in);
  CHECK(r.nu == 0.0);
  CHECK(r.feasible);

  in.mu = 0.0;
  CHECK_THROWS_WITH_AS(convergence_nu(in), "concentration condition fails", ConfigError);
}

TEST_CASE("nu uses max(sqrt(V0), V0)") {
  NuInputs in{2.0, 1.5, 0.5, 0.7, 0.2, 1.0, 0.3, 0.4, 0.1, 0.25, 0.8};
  const double L = 0.49 + 0.04;
  const double pre = 2.0 / (2.0 * 0.8) * 0.5 * std::exp(-0.05) * (2.0 * 0.7 * 0.3 * std::sqrt(1.5) + L * 0.4 * 1.5);
  CHECK(convergence_nu(in).nu == doctest::Approx(pre * 0.5).epsilon(1e-14));
  in.V0 = 4.0;
  CHECK(convergence_nu(in).nu == doctest::Approx(pre * 4.0).epsilon(1e-14));
}

TEST_CASE("omega norm of a constant function") {
  RngStream s(8, 0);
  const PointFn f = [](std::span<const double>) { return 2.0; };
  const auto est = estimate_omega_norm(f, 3, -1.0, 1.0, 0.5, 1000, s);
  CHECK(est.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("omega norm Monte Carlo matches a closed form") {
  // E[exp(-x^2)] for x ~ U(-1, 1) is sqrt(pi) erf(1) / 2.
  RngStream s(9, 0);
  const PointFn f = [](std::span<const double> x) { return x[0] * x[0]; };
  const auto est = estimate_omega_norm(f, 1, -1.0, 1.0, 1.0, 100'000, s);
  const double exact = std::sqrt(M_PI) * std::erf(1.0) / 2.0;
  CHECK(std::abs(est.value - exact) <= 3.0 * est.std_err);
}

TEST_CASE("consensus spread vanishes for a collapsed ensemble") {
  RngStream s(10, 0);
  const ParticleEnsemble e(4, 2, {0.5, 1.0, 0.5, 1.0, 0.5, 1.0, 0.5, 1.0});
  const auto est = empirical_consensus_spread(e, stochastic_rastrigin(2), make_law("uniform"), 5, 30.0, 10, s);
  CHECK(est.value == 0.0);
}

TEST_CASE("consensus spread at small alpha is twice the variance") {
  RngStream s(11, 0);
  const auto e = ParticleEnsemble::uniform_box(40, 2, -1.0, 1.0, s);
  double m[2] = {0, 0};
  for (std::size_t i = 0; i < 40; ++i)
    for (int r = 0; r < 2; ++r) m[r] += e.row(i)[r] / 40.0;
  double v = 0.0;
  for (std::size_t i = 0; i < 40; ++i)
    for (int r = 0; r < 2; ++r) v += (e.row(i)[r] - m[r]) * (e.row(i)[r] - m[r]) / 40.0;
  const auto est = empirical_consensus_spread(e, stochastic_rastrigin(2), make_law("uniform"), 5, 1e-12, 3, s);
  CHECK(est.value == doctest::Approx(v).epsilon(1e-9));
}

TEST_CASE("report JSON") {
  ConvergenceReport r;
  r.C_alpha = 1.2;
  r.mu = 0.376;
  r.mu_positive = true;
  auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["C_alpha"] == 1.2);
  CHECK(j["mu_positive"] == true);
  CHECK(j["nu"].is_null());
  r.nu = 0.1;
  r.nu_feasible = true;
  j = nlohmann::json::parse(r.to_json());
  CHECK(j["nu"] == 0.1);
  CHECK(j["nu_feasible"] == true);
}
