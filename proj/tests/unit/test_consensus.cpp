#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "kvsopt/consensus.hpp"
#include "kvsopt/errors.hpp"

using namespace kvs;

namespace {

ParticleEnsemble random_ensemble(std::size_t n, std::size_t d, RngStream& s) {
  return ParticleEnsemble::uniform_box(n, d, -3.0, 3.0, s);
}

// Unshifted softmax in long double as an independent oracle.
std::vector<double> naive_consensus(const ParticleEnsemble& e, std::span<const double> v, double alpha) {
  std::vector<long double> num(e.dim(), 0.0L);
  long double den = 0.0L;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const long double w = std::exp(-static_cast<long double>(alpha) * v[i]);
    den += w;
    for (std::size_t r = 0; r < e.dim(); ++r) num[r] += w * e.row(i)[r];
  }
  std::vector<double> out(e.dim());
  for (std::size_t r = 0; r < e.dim(); ++r) out[r] = static_cast<double>(num[r] / den);
  return out;
}

}  // namespace

TEST_CASE("single particle is its own consensus") {
  const ParticleEnsemble e(1, 3, {0.5, -2.0, 7.0});
  const std::vector<double> v{123.0};
  for (double alpha : {1e-10, 1.0, 1e5}) CHECK(consensus_point(e, v, alpha).point == std::vector<double>{0.5, -2.0, 7.0});
}

TEST_CASE("two particles with equal values give the midpoint") {
  const ParticleEnsemble e(2, 1, {0.0, 1.0});
  const std::vector<double> v{3.0, 3.0};
  CHECK(consensus_point(e, v, 30.0).point[0] == 0.5);
}

TEST_CASE("alpha 1e5 concentrates on the argmin") {
  const ParticleEnsemble e(3, 1, {0.0, 1.0, 2.0});
  const std::vector<double> v{1.0, 0.0, 1.0};
  CHECK(std::abs(consensus_point(e, v, 1e5).point[0] - 1.0) < 1e-12);
}

TEST_CASE("matches an unshifted long-double oracle at moderate alpha") {
  RngStream s(1, 0);
  const auto e = random_ensemble(40, 3, s);
  std::vector<double> v(40);
  for (auto& x : v) x = 5.0 * s.next_uniform();
  const auto cp = consensus_point(e, v, 2.0);
  const auto ref = naive_consensus(e, v, 2.0);
  for (std::size_t r = 0; r < 3; ++r) CHECK(cp.point[r] == doctest::Approx(ref[r]).epsilon(1e-12));
  long double den = 0.0L;
  for (double x : v) den += std::exp(-2.0L * x);
  CHECK(cp.weight_log_norm == doctest::Approx(static_cast<double>(std::log(den))).epsilon(1e-12));
}

TEST_CASE("finite when raw weights underflow") {
  RngStream s(2, 0);
  const auto e = random_ensemble(20, 2, s);
  std::vector<double> v(20);
  for (auto& x : v) x = 1000.0 + s.next_uniform();
  const auto cp = consensus_point(e, v, 1e5);
  for (double p : cp.point) CHECK(std::isfinite(p));
}

TEST_CASE("translation equivariance") {
  RngStream s(3, 0);
  for (int t = 0; t < 20; ++t) {
    const auto e = random_ensemble(15, 4, s);
    std::vector<double> v(15);
    for (auto& x : v) x = 3.0 * s.next_uniform();
    std::vector<double> c(4);
    for (auto& x : c) x = -10.0 + 20.0 * s.next_uniform();
    std::vector<double> shifted(e.positions().begin(), e.positions().end());
    for (std::size_t i = 0; i < 15; ++i)
      for (std::size_t r = 0; r < 4; ++r) shifted[i * 4 + r] += c[r];
    const ParticleEnsemble es(15, 4, shifted);
    const double alpha = std::pow(10.0, -2.0 + 6.0 * s.next_uniform());
    const auto a = consensus_point(e, v, alpha).point;
    const auto b = consensus_point(es, v, alpha).point;
    for (std::size_t r = 0; r < 4; ++r) CHECK(b[r] == doctest::Approx(a[r] + c[r]).epsilon(1e-12).scale(10.0));
  }
}

TEST_CASE("value shift invariance is bitwise") {
  RngStream s(4, 0);
  for (int t = 0; t < 20; ++t) {
    const auto e = random_ensemble(12, 3, s);
    // Dyadic values so adding the shift is exact.
    std::vector<double> v(12), w(12);
    const double shift = std::ldexp(static_cast<double>(s.next_index(1000)), -3);
    for (std::size_t i = 0; i < 12; ++i) {
      v[i] = std::ldexp(static_cast<double>(s.next_index(4096)), -10);
      w[i] = v[i] + shift;
    }
    const double alpha = 1.0 + 100.0 * s.next_uniform();
    CHECK(consensus_point(e, v, alpha).point == consensus_point(e, w, alpha).point);
  }
}

TEST_CASE("alpha to zero gives the arithmetic mean") {
  RngStream s(5, 0);
  const auto e = random_ensemble(30, 2, s);
  std::vector<double> v(30);
  for (auto& x : v) x = 50.0 * s.next_uniform();
  const auto cp = consensus_point(e, v, 1e-14);
  for (std::size_t r = 0; r < 2; ++r) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 30; ++i) mean += e.row(i)[r];
    mean /= 30.0;
    CHECK(std::abs(cp.point[r] - mean) < 1e-10);
  }
}

TEST_CASE("consensus lies in the componentwise hull") {
  RngStream s(6, 0);
  for (int t = 0; t < 50; ++t) {
    const auto e = random_ensemble(10, 3, s);
    std::vector<double> v(10);
    for (auto& x : v) x = 10.0 * s.next_uniform();
    const auto cp = consensus_point(e, v, std::pow(10.0, 6.0 * s.next_uniform() - 1.0));
    for (std::size_t r = 0; r < 3; ++r) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t i = 0; i < 10; ++i) {
        lo = std::min(lo, e.row(i)[r]);
        hi = std::max(hi, e.row(i)[r]);
      }
      CHECK(cp.point[r] >= lo);
      CHECK(cp.point[r] <= hi);
    }
  }
}

TEST_CASE("NaN values are rejected") {
  const ParticleEnsemble e(2, 1, {0.0, 1.0});
  const std::vector<double> v{0.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(consensus_point(e, v, 1.0), NumericError);
}

TEST_CASE("diffusion diagonals") {
  const ConsensusPoint cp{{3.0, 4.0}, 0.0};
  const std::vector<double> origin{0.0, 0.0};
  CHECK(diffusion_matrix_diag(origin, cp, DiffusionKind::isotropic) == std::vector<double>{5.0, 5.0});
  CHECK(diffusion_matrix_diag(origin, cp, DiffusionKind::anisotropic) == std::vector<double>{3.0, 4.0});
  const std::vector<double> at{3.0, 4.0};
  CHECK(diffusion_matrix_diag(at, cp, DiffusionKind::isotropic) == std::vector<double>{0.0, 0.0});
  CHECK(diffusion_matrix_diag(at, cp, DiffusionKind::anisotropic) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("sum of squared diagonal entries is kappa |cp - x|^2") {
  RngStream s(7, 0);
  for (std::size_t d : {1u, 2u, 5u, 20u}) {
    for (int t = 0; t < 25; ++t) {
      std::vector<double> x(d), c(d);
      // Integer-valued coordinates keep both sides exact.
      for (auto& v : x) v = static_cast<double>(s.next_index(21)) - 10.0;
      for (auto& v : c) v = static_cast<double>(s.next_index(21)) - 10.0;
      double dist2 = 0.0;
      for (std::size_t r = 0; r < d; ++r) dist2 += (c[r] - x[r]) * (c[r] - x[r]);
      const ConsensusPoint cp{c, 0.0};
      for (DiffusionKind kind : {DiffusionKind::isotropic, DiffusionKind::anisotropic}) {
        const auto D = diffusion_matrix_diag(x, cp, kind);
        double sum = 0.0;
        for (double v : D) sum += v * v;
        CHECK(sum == doctest::Approx(kappa(kind, d) * dist2).epsilon(1e-14));
      }
    }
  }
  CHECK(kappa(DiffusionKind::isotropic, 7) == 7.0);
  CHECK(kappa(DiffusionKind::anisotropic, 7) == 1.0);
}

TEST_CASE("diffusion names") {
  CHECK(parse_diffusion("isotropic") == DiffusionKind::isotropic);
  CHECK(parse_diffusion("anisotropic") == DiffusionKind::anisotropic);
  CHECK(to_string(DiffusionKind::isotropic) == "isotropic");
  CHECK_THROWS_AS(parse_diffusion("radial"), ConfigError);
}
