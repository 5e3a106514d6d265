#include <doctest.h>

#include "freedeconv/marchenko_pastur.hpp"
#include "freedeconv/measure.hpp"
#include "support.hpp"

using namespace freedeconv;
using fdtest::Gen;

namespace {

DiscreteMeasure two_atom() { return DiscreteMeasure(Eigen::Vector2d(1, 2), Eigen::Vector2d(0.5, 0.5)); }

}  // namespace

TEST_CASE("measure construction enforces invariants") {
  CHECK_THROWS_AS(DiscreteMeasure(Eigen::Vector2d(1, 2), Eigen::Vector2d(0.5, 0.6)), ContractViolation);
  CHECK_THROWS_AS(DiscreteMeasure(Eigen::Vector2d(1, 2), Eigen::Vector2d(1.0, 0.0)), ContractViolation);
  CHECK_THROWS_AS(DiscreteMeasure(Eigen::VectorXd(0), Eigen::VectorXd(0)), ContractViolation);
  CHECK_THROWS_AS(DiscreteMeasure(Eigen::Vector2d(1, NAN), Eigen::Vector2d(0.5, 0.5)), ContractViolation);

  // unsorted input is sorted, near-duplicates merged
  const DiscreteMeasure mu(Eigen::Vector3d(3, 1, 1 + 1e-12), Eigen::Vector3d(0.5, 0.25, 0.25));
  REQUIRE(mu.size() == 2);
  CHECK(mu.atoms()(0) == doctest::Approx(1.0));
  CHECK(mu.weights()(0) == doctest::Approx(0.5));
  CHECK(mu.atoms()(1) == 3.0);

  const auto nu = DiscreteMeasure::from_unnormalized(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(2, 0, 2));
  CHECK(nu.size() == 2);
  CHECK(nu.weights().sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("stieltjes examples") {
  CHECK(std::abs(stieltjes(DiscreteMeasure::dirac(1.0), cdouble(2.0)) - 1.0) < 1e-15);
  CHECK(std::abs(stieltjes(two_atom(), cdouble(1.5))) < 1e-15);
  CHECK(std::abs(stieltjes(two_atom(), cdouble(1.5, 0.5)) - cdouble(0, -1)) < 1e-14);
  CHECK_THROWS_AS(stieltjes(two_atom(), cdouble(2.0, 1e-16)), NumericalError);
}

TEST_CASE("moment map examples") {
  const double a = 2.5;
  const cdouble z(0.3, -1.7);
  CHECK(std::abs(moment_map(DiscreteMeasure::dirac(a), z) - a / (z - a)) < 1e-14);
  CHECK(std::abs(moment_map(two_atom(), cdouble(1.5, 0.5)) - cdouble(-0.5, -1.5)) < 1e-14);

  Gen g(11);
  for (int t = 0; t < 20; ++t) {
    const auto mu = g.measure(g.integer(1, 6), -5, 5);
    const double big = 1e8;
    CHECK(std::abs(moment_map(mu, cdouble(big, 0.0))) < 1e-7 * std::max(1.0, std::abs(mu.max_atom())));
    const cdouble w = g.upper_half(4);
    CHECK(std::abs(moment_map(mu, w) - (w * stieltjes(mu, w) - 1.0)) < 1e-12);
  }
}

TEST_CASE("moment map derivative against central differences") {
  Gen g(12);
  for (int t = 0; t < 20; ++t) {
    const auto mu = g.measure(g.integer(1, 6), 0.1, 5);
    const cdouble z = g.upper_half(5) + cdouble(0, 0.5);
    const double h = 1e-5;
    const cdouble fd = (fdtest::ref_moment_map(mu, z + h) - fdtest::ref_moment_map(mu, z - h)) / (2 * h);
    CHECK(std::abs(moment_map_derivative(mu, z) - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("exact moments") {
  CHECK(exact_moment(DiscreteMeasure::dirac(1.0), 5) == 1.0);
  CHECK(exact_moment(two_atom(), 2) == doctest::Approx(2.5).epsilon(1e-15));
  const DiscreteMeasure sym(Eigen::Vector2d(-1, 1), Eigen::Vector2d(0.5, 0.5));
  for (int k = 1; k < 12; k += 2) CHECK(exact_moment(sym, k) == 0.0);
  CHECK_THROWS_AS(exact_moment(two_atom(), -1), ContractViolation);

  const auto m = exact_moments(two_atom(), 4);
  const double power_sums[] = {1, 1.5, 2.5, 4.5, 8.5};
  for (int k = 0; k <= 4; ++k) CHECK(m[std::size_t(k)] == doctest::Approx(power_sums[k]).epsilon(1e-15));
}

TEST_CASE("Stieltjes transform properties on random inputs") {
  Gen g(13);
  for (int t = 0; t < 1000; ++t) {
    const auto mu = g.measure(g.integer(1, 8), -3, 6);
    const cdouble z = g.upper_half(8);
    const cdouble G = stieltjes(mu, z);
    CHECK(G.imag() < 0);
    CHECK(stieltjes(mu, std::conj(z)) == std::conj(G));
    CHECK(std::abs(G - fdtest::ref_stieltjes(mu, z)) < 1e-12 * std::max(1.0, std::abs(G)));
  }
}

TEST_CASE("moment series at infinity") {
  Gen g(14);
  for (int t = 0; t < 50; ++t) {
    const auto mu = g.measure(g.integer(1, 6), -2, 4);
    const double R = std::max(std::abs(mu.min_atom()), std::abs(mu.max_atom()));
    const cdouble z = std::polar(2.5 * R + 0.5, g.uniform(0, 2 * M_PI));
    cdouble series = 0;
    for (int k = 1; k <= 10; ++k) series += exact_moment(mu, k) / std::pow(z, k);
    const double q = R / std::abs(z);
    const double tail = std::abs(exact_moment(mu, 11)) / std::pow(std::abs(z), 11) / (1 - q) + R * std::pow(q, 11) / (1 - q);
    CHECK(std::abs(moment_map(mu, z) - series) <= tail + 1e-14);
  }
}

TEST_CASE("wasserstein1 examples and metric axioms") {
  CHECK(wasserstein1(DiscreteMeasure::dirac(1.0), DiscreteMeasure::dirac(2.0)) == doctest::Approx(1.0));
  CHECK(wasserstein1(two_atom(), two_atom()) == 0.0);
  const DiscreteMeasure split(Eigen::Vector2d(0, 2), Eigen::Vector2d(0.5, 0.5));
  CHECK(wasserstein1(split, DiscreteMeasure::dirac(1.0)) == doctest::Approx(1.0).epsilon(1e-15));

  Gen g(15);
  for (int t = 0; t < 60; ++t) {
    const auto a = g.measure(g.integer(1, 6), 0, 5);
    const auto b = g.measure(g.integer(1, 6), 0, 5);
    const auto c = g.measure(g.integer(1, 6), 0, 5);
    const double ab = wasserstein1(a, b);
    CHECK(ab == doctest::Approx(wasserstein1(b, a)).epsilon(1e-13));
    CHECK(ab <= wasserstein1(a, c) + wasserstein1(c, b) + 1e-12);
    CHECK(ab > 0);
    if (t < 10) CHECK(ab == doctest::Approx(fdtest::ref_wasserstein1(a, b)).epsilon(1e-4));
  }
}

TEST_CASE("cdf and quantile") {
  const auto mu = two_atom();
  CHECK(cdf(mu, 0.5) == 0.0);
  CHECK(cdf(mu, 1.0) == 0.5);
  CHECK(cdf(mu, 7.0) == 1.0);
  CHECK(quantile(mu, 0.25) == 1.0);
  CHECK(quantile(mu, 0.5) == 1.0);
  CHECK(quantile(mu, 0.75) == 2.0);
}

TEST_CASE("Marchenko-Pastur density") {
  const MarchenkoPastur mp(0.25);
  CHECK(mp.left() == doctest::Approx(0.25));
  CHECK(mp.right() == doctest::Approx(2.25));
  CHECK(mp.density(0.1) == 0.0);
  CHECK(mp.density(mp.left()) == 0.0);
  CHECK(mp.density(mp.right()) == 0.0);
  // sqrt(0.75 * 1.25) / (2 pi * 0.25)
  CHECK(mp.density(1.0) == doctest::Approx(0.6164044440614999).epsilon(1e-14));
  CHECK_THROWS_AS(MarchenkoPastur(1.0), ContractViolation);
  CHECK_THROWS_AS(MarchenkoPastur(0.0), ContractViolation);

  for (double c : {0.1, 0.2, 0.5, 0.9}) {
    const fdtest::MpQuadrature q(c);
    CHECK(std::abs(q.mass() - 1.0) < 1e-8);
    CHECK(std::abs(q.moment(1) - 1.0) < 1e-8);
    CHECK(std::abs(q.moment(2) - (1.0 + c)) < 1e-8);
    CHECK(std::abs(q.moment(3) - (1.0 + 3 * c + c * c)) < 1e-8);
  }
}

TEST_CASE("Marchenko-Pastur transforms") {
  const MarchenkoPastur mp(0.2);
  CHECK(std::abs(mp.s_transform(0.0) - 1.0) < 1e-15);
  CHECK(std::abs(mp.s_transform(0.5) - 1.0 / 1.1) < 1e-15);
  CHECK(std::abs(MarchenkoPastur(0.5).s_transform(-0.5) - 1.0 / 0.75) < 1e-15);
  CHECK_THROWS_AS(mp.s_transform(-5.0), NumericalError);

  // closed-form G against quadrature of the density
  const fdtest::MpQuadrature q(0.25);
  const MarchenkoPastur mp25(0.25);
  for (cdouble z : {cdouble(1, 1), cdouble(3, 0.2), cdouble(-1, 0.5), cdouble(0.5, -0.1)}) {
    const cdouble M = q.moment_map(z);
    const cdouble G = (M + 1.0) / z;
    CHECK(std::abs(mp25.stieltjes(z) - G) < 1e-9);
  }
  // the inverse moment map inverts the quadrature M
  for (cdouble m : {cdouble(0.3, 0.1), cdouble(-0.2, 0.2), cdouble(0.1, -0.3)}) {
    const cdouble z = mp25.inverse_moment_map(m);
    CHECK(std::abs(q.moment_map(z) - m) < 1e-9);
  }
}
