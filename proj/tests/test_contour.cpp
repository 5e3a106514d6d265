#include <doctest.h>

#include <sstream>

#include "freedeconv/contour.hpp"
#include "freedeconv/marchenko_pastur.hpp"
#include "support.hpp"

using namespace freedeconv;
using fdtest::Gen;

namespace {

DiscreteMeasure two_atom() { return DiscreteMeasure(Eigen::Vector2d(1, 2), Eigen::Vector2d(0.5, 0.5)); }

ContourRepresentation exact_rep(const DiscreteMeasure& mu, cdouble center, double radius, std::size_t n) {
  return sample_contour([&](cdouble z) { return fdtest::ref_stieltjes(mu, z); }, circle_nodes(center, radius, n));
}

ContourRepresentation without_weights(ContourRepresentation rep) {
  rep.dsigma.clear();
  return rep;
}

}  // namespace

TEST_CASE("circle nodes and spectral weights") {
  const auto z = circle_nodes(cdouble(1, 2), 0.5, 64);
  REQUIRE(z.size() == 64);
  CHECK(std::abs(z[0] - cdouble(1.5, 2)) < 1e-15);
  CHECK(std::abs(z[16] - cdouble(1, 2.5)) < 1e-15);
  const auto w = periodic_weights(z);
  // sigma'(t) dt = i r e^{it} 2 pi / N
  for (std::size_t j = 0; j < z.size(); ++j)
    CHECK(std::abs(w[j] - cdouble(0, 1) * (z[j] - cdouble(1, 2)) * (2 * M_PI / 64)) < 1e-14);
  CHECK_THROWS_AS(circle_nodes(0.0, 0.0, 16), ContractViolation);
}

TEST_CASE("contour_moment examples") {
  const auto delta = DiscreteMeasure::dirac(1.0);
  const auto rep = exact_rep(delta, 1.0, 1.0, 256);
  CHECK(std::abs(contour_moment(rep, 0) - 1.0) < 1e-10);
  CHECK(std::abs(contour_moment(rep, 1) - 1.0) < 1e-10);
  // the chord rule without weights is second order; 1e-10 needs many more nodes
  CHECK(std::abs(contour_moment(without_weights(rep), 0) - 1.0) < 1e-3);

  const auto rep2 = exact_rep(two_atom(), 1.5, 2.0, 512);
  CHECK(std::abs(contour_moment(rep2, 2) - 2.5) < 1e-8);

  ContourRepresentation open = rep;
  open.closed = false;
  CHECK_THROWS_AS(contour_moment(open, 0), ContractViolation);
  ContourRepresentation cw = rep;
  cw.orientation = -1;
  CHECK_THROWS_AS(contour_moment(cw, 0), ContractViolation);
  CHECK_THROWS_AS(contour_moment(exact_rep(delta, 1.0, 1.0, 8), 0), ContractViolation);
}

TEST_CASE("sample_contour reorients clockwise input") {
  auto z = circle_nodes(1.0, 1.0, 128);
  std::reverse(z.begin(), z.end());
  const auto rep = sample_contour([](cdouble s) { return 1.0 / (s - 1.0); }, z);
  CHECK(std::abs(contour_moment(rep, 0) - 1.0) < 1e-12);
}

TEST_CASE("moments_from_contour examples") {
  const auto m1 = moments_from_contour(exact_rep(DiscreteMeasure::dirac(1.0), 1.0, 1.0, 256), 6);
  REQUIRE(m1.moments.size() == 7);
  for (std::size_t k = 0; k < 7; ++k) CHECK(std::abs(m1.moments[k] - 1.0) < 1e-10);

  const auto m2 = moments_from_contour(exact_rep(two_atom(), 1.5, 2.0, 512), 4);
  const double power_sums[] = {1, 1.5, 2.5, 4.5, 8.5};
  for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(m2.moments[k] - power_sums[k]) < 1e-10);
  CHECK(m2.imag_residue < 1e-12);
  CHECK(m2.mass_defect < 1e-12);

  // a circle around x_1 only: residue calculus gives m_k = w_1 x_1^k
  const auto partial = exact_rep(two_atom(), 1.0, 0.5, 256);
  CHECK(std::abs(contour_moment(partial, 1) - 0.5) < 1e-12);
  CHECK_THROWS_AS(moments_from_contour(partial, 4), NumericalError);
  try {
    moments_from_contour(partial, 4);
  } catch (const NumericalError& e) {
    CHECK(e.kind() == NumericalFailure::noisy_contour);
  }
}

TEST_CASE("second-order convergence of the chord rule") {
  const auto mu = two_atom();
  double prev = -1;
  for (std::size_t n = 32; n <= 2048; n *= 2) {
    const double err = std::abs(contour_moment(without_weights(exact_rep(mu, 1.5, 2.0, n)), 2) - 2.5);
    if (prev > 0 && prev > 1e-11) CHECK(prev / err >= 4.0 * 0.95);
    prev = err;
  }
}

TEST_CASE("deformation invariance") {
  Gen g(31);
  for (int t = 0; t < 20; ++t) {
    const auto mu = g.measure(g.integer(1, 5), 0.5, 4);
    const auto a = exact_rep(mu, 2.25, 2.5, 512);
    const auto b = exact_rep(mu, 2.0, 4.0, 1024);
    for (int k = 0; k <= 8; ++k) CHECK(std::abs(contour_moment(a, k) - contour_moment(b, k)) < 1e-8 * std::pow(4.5, k));
  }
}

TEST_CASE("contour_rep_from_s examples") {
  const double a = 2.0;
  const auto m_nodes = circle_nodes(0.0, 0.3, 256);
  const auto rep = contour_rep_from_s([a](cdouble) { return cdouble(1.0 / a); }, m_nodes);
  CHECK(std::abs(contour_moment(rep, 0) - 1.0) < 1e-12);
  CHECK(std::abs(contour_moment(rep, 1) - a) < 1e-12);
  // z(m) = a (1 + m) / m
  for (std::size_t j = 0; j < rep.size(); ++j) CHECK(std::abs(rep.value[j] * rep.sigma[j] - (1.0 + rep.value[j] * a)) < 1e-12);

  const MarchenkoPastur mp(0.2);
  const auto mp_rep = contour_rep_from_s([&](cdouble m) { return mp.s_transform(m); }, m_nodes);
  const auto mm = moments_from_contour(mp_rep, 4);
  const fdtest::MpQuadrature q(0.2);
  CHECK(std::abs(mm.moments[1] - 1.0) < 1e-10);
  CHECK(std::abs(mm.moments[2] - 1.2) < 1e-10);
  for (std::size_t k = 3; k <= 4; ++k) CHECK(std::abs(mm.moments[k] - q.moment(int(k))) < 1e-8);

  // conjugate-symmetric in, conjugate-symmetric out
  const auto& z = mp_rep.sigma;
  for (std::size_t j = 0; j < z.size(); ++j) {
    bool found = false;
    for (std::size_t i = 0; i < z.size() && !found; ++i)
      found = std::abs(z[i] - std::conj(z[j])) < 1e-12 && std::abs(mp_rep.value[i] - std::conj(mp_rep.value[j])) < 1e-12;
    CHECK(found);
  }

  std::vector<cdouble> bad = m_nodes;
  bad[3] = 0.0;
  CHECK_THROWS_AS(contour_rep_from_s([](cdouble) { return cdouble(1); }, bad), ContractViolation);
}

TEST_CASE("roundtrip through the inverse branch") {
  Gen g(32);
  for (int t = 0; t < 25; ++t) {
    const int L = g.integer(1, 5);
    const auto mu = g.measure(L, 0.2, 5, 0.1, 0.1);
    const RamificationData ram = critical_points(mu);
    const SlitDomain dom = slit_domain(ram);
    // |m| = 1 reaches m = -1 where M^-1 = 0 and S is 0/0, so stay inside
    const auto m_nodes = choose_m_contour(ram, 512, 0.1, 0.9);
    const auto w = lift_contour(mu, m_nodes, dom);
    std::vector<cdouble> s(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) s[j] = (1.0 + m_nodes[j]) / (m_nodes[j] * w[j]);
    const auto cm = moments_from_contour(contour_rep_from_s(s, m_nodes), 2 * L);
    for (int k = 0; k <= 2 * L; ++k)
      CHECK(std::abs(cm.moments[std::size_t(k)] - exact_moment(mu, k)) < 1e-6 * std::max(1.0, exact_moment(mu, k)));
  }
}

TEST_CASE("choose_m_contour") {
  const SlitDomain one({{-0.5, 1.5}});
  const double r = choose_m_radius(one, 0.1);
  CHECK(r == 1.0);
  for (double rr : {0.45, r})
    for (const cdouble m : circle_nodes(0.0, rr, 256)) CHECK(one.distance_to_slits(m) > 0.1 * 0.45);

  CHECK(choose_m_radius(SlitDomain(), 0.1) == 1.0);
  RamificationData none;
  CHECK(choose_m_contour(none, 64, 0.1).size() == 64);
  CHECK(std::abs(std::abs(choose_m_contour(none, 64, 0.1)[5]) - 1.0) < 1e-15);

  // a slit right above the origin only forces a smaller circle
  const SlitDomain low({{0.0, 0.2}});
  const double r_low = choose_m_radius(low, 0.1);
  CHECK(r_low == 0.125);
  for (const cdouble m : circle_nodes(0.0, r_low, 256)) CHECK(low.contains(m));

  CHECK_THROWS_AS(choose_m_radius(SlitDomain({{0.0, 0.0}}), 0.1), NumericalError);
  CHECK_THROWS_AS(choose_m_radius(one, 1.5), ContractViolation);
  CHECK_THROWS_AS(choose_m_contour(none, 8, 0.1), ContractViolation);
}

TEST_CASE("jacobi_from_contour matches the recurrence of the source measure") {
  Gen g(33);
  for (int t = 0; t < 20; ++t) {
    // the last coefficients lose accuracy as atoms crowd; moderate spacing keeps 1e-8
    const int L = g.integer(2, 6);
    const auto mu = g.measure(L, 0.5, 4, 0.25, 0.1);
    const auto rep = exact_rep(mu, 2.25, 2.5, 1024);
    const auto jc = jacobi_from_contour(rep, L);
    const auto [a, b] = fdtest::ref_recurrence(mu, L);
    REQUIRE(jc.a.size() == L);
    for (int k = 0; k < L; ++k) CHECK(jc.a(k) == doctest::Approx(a[std::size_t(k)]).epsilon(1e-8));
    for (int k = 0; k + 1 < L; ++k) CHECK(jc.b(k) == doctest::Approx(b[std::size_t(k)]).epsilon(1e-7));
  }
  CHECK_THROWS_AS(jacobi_from_contour(without_weights(exact_rep(two_atom(), 1.5, 2, 64)), 2), ContractViolation);
}

TEST_CASE("winding number") {
  const auto c = circle_nodes(0.0, 1.0, 64);
  CHECK(winding_number(c, 0.0) == 1);
  CHECK(winding_number(c, 2.0) == 0);
  std::vector<cdouble> rev(c.rbegin(), c.rend());
  CHECK(winding_number(rev, 0.3) == -1);
}

TEST_CASE("CSV round trip is bit exact") {
  const auto rep = exact_rep(two_atom(), 1.5, 2.0, 64);
  std::stringstream ss;
  write_contour_csv(ss, rep);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  CHECK(header == "t_index,re_sigma,im_sigma,re_value,im_value");
  const auto back = read_contour_csv(ss);
  REQUIRE(back.size() == rep.size());
  for (std::size_t j = 0; j < rep.size(); ++j) {
    CHECK(back.sigma[j] == rep.sigma[j]);
    CHECK(back.value[j] == rep.value[j]);
  }
  std::stringstream bad("t_index,re_sigma\n0,1\n");
  CHECK_THROWS_AS(read_contour_csv(bad), ContractViolation);
}
