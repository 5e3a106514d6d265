#pragma once

// Random generators and independent reference computations shared by the
// unit tests and the acceptance driver. Nothing here calls the library code
// under test for the quantity being checked.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <Eigen/Dense>

#include "freedeconv/measure.hpp"
#include "freedeconv/polynomial.hpp"

namespace fdtest {

using freedeconv::DiscreteMeasure;
using freedeconv::cdouble;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>()(rng_); }

  // L atoms in [lo, hi], pairwise at least min_gap apart; weights bounded away from 0
  DiscreteMeasure measure(int L, double lo, double hi, double min_gap = 0.0, double min_weight = 0.02) {
    std::vector<double> x;
    while (int(x.size()) < L) {
      const double t = uniform(lo, hi);
      bool ok = true;
      for (double y : x) ok = ok && std::abs(t - y) >= min_gap;
      if (ok) x.push_back(t);
    }
    std::sort(x.begin(), x.end());
    Eigen::VectorXd a(L), w(L);
    for (int i = 0; i < L; ++i) {
      a(i) = x[std::size_t(i)];
      w(i) = min_weight + uniform(0.0, 1.0);
    }
    return DiscreteMeasure::from_unnormalized(a, w);
  }

  cdouble in_disk(double r) {
    const double rho = r * std::sqrt(uniform(0.0, 1.0));
    const double t = uniform(0.0, 2 * M_PI);
    return std::polar(rho, t);
  }

  cdouble upper_half(double scale) { return {uniform(-scale, scale), uniform(1e-3, scale)}; }

  Eigen::MatrixXd gaussian(int rows, int cols) {
    Eigen::MatrixXd A(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) A(i, j) = normal();
    return A;
  }

  // Haar orthogonal: QR of a Gaussian matrix with the sign fix on R's diagonal
  Eigen::MatrixXd orthogonal(int n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(n, n));
    Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
      if (R(j, j) < 0) Q.col(j) *= -1;
    return Q;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// ---- reference computations -------------------------------------------------

// Stieltjes transform in long double
inline cdouble ref_stieltjes(const DiscreteMeasure& mu, cdouble z) {
  std::complex<long double> g = 0, zz(z.real(), z.imag());
  for (Eigen::Index j = 0; j < mu.size(); ++j) g += (long double)mu.weights()(j) / (zz - (long double)mu.atoms()(j));
  return {double(g.real()), double(g.imag())};
}

inline cdouble ref_moment_map(const DiscreteMeasure& mu, cdouble z) {
  std::complex<long double> m = 0, zz(z.real(), z.imag());
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    const long double x = mu.atoms()(j), w = mu.weights()(j);
    m += w * x / (zz - x);
  }
  return {double(m.real()), double(m.imag())};
}

// W1 by integrating |F - G| on a fine midpoint grid
inline double ref_wasserstein1(const DiscreteMeasure& a, const DiscreteMeasure& b, int cells = 200000) {
  const double lo = std::min(a.min_atom(), b.min_atom()), hi = std::max(a.max_atom(), b.max_atom());
  if (hi <= lo) return 0.0;
  auto F = [](const DiscreteMeasure& m, double t) {
    double s = 0;
    for (Eigen::Index j = 0; j < m.size(); ++j)
      if (m.atoms()(j) <= t) s += m.weights()(j);
    return s;
  };
  const double h = (hi - lo) / cells;
  double acc = 0;
  for (int i = 0; i < cells; ++i) {
    const double t = lo + (i + 0.5) * h;
    acc += std::abs(F(a, t) - F(b, t));
  }
  return acc * h;
}

// Marchenko-Pastur law by quadrature of the density; independent of the
// library's closed forms.
struct MpQuadrature {
  double c, l, r;
  explicit MpQuadrature(double c_) : c(c_), l((1 - std::sqrt(c_)) * (1 - std::sqrt(c_))), r((1 + std::sqrt(c_)) * (1 + std::sqrt(c_))) {}

  double density(double x) const {
    if (x <= l || x >= r) return 0.0;
    return std::sqrt((x - l) * (r - x)) / (2 * M_PI * c * x);
  }

  double integrate(const std::function<double(double)>& f, double a, double b) const {
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate([&](double x) { return f(x) * density(x); }, a, b);
  }

  double mass() const { return integrate([](double) { return 1.0; }, l, r); }
  double moment(int k) const { return integrate([k](double x) { return std::pow(x, k); }, l, r); }
  double cdf(double t) const {
    if (t <= l) return 0.0;
    if (t >= r) return 1.0;
    return integrate([](double) { return 1.0; }, l, t);
  }

  // M(z) = sum_k m_k / z^k by quadrature of x/(z - x)
  cdouble moment_map(cdouble z) const {
    const double re = integrate([z](double x) { return (x / (z - x)).real(); }, l, r);
    const double im = integrate([z](double x) { return (x / (z - x)).imag(); }, l, r);
    return {re, im};
  }
};

// Newton inversion of a moment map on the branch through infinity, started
// from the two-term asymptotic seed m1/m + m2/m1.
inline cdouble invert_moment_map(const std::function<cdouble(cdouble)>& M, cdouble m, double m1, double m2) {
  cdouble z = m1 / m + m2 / m1;
  for (int it = 0; it < 100; ++it) {
    const double h = 1e-6 * std::max(1.0, std::abs(z));
    const cdouble d = (M(z + h) - M(z - h)) / (2 * h);
    const cdouble step = (M(z) - m) / d;
    z -= step;
    if (std::abs(step) < 1e-15 * std::abs(z)) break;
  }
  return z;
}

// Monic orthogonal polynomial recurrence by the discretized Stieltjes
// procedure on the atoms themselves, in long double.
inline std::pair<std::vector<double>, std::vector<double>> ref_recurrence(const DiscreteMeasure& mu, int n) {
  const Eigen::Index L = mu.size();
  std::vector<long double> x(static_cast<std::size_t>(L)), w(static_cast<std::size_t>(L));
  std::vector<long double> p_prev(x.size(), 0), p(x.size(), 1);
  for (Eigen::Index j = 0; j < L; ++j) {
    x[std::size_t(j)] = mu.atoms()(j);
    w[std::size_t(j)] = mu.weights()(j);
  }
  std::vector<double> a, b;
  long double norm_prev = 1;
  for (int k = 0; k < n; ++k) {
    long double norm = 0, xn = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      norm += w[j] * p[j] * p[j];
      xn += w[j] * x[j] * p[j] * p[j];
    }
    const long double ak = xn / norm;
    a.push_back(double(ak));
    long double bk = 0;
    if (k > 0) {
      bk = norm / norm_prev;
      b.push_back(double(bk));
    }
    std::vector<long double> next(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) next[j] = (x[j] - ak) * p[j] - bk * p_prev[j];
    p_prev = p;
    p = next;
    norm_prev = norm;
  }
  return {a, b};
}

// Largest real root of M(w) = m beyond the support by bisection, for real m > 0
inline double ref_real_lift(const DiscreteMeasure& mu, double m) {
  double lo = mu.max_atom() + 1e-14 * std::max(1.0, mu.max_atom()), hi = mu.max_atom() + 1.0;
  auto f = [&](double t) { return ref_moment_map(mu, t).real() - m; };
  while (f(hi) > 0) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace fdtest
