#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "freedeconv/errors.hpp"
#include "freedeconv/measure.hpp"

namespace freedeconv {

template <class Scalar>
struct TridiagonalEigen {
  VectorX<Scalar> values;            // ascending
  VectorX<Scalar> first_components;  // first entry of each unit eigenvector
};

/// Eigenvalues and eigenvector first components of the symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonal `off`, by implicit-shift QL.
/// Only the first row of the eigenvector matrix is accumulated, which is all
/// Gauss quadrature needs.
template <class Scalar>
TridiagonalEigen<Scalar> tridiagonal_eigen(const VectorX<Scalar>& diag, const VectorX<Scalar>& off) {
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = diag.size();
  if (n == 0 || off.size() != std::max<Eigen::Index>(n - 1, 0))
    throw ContractViolation("tridiagonal_eigen: off-diagonal must have length n - 1");

  VectorX<Scalar> d = diag;
  VectorX<Scalar> e = VectorX<Scalar>::Zero(n);
  e.head(n - 1) = off;
  VectorX<Scalar> z = VectorX<Scalar>::Zero(n);
  z(0) = 1;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  auto hyp = [](const Scalar& a, const Scalar& b) {
    using std::abs;
    using std::sqrt;
    const Scalar aa = abs(a), bb = abs(b);
    if (aa > bb) return aa * sqrt(1 + (bb / aa) * (bb / aa));
    if (bb == 0) return Scalar(0);
    return bb * sqrt(1 + (aa / bb) * (aa / bb));
  };

  for (Eigen::Index l = 0; l < n; ++l) {
    int iter = 0;
    Eigen::Index m;
    do {
      for (m = l; m < n - 1; ++m) {
        const Scalar dd = abs(d(m)) + abs(d(m + 1));
        if (abs(e(m)) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iter > 60)
        throw NumericalError(NumericalFailure::solver, "tridiagonal_eigen", "QL iteration did not converge");
      Scalar g = (d(l + 1) - d(l)) / (2 * e(l));
      Scalar r = hyp(g, Scalar(1));
      g = d(m) - d(l) + e(l) / (g + (g >= 0 ? abs(r) : -abs(r)));
      Scalar s = 1, c = 1, p = 0;
      Eigen::Index i;
      bool deflated = false;
      for (i = m - 1; i >= l; --i) {
        const Scalar f = s * e(i);
        const Scalar b = c * e(i);
        r = hyp(f, g);
        e(i + 1) = r;
        if (r == 0) {
          d(i + 1) -= p;
          e(m) = 0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d(i + 1) - p;
        r = (d(i) - g) * s + 2 * c * b;
        p = s * r;
        d(i + 1) = g + p;
        g = c * r - b;
        const Scalar zf = z(i + 1);
        z(i + 1) = s * z(i) + c * zf;
        z(i) = c * z(i) - s * zf;
      }
      if (deflated) continue;
      d(l) -= p;
      e(l) = g;
      e(m) = 0;
    } while (m != l);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return d(a) < d(b); });
  TridiagonalEigen<Scalar> out{VectorX<Scalar>(n), VectorX<Scalar>(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = d(order[std::size_t(k)]);
    out.first_components(k) = z(order[std::size_t(k)]);
  }
  return out;
}

}  // namespace freedeconv
