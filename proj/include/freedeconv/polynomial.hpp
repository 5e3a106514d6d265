#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace freedeconv {

using cdouble = std::complex<double>;

/// Coefficients in ascending order: p(z) = sum_k coeffs[k] z^k.
Eigen::VectorXd poly_multiply(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

cdouble poly_eval(const Eigen::VectorXd& coeffs, cdouble z);

/// Roots of p as eigenvalues of its companion matrix. The leading
/// coefficient must be nonzero.
std::vector<cdouble> companion_roots(const Eigen::VectorXd& coeffs);

struct AberthOptions {
  int max_sweeps = 500;
  double rel_tol = 1e-14;
};

/// Aberth-Ehrlich simultaneous refinement of all roots of a polynomial that
/// is available only through its Newton ratio p(z)/p'(z). Updates `roots` in
/// place (Gauss-Seidel order) and returns true when every correction fell
/// below rel_tol * max(|z|, scale).
bool aberth_refine(std::vector<cdouble>& roots,
                   const std::function<cdouble(cdouble)>& newton_ratio,
                   double scale,
                   const AberthOptions& opts = {});

}  // namespace freedeconv
