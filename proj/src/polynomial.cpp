#include "freedeconv/polynomial.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "freedeconv/errors.hpp"

namespace freedeconv {

Eigen::VectorXd poly_multiply(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) out(i + j) += a(i) * b(j);
  return out;
}

cdouble poly_eval(const Eigen::VectorXd& coeffs, cdouble z) {
  cdouble acc = 0;
  for (Eigen::Index k = coeffs.size() - 1; k >= 0; --k) acc = acc * z + coeffs(k);
  return acc;
}

std::vector<cdouble> companion_roots(const Eigen::VectorXd& coeffs) {
  const Eigen::Index degree = coeffs.size() - 1;
  if (degree < 1) return {};
  const double lead = coeffs(degree);
  if (lead == 0.0) throw ContractViolation("companion_roots: leading coefficient is zero");
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  companion.diagonal(-1).setOnes();
  companion.col(degree - 1) = -coeffs.head(degree) / lead;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  std::vector<cdouble> roots(static_cast<std::size_t>(degree));
  for (Eigen::Index i = 0; i < degree; ++i) roots[std::size_t(i)] = solver.eigenvalues()(i);
  return roots;
}

bool aberth_refine(std::vector<cdouble>& roots,
                   const std::function<cdouble(cdouble)>& newton_ratio,
                   double scale,
                   const AberthOptions& opts) {
  const std::size_t n = roots.size();
  std::vector<bool> done(n, false);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    bool all_done = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      const cdouble z = roots[i];
      const cdouble ratio = newton_ratio(z);
      cdouble repulsion = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const cdouble d = z - roots[j];
        if (d != cdouble(0)) repulsion += 1.0 / d;
      }
      const cdouble step = ratio / (1.0 - ratio * repulsion);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) {
        // perturb off a coincident or singular iterate
        roots[i] = z + cdouble(1e-7, 1e-7) * std::max(scale, std::abs(z));
        all_done = false;
        continue;
      }
      roots[i] = z - step;
      if (std::abs(step) <= opts.rel_tol * std::max(std::abs(z), scale))
        done[i] = true;
      else
        all_done = false;
    }
    if (all_done) return true;
  }
  return false;
}

}  // namespace freedeconv
