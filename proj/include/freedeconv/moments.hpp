#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "freedeconv/errors.hpp"
#include "freedeconv/measure.hpp"
#include "freedeconv/tridiagonal.hpp"

namespace freedeconv {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// H[i][j] = m_{i+j}, 0-based, of order n.
template <class Scalar>
MatrixX<Scalar> hankel(const BasicMomentSequence<Scalar>& moments, int n) {
  if (n < 1 || moments.size() < std::size_t(2 * n - 1))
    throw ContractViolation("hankel of order n needs moments m_0..m_{2n-2}");
  MatrixX<Scalar> H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = moments[std::size_t(i + j)];
  return H;
}

struct MomentVerdict {
  enum class Kind { valid, rank_deficient, invalid };
  Kind kind = Kind::valid;
  int rank = 0;                   // number of eigenvalues above tol * ||H||
  double min_eigenvalue = 0.0;   // relative to ||H||
};

/// Classifies H_n by its spectrum: positive definite, positive semidefinite
/// of rank k (support of cardinality k), or indefinite.
template <class Scalar>
MomentVerdict is_moment_sequence(const BasicMomentSequence<Scalar>& moments, int n, double tol) {
  using std::abs;
  const MatrixX<Scalar> H = hankel(moments, n);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(H, Eigen::EigenvaluesOnly);
  const VectorX<Scalar>& lambda = solver.eigenvalues();
  Scalar norm = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) norm = std::max(norm, Scalar(abs(lambda(i))));
  MomentVerdict v;
  v.min_eigenvalue = double(lambda(0) / norm);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -Scalar(tol) * norm) {
      v.kind = MomentVerdict::Kind::invalid;
      v.rank = 0;
      return v;
    }
    if (lambda(i) > Scalar(tol) * norm) ++v.rank;
  }
  v.kind = v.rank == n ? MomentVerdict::Kind::valid : MomentVerdict::Kind::rank_deficient;
  return v;
}

/// Three-term recurrence x p_k = p_{k+1} + a_k p_k + b_k p_{k-1} of the
/// monic orthogonal polynomials. b has one entry fewer than a; the
/// terminating coefficient (zero at the support size) is implied.
template <class Scalar>
struct BasicJacobiCoefficients {
  VectorX<Scalar> a;
  VectorX<Scalar> b;
};

using JacobiCoefficients = BasicJacobiCoefficients<double>;

struct RecoveryReport {
  int rank = 0;
  std::vector<double> pivots;  // d_k / m_{2k}: squared Cholesky pivots, scale-free
};

/// Jacobi coefficients from the Cholesky factor of the Hankel matrix.
/// With L the lower factor (0-based) and d_k = L(k,k)^2:
///   b_k = d_k / d_{k-1},
///   a_k = L(k+1,k) / L(k,k) - L(k,k-1) / L(k-1,k-1).
/// Uses m_0..m_{2n-1}. Factorization stops at the first relative pivot
/// below `tol` (finite support); a pivot below -tol is an invalid-moments
/// error.
template <class Scalar>
BasicJacobiCoefficients<Scalar> jacobi_from_moments(const BasicMomentSequence<Scalar>& moments, int n,
                                                    double tol = 1e-8, RecoveryReport* report = nullptr) {
  using std::sqrt;
  if (n < 1 || moments.size() < std::size_t(2 * n))
    throw ContractViolation("jacobi_from_moments of order n needs moments m_0..m_{2n-1}");
  const int N = n + 1;
  MatrixX<Scalar> L = MatrixX<Scalar>::Zero(N, N);
  auto H = [&](int i, int j) { return moments[std::size_t(i + j)]; };
  int rank = n;
  std::vector<double> pivots;
  for (int j = 0; j < n; ++j) {
    Scalar d = H(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    // m_{2j} <= 0 already rules out positive semidefiniteness; keep the sign of d
    using std::abs;
    const Scalar scale = abs(H(j, j));
    const Scalar rel = scale > Scalar(0) ? Scalar(d / scale) : d;
    pivots.push_back(double(rel));
    if (rel < -Scalar(tol)) {
      if (report) {
        report->rank = j;
        report->pivots = pivots;
      }
      std::ostringstream os;
      os << "Hankel matrix is not positive semidefinite: relative pivot " << double(rel) << " at order " << j + 1;
      throw NumericalError(NumericalFailure::invalid_moments, "jacobi_from_moments", os.str());
    }
    if (rel <= Scalar(tol)) {
      rank = j;
      break;
    }
    L(j, j) = sqrt(d);
    for (int i = j + 1; i < N; ++i) {
      if (i + j > int(moments.size()) - 1) break;
      Scalar s = H(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  if (report) {
    report->rank = rank;
    report->pivots = pivots;
  }
  BasicJacobiCoefficients<Scalar> jc{VectorX<Scalar>(rank), VectorX<Scalar>(std::max(rank - 1, 0))};
  for (int k = 0; k < rank; ++k) {
    jc.a(k) = L(k + 1, k) / L(k, k);
    if (k > 0) {
      jc.a(k) -= L(k, k - 1) / L(k - 1, k - 1);
      jc.b(k - 1) = (L(k, k) * L(k, k)) / (L(k - 1, k - 1) * L(k - 1, k - 1));
    }
  }
  return jc;
}

/// Continued-fraction coefficients b_1..b_{n-1} as ratios of the LDL^T
/// pivots of H_n, without truncation. They are all nonnegative exactly when
/// H_n is positive semidefinite. Stops early at a zero pivot.
template <class Scalar>
VectorX<Scalar> continued_fraction_b(const BasicMomentSequence<Scalar>& moments, int n) {
  MatrixX<Scalar> A = hankel(moments, n);
  std::vector<Scalar> d;
  for (int j = 0; j < n; ++j) {
    const Scalar p = A(j, j);
    if (p == Scalar(0)) break;
    d.push_back(p);
    for (int i = j + 1; i < n; ++i) {
      const Scalar f = A(i, j) / p;
      for (int k = j + 1; k <= i; ++k) A(i, k) -= f * A(k, j);
    }
  }
  VectorX<Scalar> b(std::max<Eigen::Index>(Eigen::Index(d.size()) - 1, 0));
  for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = d[std::size_t(k + 1)] / d[std::size_t(k)];
  return b;
}

/// Gauss quadrature of the Jacobi matrix: atoms are its eigenvalues and
/// weights the squared first components of the unit eigenvectors.
template <class Scalar>
BasicDiscreteMeasure<Scalar> measure_from_jacobi(const BasicJacobiCoefficients<Scalar>& jc) {
  using std::sqrt;
  if (jc.a.size() == 0 || jc.b.size() != jc.a.size() - 1)
    throw ContractViolation("Jacobi coefficients need a nonempty a and |b| = |a| - 1");
  VectorX<Scalar> off(jc.b.size());
  for (Eigen::Index k = 0; k < off.size(); ++k) {
    if (jc.b(k) < 0) throw ContractViolation("Jacobi off-diagonal coefficients must be nonnegative");
    off(k) = sqrt(jc.b(k));
  }
  const TridiagonalEigen<Scalar> eig = tridiagonal_eigen<Scalar>(jc.a, off);
  const VectorX<Scalar> w = eig.first_components.array().square();
  return BasicDiscreteMeasure<Scalar>::from_unnormalized(eig.values, w);
}

/// is_moment_sequence -> jacobi_from_moments -> measure_from_jacobi, with
/// at most `max_support` atoms (limited further by the moments available).
template <class Scalar>
BasicDiscreteMeasure<Scalar> recover_measure(const BasicMomentSequence<Scalar>& moments, int max_support,
                                             double tol = 1e-8, RecoveryReport* report = nullptr) {
  if (max_support < 1) throw ContractViolation("max_support must be at least 1");
  const int n = std::min<int>(max_support, int(moments.size() / 2));
  if (n < 1) throw ContractViolation("recover_measure needs at least m_0 and m_1");
  return measure_from_jacobi(jacobi_from_moments(moments, n, tol, report));
}

}  // namespace freedeconv
