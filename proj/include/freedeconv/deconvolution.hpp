#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "freedeconv/contour.hpp"
#include "freedeconv/marchenko_pastur.hpp"
#include "freedeconv/measure.hpp"
#include "freedeconv/moments.hpp"
#include "freedeconv/ramification.hpp"

namespace freedeconv {

struct DeconvConfig {
  double contour_margin = 0.1;
  int contour_nodes = 512;
  int max_contour_nodes = 8192;
  double node_convergence_tol = 1e-9;  // relative change of the moment vector between doublings
  int max_moments = 0;                 // K; 0 selects 2 * max_support
  double newton_tol = 1e-12;
  double min_step = 1e-12;
  double rank_tol = 1e-3;
  int max_support = 8;
  double contour_noise_tol = 1e-6;

  int moment_count() const { return max_moments > 0 ? max_moments : 2 * max_support; }
  /// Throws ContractViolation on inconsistent settings.
  void validate() const;
};

struct DeconvDiagnostics {
  double imag_residue = 0.0;
  double mass_defect = 0.0;
  int rank = 0;
  int support_used = 0;  // max_support after fallbacks
  double contour_radius = 0.0;
  int contour_nodes = 0;
  std::size_t branch_points = 0;
  long lift_steps = 0;
  long lift_rejected = 0;
  long newton_iterations = 0;
  double lift_residual = 0.0;
  std::vector<double> pivots;
  std::vector<std::string> notes;
  double t_ramification_s = 0.0;
  double t_lift_s = 0.0;
  double t_recovery_s = 0.0;
};

struct DeconvResult {
  DiscreteMeasure estimate = DiscreteMeasure::dirac(1.0);
  MomentSequence moments_used{std::vector<double>{1.0}};
  DeconvDiagnostics diagnostics;
  DeconvConfig config;
  double c = 0.0;
  ContourRepresentation z_contour;  // contour of G of the estimate, for dumps
  std::vector<cdouble> m_contour;
  std::vector<cdouble> t_values;  // S_mu / S_MP at the m-contour nodes
};

/// S_mu(m) / S_MP(m).
cdouble t_ratio(const DiscreteMeasure& mu_n, double c, cdouble m, const SlitDomain& dom,
                const DeconvConfig& cfg = {});

/// Estimate nu from mu_n ~ nu [x] MP_c: lift M_mu^-1 on an m-circle inside
/// the slit domain of mu_n (and inside |m| < 1/(2c)), divide out S_MP, form
/// the contour of G_nu, extract moments and recover a discrete measure.
DeconvResult deconvolve(const DiscreteMeasure& mu_n, double c, const DeconvConfig& cfg = {});

/// Stieltjes transform of nu [x] MP_c at z off the real axis. Solves the
/// Marchenko-Pastur equation for the companion transform
///   v = -(1 - c)/z - c G(z),   -1/v = z - c sum_j w_j l_j / (1 + l_j v),
/// with Im v > 0 for Im z > 0, by damped fixed-point iteration followed by
/// Newton polishing.
cdouble forward_mp_G(const DiscreteMeasure& nu, double c, cdouble z);

/// Interval containing the support of nu [x] MP_c.
std::pair<double, double> forward_support_hull(const DiscreteMeasure& nu, double c);

/// Weighted contour of G for nu [x] MP_c: a rectangle at height +-eta,
/// eta = 0.05 * span, around the support hull, with composite 16-point
/// Gauss-Legendre panels of length at most eta. `nodes` is a lower bound on
/// the node count.
ContourRepresentation forward_contour(const DiscreteMeasure& nu, double c, int nodes = 512);

/// n-point Gauss quadrature of nu [x] MP_c, a discrete stand-in whose
/// moments agree with the forward law up to order 2n - 1.
DiscreteMeasure discretize_forward(const DiscreteMeasure& nu, double c, int n = 12);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n);

/// Rotation-equivariant estimator: O diag(lambda) O^T where lambda_i is the
/// (i - 1/2)/p quantile of nu_hat.
Eigen::MatrixXd ree_assemble(const Eigen::MatrixXd& eigvecs, const Eigen::VectorXd& eigvals,
                             const DiscreteMeasure& nu_hat);

/// REE of the sample covariance X X^T / n of a p x n data matrix.
Eigen::MatrixXd ree_estimate(const Eigen::MatrixXd& X, const DiscreteMeasure& nu_hat);

}  // namespace freedeconv
