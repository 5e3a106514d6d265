#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "freedeconv/deconvolution.hpp"
#include "freedeconv/measure.hpp"

namespace freedeconv {

/// Population model of a benchmark: either a diagonal covariance with the
/// given spectral measure, or the Toeplitz matrix rho^|i-j|.
struct Scenario {
  std::string id;
  std::optional<DiscreteMeasure> population;
  double toeplitz_rho = 0.0;
  double c = 0.2;
  bool modified = false;  // aspect ratio moved off the nominal setting

  bool is_toeplitz() const { return !population.has_value(); }
  std::string label() const { return modified ? id + "-modified" : id; }
  /// Ground-truth population spectrum at dimension p.
  DiscreteMeasure truth(int p) const;
};

/// S1, S2_1, S2_2, S2_3 or S3. Throws ContractViolation for other ids.
Scenario scenario_by_id(const std::string& id);

inline constexpr const char* kGeneratorName = "mt19937_64+normal_distribution";

/// Population eigenvalues of a diagonal covariance at dimension p: floor(w_k p)
/// copies of atom k, the remainder going to the atom of largest weight.
Eigen::VectorXd population_diagonal(const DiscreteMeasure& pop, int p);

/// Eigenvalues of the p x p Toeplitz matrix rho^|i-j|, uniform weights.
DiscreteMeasure toeplitz_spectrum(int p, double rho);

/// p x n data matrix Sigma^{1/2} Y with iid standard normal Y.
Eigen::MatrixXd sample_data(const Scenario& sc, int p, int n, std::uint64_t seed);

/// Empirical spectral measure of (1/n) X X^T for X = sample_data(sc, p, n, seed).
DiscreteMeasure sample_spectrum(const Scenario& sc, int p, int n, std::uint64_t seed);

struct BaselineOptions {
  double sigma = 1.0;
  double ridge_alpha = 1e-3;
  int grid_points = 400;
  double tol = 1e-10;
  int max_iter = 5000;
};

struct BaselineDiagnostics {
  int unconverged = 0;
  double t_fixed_point_s = 0.0;
  double t_solve_s = 0.0;
};

/// Subordination baseline. For each grid point x it solves
/// w = T_z(w) = z h1(1 / (z h3(w))) at z = x + i sigma, with
/// h1(u) = u - F_MP(u) and h3(w) = (w - F3(w)) / w^2, F = 1/G; then
/// F2(z) = F3(w) z / w gives the Cauchy-smoothed density -Im G2(z) / pi,
/// which is deconvolved from the Cauchy kernel by nonnegative least squares
/// with a small ridge. The smoothed density is matched on the grid widened by
/// 3 sigma on both sides; candidate atoms stay on the grid.
DiscreteMeasure baseline_subordination(const DiscreteMeasure& mu3, double c, const Eigen::VectorXd& grid,
                                       const BaselineOptions& opts = {}, BaselineDiagnostics* diag = nullptr);

/// Default grid: grid_points equispaced points on [0, 1.2 max atom].
Eigen::VectorXd baseline_grid(const DiscreteMeasure& mu3, int grid_points = 400);

enum class Method { contour, subordination };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct RunReport {
  std::string scenario;
  int n = 0;
  int p = 0;
  std::uint64_t seed = 0;
  Method method = Method::contour;
  double w1_error = 0.0;  // NaN when the run failed
  double t_total_s = 0.0;
  double t_lift_s = 0.0;
  double t_recovery_s = 0.0;
  int diag_rank = 0;
  double diag_imag_residue = 0.0;
  std::string generator = kGeneratorName;
  std::string error;  // empty on success
};

/// One report per (n, seed) in that order; failures are recorded, not thrown.
/// Runs are distributed over `threads` workers (0 = hardware concurrency).
std::vector<RunReport> run_scenario(const Scenario& sc, const std::vector<int>& n_list, Method method,
                                    const std::vector<std::uint64_t>& seeds, const DeconvConfig& cfg = {},
                                    const BaselineOptions& baseline = {}, unsigned threads = 0);

/// Header scenario,n,p,seed,method,w1_error,t_total_s,t_lift_s,t_recovery_s,diag_rank,diag_imag_residue.
void write_reports_csv(std::ostream& os, const std::vector<RunReport>& reports);

}  // namespace freedeconv
