#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "freedeconv/measure.hpp"
#include "freedeconv/polynomial.hpp"

namespace freedeconv {

/// Critical points of the moment map M of a discrete measure (zeros of M')
/// and their images, the branch points. For a measure with L nonzero atoms
/// M is a degree-L rational map of the sphere with 2(L-1) critical points.
struct RamificationData {
  std::vector<cdouble> critical_points;     // conjugate-closed, with multiplicity
  std::vector<cdouble> branch_points_upper;  // one per conjugate pair, Im > 0
  std::string source_measure_id;
};

/// Identifier of a measure derived from its atoms and weights.
std::string measure_fingerprint(const DiscreteMeasure& mu);

/// Roots of sum_j w_j x_j prod_{k != j} (z - x_k)^2, the numerator of M'.
/// Atoms at the origin are not poles of M and are skipped. Throws
/// NumericalError(incomplete_roots) if the roots fail the residual or
/// conjugate-pairing checks.
RamificationData critical_points(const DiscreteMeasure& mu);

/// Zeros y_1 < ... < y_{L-1} of G on the real line, one per gap between
/// consecutive atoms, by bisection.
std::vector<double> second_kind_zeros(const DiscreteMeasure& mu);

/// The pair (M'(z), F'(z)) where F'(z) = 1/z + sum 1/(z - y_j) - sum 1/(z - x_j)
/// is the Cauchy transform of delta_0 + sum delta_{y_j} - sum delta_{x_j}.
/// Both vanish on the same set.
std::pair<cdouble, cdouble> markov_krein_zero_equivalence(const DiscreteMeasure& mu, cdouble z);

/// Plane minus the vertical rays {re + i t : |t| >= im_min}, one pair per
/// branch point conjugate pair.
class SlitDomain {
 public:
  struct Slit {
    double re;
    double im_min;
  };

  SlitDomain() = default;
  explicit SlitDomain(std::vector<Slit> slits);

  const std::vector<Slit>& slits() const { return slits_; }

  /// Euclidean distance from m to the union of all rays.
  double distance_to_slits(cdouble m) const;
  bool contains(cdouble m, double tol = 1e-12) const;

  /// True if the closed segment [a, b] meets a ray (within `tol`).
  bool segment_crosses(cdouble a, cdouble b, double tol = 0.0) const;

  /// Smallest im_min over all slits, +inf when there are none.
  double min_height() const;

 private:
  std::vector<Slit> slits_;
};

/// Throws NumericalError(degenerate_ramification) when a branch point has
/// |Im| < 1e-10.
SlitDomain slit_domain(const RamificationData& ram);

struct LiftConfig {
  double newton_tol = 1e-12;
  int max_newton = 20;
  double min_step = 1e-12;        // smallest step, as a fraction of the segment length
  double start_radius = 1e-3;     // |m| at which tracking starts from the branch at infinity
  double initial_fraction = 1.0 / 64.0;
  double max_fraction = 1.0 / 16.0;
};

struct LiftDiagnostics {
  long steps = 0;
  long rejected_steps = 0;
  long newton_iterations = 0;
  double residual = 0.0;
};

struct PathLiftState {
  cdouble m_current;
  cdouble w_current;
  double residual = 0.0;
  long steps_taken = 0;
};

/// Track the solution of M(w) = m along the segment from state.m_current to
/// m_to with a first-order predictor and Newton corrector. Step sizes start
/// at initial_fraction of the segment, halve on corrector failure and double
/// after four consecutive single-iteration successes.
void track_segment(const DiscreteMeasure& mu, PathLiftState& state, cdouble m_to,
                   const LiftConfig& cfg, LiftDiagnostics* diag = nullptr);

/// Waypoints from the origin to `target` inside `dom`: the radial segment
/// when it avoids every slit, otherwise a detour through
/// Re(target) + i h with |h| below every slit height.
std::vector<cdouble> default_path(const SlitDomain& dom, cdouble target);

/// Value of the inverse branch with M^-1(0) = infinity at the end of the
/// polyline `waypoints` (which must start at 0 and stay in `dom`).
cdouble lift_polyline(const DiscreteMeasure& mu, const std::vector<cdouble>& waypoints,
                      const SlitDomain& dom, const LiftConfig& cfg = {},
                      LiftDiagnostics* diag = nullptr);

/// M^-1(target) on the branch through infinity, along default_path.
cdouble lift_path(const DiscreteMeasure& mu, cdouble target, const SlitDomain& dom,
                  const LiftConfig& cfg = {}, LiftDiagnostics* diag = nullptr);

/// Lifts every node of a closed curve around the origin: the first node by
/// lift_path, then node to node along chords.
std::vector<cdouble> lift_contour(const DiscreteMeasure& mu, const std::vector<cdouble>& nodes,
                                  const SlitDomain& dom, const LiftConfig& cfg = {},
                                  LiftDiagnostics* diag = nullptr);

/// S(m) = (1 + m) / (m M^-1(m)).
cdouble s_transform(const DiscreteMeasure& mu, cdouble m, const SlitDomain& dom,
                    const LiftConfig& cfg = {});

struct InjectivityReport {
  bool simple = true;
  std::size_t crossings = 0;
  std::string diagnostic;
};

/// Whether the image polyline {M(sigma_j)} of a closed contour is simple.
InjectivityReport injectivity_report(const DiscreteMeasure& mu, const std::vector<cdouble>& contour);
bool injectivity_check(const DiscreteMeasure& mu, const std::vector<cdouble>& contour);

}  // namespace freedeconv
