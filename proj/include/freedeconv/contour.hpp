#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "freedeconv/measure.hpp"
#include "freedeconv/moments.hpp"
#include "freedeconv/polynomial.hpp"
#include "freedeconv/ramification.hpp"

namespace freedeconv {

/// Closed curve sigma_j with Stieltjes values v_j = G(sigma_j). Nodes are
/// stored once (no repeated closing node).
///
/// `dsigma` optionally carries quadrature weights sigma'(t_j) dt for a
/// periodic trapezoid rule. With them contour_moment is spectrally accurate;
/// without them it falls back to the second-order midpoint chord rule.
struct ContourRepresentation {
  std::vector<cdouble> sigma;
  std::vector<cdouble> value;
  std::vector<cdouble> dsigma;
  bool closed = true;
  int orientation = +1;

  std::size_t size() const { return sigma.size(); }
  bool has_weights() const { return !dsigma.empty(); }
};

/// Uniform samples of the circle |z - center| = radius, counterclockwise,
/// starting at angle 0.
std::vector<cdouble> circle_nodes(cdouble center, double radius, std::size_t nodes);

/// Trapezoid weights sigma'(t) dt for a closed curve sampled at equispaced
/// parameter values, by spectral differentiation.
std::vector<cdouble> periodic_weights(const std::vector<cdouble>& sigma);

/// Contour representation of a known transform on a sampled closed curve,
/// with spectral weights.
ContourRepresentation sample_contour(const std::function<cdouble(cdouble)>& G,
                                     const std::vector<cdouble>& sigma);

/// (1/2 pi i) \oint z^k G(z) dz.
cdouble contour_moment(const ContourRepresentation& rep, int k);

struct ContourMoments {
  MomentSequence moments{std::vector<double>{1.0}};
  double imag_residue = 0.0;  // max_k |Im m_k| / max(1, |m_k|)
  double mass_defect = 0.0;   // |m_0 - 1| before m_0 is pinned to 1
};

/// Real parts of contour_moment for k = 0..K. Throws NumericalError
/// (noisy_contour) when the imaginary residue or the mass defect exceeds
/// `threshold`.
ContourMoments moments_from_contour(const ContourRepresentation& rep, int K, double threshold = 1e-6);

/// Contour of G_nu from S_nu on a closed m-curve around 0:
/// z = (1 + m) / (m S(m)), G(z) = m S(m). The z-curve comes out clockwise
/// and is reversed.
ContourRepresentation contour_rep_from_s(const std::function<cdouble(cdouble)>& s_eval,
                                         const std::vector<cdouble>& m_contour);

/// Same, from precomputed S values at the nodes.
ContourRepresentation contour_rep_from_s(const std::vector<cdouble>& s_values,
                                         const std::vector<cdouble>& m_contour);

/// Largest radius r = cap / 2^j such that the circle |m| = r keeps relative
/// distance `margin` from every slit. Throws NumericalError(no_contour).
double choose_m_radius(const SlitDomain& dom, double margin, double cap = 1.0);

std::vector<cdouble> choose_m_contour(const RamificationData& ram, std::size_t nodes, double margin,
                                      double cap = 1.0);

/// Recurrence coefficients of the measure behind a weighted contour, by the
/// Stieltjes procedure with inner products <f, g> = (1/2 pi i) \oint f g G dz.
/// Avoids the monomial Hankel matrix, so it stays accurate for n of about 20
/// on contours close to the support.
JacobiCoefficients jacobi_from_contour(const ContourRepresentation& rep, int n);

/// Signed winding of a closed polyline around `point`.
int winding_number(const std::vector<cdouble>& curve, cdouble point);

/// CSV with header t_index,re_sigma,im_sigma,re_value,im_value and 17
/// significant digits. Quadrature weights are not serialized.
void write_contour_csv(std::ostream& os, const ContourRepresentation& rep);
void write_contour_csv(const std::string& path, const ContourRepresentation& rep);
ContourRepresentation read_contour_csv(std::istream& is);
ContourRepresentation read_contour_csv(const std::string& path);

}  // namespace freedeconv
