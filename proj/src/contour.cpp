#include "freedeconv/contour.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace freedeconv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double signed_area(const std::vector<cdouble>& z) {
  double a = 0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const cdouble p = z[j], q = z[(j + 1) % z.size()];
    a += p.real() * q.imag() - q.real() * p.imag();
  }
  return 0.5 * a;
}

cdouble ipow(cdouble z, int k) {
  cdouble r = 1.0;
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

void drop_closing_node(std::vector<cdouble>& sigma, std::vector<cdouble>* value = nullptr) {
  if (sigma.size() >= 2 &&
      std::abs(sigma.front() - sigma.back()) <= 1e-12 * std::max(1.0, std::abs(sigma.front()))) {
    sigma.pop_back();
    if (value) value->pop_back();
  }
}

void check_rep(const ContourRepresentation& rep) {
  if (!rep.closed) throw ContractViolation("contour integral needs a closed contour");
  if (rep.orientation != +1) throw ContractViolation("contour must be oriented counterclockwise");
  if (rep.size() < 16) throw ContractViolation("contour needs at least 16 nodes");
  if (rep.value.size() != rep.size() || (rep.has_weights() && rep.dsigma.size() != rep.size()))
    throw ContractViolation("contour arrays have mismatched lengths");
}

}  // namespace

std::vector<cdouble> circle_nodes(cdouble center, double radius, std::size_t nodes) {
  if (!(radius > 0)) throw ContractViolation("circle radius must be positive");
  std::vector<cdouble> z(nodes);
  for (std::size_t j = 0; j < nodes; ++j)
    z[j] = center + std::polar(radius, kTwoPi * double(j) / double(nodes));
  return z;
}

std::vector<cdouble> periodic_weights(const std::vector<cdouble>& sigma) {
  const std::size_t n = sigma.size();
  if (n < 4) throw ContractViolation("periodic_weights needs at least four nodes");
  Eigen::FFT<double> fft;
  std::vector<cdouble> spec;
  fft.fwd(spec, sigma);
  for (std::size_t k = 0; k < n; ++k) {
    const long freq = k <= n / 2 ? long(k) : long(k) - long(n);
    if (n % 2 == 0 && k == n / 2) spec[k] = 0.0;  // Nyquist mode has no odd derivative
    else spec[k] *= cdouble(0.0, double(freq));
  }
  std::vector<cdouble> d;
  fft.inv(d, spec);
  const double dt = kTwoPi / double(n);
  for (auto& v : d) v *= dt;
  return d;
}

ContourRepresentation sample_contour(const std::function<cdouble(cdouble)>& G,
                                     const std::vector<cdouble>& sigma_in) {
  std::vector<cdouble> sigma = sigma_in;
  drop_closing_node(sigma);
  if (signed_area(sigma) < 0) std::reverse(sigma.begin(), sigma.end());
  ContourRepresentation rep;
  rep.sigma = sigma;
  rep.value.reserve(sigma.size());
  for (const auto& z : sigma) rep.value.push_back(G(z));
  rep.dsigma = periodic_weights(sigma);
  return rep;
}

cdouble contour_moment(const ContourRepresentation& rep, int k) {
  check_rep(rep);
  if (k < 0) throw ContractViolation("moment order must be nonnegative");
  const std::size_t n = rep.size();
  cdouble acc = 0;
  if (rep.has_weights()) {
    for (std::size_t j = 0; j < n; ++j) acc += ipow(rep.sigma[j], k) * rep.value[j] * rep.dsigma[j];
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t i = (j + n - 1) % n;
      const cdouble mid = 0.5 * (rep.sigma[j] + rep.sigma[i]);
      acc += ipow(mid, k) * 0.5 * (rep.value[j] + rep.value[i]) * (rep.sigma[j] - rep.sigma[i]);
    }
  }
  return acc / cdouble(0.0, kTwoPi);
}

ContourMoments moments_from_contour(const ContourRepresentation& rep, int K, double threshold) {
  if (K < 1) throw ContractViolation("moments_from_contour needs K >= 1");
  ContourMoments out;
  std::vector<double> m(std::size_t(K) + 1);
  for (int k = 0; k <= K; ++k) {
    const cdouble v = contour_moment(rep, k);
    m[std::size_t(k)] = v.real();
    out.imag_residue = std::max(out.imag_residue, std::abs(v.imag()) / std::max(1.0, std::abs(v.real())));
  }
  out.mass_defect = std::abs(m[0] - 1.0);
  m[0] = 1.0;
  for (double v : m)
    if (!std::isfinite(v))
      throw NumericalError(NumericalFailure::noisy_contour, "moments_from_contour", "non-finite contour moment");
  out.moments = MomentSequence(std::move(m));
  if (out.imag_residue > threshold || out.mass_defect > threshold) {
    std::ostringstream os;
    os << "contour moments unreliable: imaginary residue " << out.imag_residue << ", mass defect "
       << out.mass_defect << " (threshold " << threshold << ")";
    throw NumericalError(NumericalFailure::noisy_contour, "moments_from_contour", os.str());
  }
  return out;
}

ContourRepresentation contour_rep_from_s(const std::vector<cdouble>& s_values,
                                         const std::vector<cdouble>& m_contour_in) {
  std::vector<cdouble> m_contour = m_contour_in;
  std::vector<cdouble> s = s_values;
  if (s.size() != m_contour.size()) throw ContractViolation("one S value per contour node is required");
  drop_closing_node(m_contour, &s);
  ContourRepresentation rep;
  rep.sigma.reserve(m_contour.size());
  rep.value.reserve(m_contour.size());
  for (std::size_t j = 0; j < m_contour.size(); ++j) {
    const cdouble m = m_contour[j];
    if (m == cdouble(0)) throw ContractViolation("m-contour must avoid the origin");
    const cdouble ms = m * s[j];
    const cdouble z = (1.0 + m) / ms;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw NumericalError(NumericalFailure::pole, "contour_rep_from_s", "S vanishes on the m-contour");
    rep.sigma.push_back(z);
    rep.value.push_back(ms);
  }
  if (signed_area(rep.sigma) < 0) {
    std::reverse(rep.sigma.begin(), rep.sigma.end());
    std::reverse(rep.value.begin(), rep.value.end());
  }
  rep.dsigma = periodic_weights(rep.sigma);
  return rep;
}

ContourRepresentation contour_rep_from_s(const std::function<cdouble(cdouble)>& s_eval,
                                         const std::vector<cdouble>& m_contour) {
  std::vector<cdouble> s;
  s.reserve(m_contour.size());
  for (const auto& m : m_contour) {
    if (m == cdouble(0)) throw ContractViolation("m-contour must avoid the origin");
    s.push_back(s_eval(m));
  }
  return contour_rep_from_s(s, m_contour);
}

double choose_m_radius(const SlitDomain& dom, double margin, double cap) {
  if (!(margin > 0 && margin < 1)) throw ContractViolation("contour margin must lie in (0, 1)");
  if (!(cap > 0)) throw ContractViolation("contour radius cap must be positive");
  auto admissible = [&](double r) {
    for (const auto& s : dom.slits()) {
      const double re = std::abs(s.re);
      if (r <= (1 - margin) * re) continue;
      if (r * r - s.re * s.re <= std::pow((1 - margin) * s.im_min, 2)) continue;
      return false;
    }
    return true;
  };
  double r = cap;
  for (int j = 0; j < 60; ++j, r *= 0.5)
    if (admissible(r)) return r;
  throw NumericalError(NumericalFailure::no_contour, "choose_m_contour",
                       "no circle around the origin avoids the slits");
}

std::vector<cdouble> choose_m_contour(const RamificationData& ram, std::size_t nodes, double margin,
                                      double cap) {
  if (nodes < 16) throw ContractViolation("m-contour needs at least 16 nodes");
  return circle_nodes(0.0, choose_m_radius(slit_domain(ram), margin, cap), nodes);
}

JacobiCoefficients jacobi_from_contour(const ContourRepresentation& rep, int n) {
  check_rep(rep);
  if (!rep.has_weights()) throw ContractViolation("jacobi_from_contour needs quadrature weights");
  if (n < 1) throw ContractViolation("jacobi_from_contour needs n >= 1");
  const std::size_t N = rep.size();
  std::vector<cdouble> omega(N);
  for (std::size_t j = 0; j < N; ++j) omega[j] = rep.value[j] * rep.dsigma[j] / cdouble(0.0, kTwoPi);
  auto inner = [&](const std::vector<cdouble>& f, const std::vector<cdouble>& g, bool times_x) {
    cdouble s = 0;
    for (std::size_t j = 0; j < N; ++j) s += omega[j] * f[j] * g[j] * (times_x ? rep.sigma[j] : cdouble(1));
    return s.real();
  };
  // orthonormal polynomials q_k evaluated at the nodes
  std::vector<cdouble> prev(N, 0.0), cur(N);
  double norm0 = inner(std::vector<cdouble>(N, 1.0), std::vector<cdouble>(N, 1.0), false);
  if (!(norm0 > 0)) throw NumericalError(NumericalFailure::noisy_contour, "jacobi_from_contour", "contour mass is not positive");
  for (std::size_t j = 0; j < N; ++j) cur[j] = 1.0 / std::sqrt(norm0);
  JacobiCoefficients jc{Eigen::VectorXd(n), Eigen::VectorXd(n - 1)};
  double beta = 0;  // sqrt of b_k
  for (int k = 0; k < n; ++k) {
    const double a = inner(cur, cur, true);
    jc.a(k) = a;
    if (k == n - 1) break;
    std::vector<cdouble> next(N);
    for (std::size_t j = 0; j < N; ++j) next[j] = (rep.sigma[j] - a) * cur[j] - beta * prev[j];
    const double nn = inner(next, next, false);
    if (!(nn > 0))
      throw NumericalError(NumericalFailure::invalid_moments, "jacobi_from_contour",
                           "Stieltjes procedure met a nonpositive norm");
    beta = std::sqrt(nn);
    jc.b(k) = nn;
    for (std::size_t j = 0; j < N; ++j) next[j] /= beta;
    prev.swap(cur);
    cur.swap(next);
  }
  return jc;
}

int winding_number(const std::vector<cdouble>& curve, cdouble point) {
  double total = 0;
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const cdouble a = curve[j] - point, b = curve[(j + 1) % curve.size()] - point;
    total += std::arg(b / a);
  }
  return int(std::lround(total / kTwoPi));
}

void write_contour_csv(std::ostream& os, const ContourRepresentation& rep) {
  os << "t_index,re_sigma,im_sigma,re_value,im_value\n";
  os << std::setprecision(17);
  for (std::size_t j = 0; j < rep.size(); ++j)
    os << j << ',' << rep.sigma[j].real() << ',' << rep.sigma[j].imag() << ',' << rep.value[j].real() << ','
       << rep.value[j].imag() << '\n';
}

void write_contour_csv(const std::string& path, const ContourRepresentation& rep) {
  std::ofstream os(path);
  if (!os) throw ContractViolation("cannot open " + path + " for writing");
  write_contour_csv(os, rep);
}

ContourRepresentation read_contour_csv(std::istream& is) {
  ContourRepresentation rep;
  std::string line;
  if (!std::getline(is, line) || line.rfind("t_index", 0) != 0)
    throw ContractViolation("contour CSV must start with the t_index header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double v[5];
    for (double& x : v) {
      if (!std::getline(row, cell, ',')) throw ContractViolation("contour CSV row has fewer than 5 columns");
      try {
        x = std::stod(cell);
      } catch (const std::exception&) {
        throw ContractViolation("contour CSV holds a non-numeric cell: " + cell);
      }
    }
    rep.sigma.emplace_back(v[1], v[2]);
    rep.value.emplace_back(v[3], v[4]);
  }
  return rep;
}

ContourRepresentation read_contour_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ContractViolation("cannot open " + path);
  return read_contour_csv(is);
}

}  // namespace freedeconv
