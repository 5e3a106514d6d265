#include "freedeconv/ramification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

namespace freedeconv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross(cdouble a, cdouble b) { return a.real() * b.imag() - a.imag() * b.real(); }

double point_segment_distance(cdouble p, cdouble a, cdouble b) {
  const cdouble ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  const double t = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

bool segments_intersect(cdouble a, cdouble b, cdouble c, cdouble d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](cdouble p, cdouble q, cdouble r) {
    return std::min(p.real(), q.real()) <= r.real() && r.real() <= std::max(p.real(), q.real()) &&
           std::min(p.imag(), q.imag()) <= r.imag() && r.imag() <= std::max(p.imag(), q.imag());
  };
  if (d1 == 0 && on_segment(a, b, c)) return true;
  if (d2 == 0 && on_segment(a, b, d)) return true;
  if (d3 == 0 && on_segment(c, d, a)) return true;
  if (d4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

double segment_distance(cdouble a, cdouble b, cdouble c, cdouble d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

// Nonzero atoms are the poles of M; their residues are a_j = w_j x_j.
struct Poles {
  std::vector<double> x;
  std::vector<double> a;
};

Poles poles_of(const DiscreteMeasure& mu) {
  Poles p;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    const double x = mu.atoms()(j);
    if (x == 0.0) continue;
    p.x.push_back(x);
    p.a.push_back(mu.weights()(j) * x);
  }
  return p;
}

// f(z) = sum a_j / (z - x_j)^2 = -M'(z); returns f and f'.
std::pair<cdouble, cdouble> critical_function(const Poles& p, cdouble z) {
  cdouble f = 0, df = 0;
  for (std::size_t j = 0; j < p.x.size(); ++j) {
    const cdouble r = 1.0 / (z - p.x[j]);
    const cdouble r2 = r * r;
    f += p.a[j] * r2;
    df -= 2.0 * p.a[j] * r2 * r;
  }
  return {f, df};
}

double critical_function_scale(const Poles& p, cdouble z) {
  double s = 0;
  for (std::size_t j = 0; j < p.x.size(); ++j) s += std::abs(p.a[j]) / std::norm(z - p.x[j]);
  return s;
}

std::vector<cdouble> companion_seeds(const Poles& p, double scale) {
  // numerator of f in the rescaled variable u = z / scale
  const std::size_t n = p.x.size();
  Eigen::VectorXd numerator = Eigen::VectorXd::Zero(2 * long(n) - 1);
  for (std::size_t j = 0; j < n; ++j) {
    Eigen::VectorXd term = Eigen::VectorXd::Constant(1, p.a[j]);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      const double r = p.x[k] / scale;
      Eigen::VectorXd sq(3);
      sq << r * r, -2.0 * r, 1.0;
      term = poly_multiply(term, sq);
    }
    numerator += term;
  }
  std::vector<cdouble> roots = companion_roots(numerator);
  for (auto& r : roots) r *= scale;
  return roots;
}

std::vector<cdouble> gap_seeds(const Poles& p) {
  std::vector<double> xs = p.x;
  std::sort(xs.begin(), xs.end());
  std::vector<cdouble> seeds;
  for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
    const double mid = 0.5 * (xs[j] + xs[j + 1]);
    const double half = 0.5 * (xs[j + 1] - xs[j]);
    seeds.emplace_back(mid, half);
    seeds.emplace_back(mid, -half);
  }
  return seeds;
}

}  // namespace

std::string measure_fingerprint(const DiscreteMeasure& mu) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    mix(mu.atoms()(j));
    mix(mu.weights()(j));
  }
  std::ostringstream os;
  os << "L" << mu.size() << "-" << std::hex << h;
  return os.str();
}

RamificationData critical_points(const DiscreteMeasure& mu) {
  RamificationData ram;
  ram.source_measure_id = measure_fingerprint(mu);
  const Poles poles = poles_of(mu);
  if (poles.x.size() < 2) return ram;

  const double lead = std::accumulate(poles.a.begin(), poles.a.end(), 0.0);
  double scale = 0;
  for (double x : poles.x) scale = std::max(scale, std::abs(x));
  if (std::abs(lead) <= 1e-14 * scale)
    throw ContractViolation("critical_points: measure must have nonzero mean");

  const std::size_t degree = 2 * (poles.x.size() - 1);
  std::vector<cdouble> roots = degree <= 30 ? companion_seeds(poles, scale) : gap_seeds(poles);

  auto ratio = [&poles](cdouble z) -> cdouble {
    auto [f, df] = critical_function(poles, z);
    cdouble log_derivative = df / f;
    for (double x : poles.x) log_derivative += 2.0 / (z - x);
    return 1.0 / log_derivative;
  };
  aberth_refine(roots, ratio, scale);

  // Newton polish on f itself
  for (auto& q : roots) {
    for (int it = 0; it < 3; ++it) {
      auto [f, df] = critical_function(poles, q);
      const cdouble next = q - f / df;
      if (std::abs(critical_function(poles, next).first) < std::abs(f)) q = next;
      else break;
    }
  }

  for (const auto& q : roots) {
    const double resid = std::abs(critical_function(poles, q).first);
    if (!(resid <= 1e-8 * critical_function_scale(poles, q)))
      throw NumericalError(NumericalFailure::incomplete_roots, "critical_points",
                           "root refinement did not converge for every critical point");
  }

  // conjugate pairing
  const double pair_tol = 1e-8;
  std::vector<cdouble> upper, lower, real;
  for (const auto& q : roots) {
    if (std::abs(q.imag()) <= pair_tol * std::max(1.0, std::abs(q))) real.emplace_back(q.real(), 0.0);
    else if (q.imag() > 0) upper.push_back(q);
    else lower.push_back(q);
  }
  if (upper.size() != lower.size() || real.size() % 2 != 0)
    throw NumericalError(NumericalFailure::incomplete_roots, "critical_points",
                         "critical points are not closed under conjugation");
  std::vector<bool> used(lower.size(), false);
  std::sort(upper.begin(), upper.end(),
            [](cdouble a, cdouble b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); });
  for (auto& q : upper) {
    std::size_t best = lower.size();
    double best_d = kInf;
    for (std::size_t k = 0; k < lower.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(lower[k] - std::conj(q));
      if (d < best_d) { best_d = d; best = k; }
    }
    if (best == lower.size() || best_d > pair_tol * std::max(1.0, std::abs(q)))
      throw NumericalError(NumericalFailure::incomplete_roots, "critical_points",
                           "critical point without a conjugate partner");
    used[best] = true;
    q = 0.5 * (q + std::conj(lower[best]));
  }

  for (const auto& q : upper) {
    ram.critical_points.push_back(q);
    ram.critical_points.push_back(std::conj(q));
    cdouble p = moment_map(mu, q);
    if (p.imag() < 0) p = std::conj(p);
    ram.branch_points_upper.push_back(p);
  }
  std::sort(real.begin(), real.end(), [](cdouble a, cdouble b) { return a.real() < b.real(); });
  for (std::size_t k = 0; k < real.size(); k += 2) {
    ram.critical_points.push_back(real[k]);
    ram.critical_points.push_back(real[k + 1]);
    ram.branch_points_upper.emplace_back(moment_map(mu, real[k]).real(), 0.0);
  }
  return ram;
}

std::vector<double> second_kind_zeros(const DiscreteMeasure& mu) {
  const auto& x = mu.atoms();
  const auto& w = mu.weights();
  auto G = [&](double t) {
    double g = 0;
    for (Eigen::Index j = 0; j < x.size(); ++j) g += w(j) / (t - x(j));
    return g;
  };
  std::vector<double> zeros;
  for (Eigen::Index j = 0; j + 1 < x.size(); ++j) {
    double lo = x(j), hi = x(j + 1);
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (G(mid) > 0) lo = mid;
      else hi = mid;
    }
    zeros.push_back(0.5 * (lo + hi));
  }
  return zeros;
}

std::pair<cdouble, cdouble> markov_krein_zero_equivalence(const DiscreteMeasure& mu, cdouble z) {
  const std::vector<double> y = second_kind_zeros(mu);
  if (std::abs(z) <= 1e-14)
    throw NumericalError(NumericalFailure::pole, "markov_krein", "z = 0 is excluded");
  for (double yj : y)
    if (std::abs(z - yj) <= 1e-14 * std::max(1.0, std::abs(yj)))
      throw NumericalError(NumericalFailure::pole, "markov_krein", "z is a zero of the second kind");
  const cdouble dM = moment_map_derivative(mu, z);  // also rejects atoms
  cdouble dF = 1.0 / z;
  for (double yj : y) dF += 1.0 / (z - yj);
  for (Eigen::Index j = 0; j < mu.size(); ++j) dF -= 1.0 / (z - mu.atoms()(j));
  return {dM, dF};
}

// ---------------------------------------------------------------- SlitDomain

SlitDomain::SlitDomain(std::vector<Slit> slits) : slits_(std::move(slits)) {}

double SlitDomain::distance_to_slits(cdouble m) const {
  double best = kInf;
  for (const auto& s : slits_) {
    const double dx = m.real() - s.re;
    const double up = std::hypot(dx, std::max(0.0, s.im_min - m.imag()));
    const double down = std::hypot(dx, std::max(0.0, s.im_min + m.imag()));
    best = std::min({best, up, down});
  }
  return best;
}

bool SlitDomain::contains(cdouble m, double tol) const { return distance_to_slits(m) > tol; }

bool SlitDomain::segment_crosses(cdouble a, cdouble b, double tol) const {
  const double far = std::max(std::abs(a), std::abs(b)) + 1.0;
  for (const auto& s : slits_) {
    const double top = s.im_min + far + far;
    const cdouble up0(s.re, s.im_min), up1(s.re, top);
    const cdouble dn0(s.re, -s.im_min), dn1(s.re, -top);
    if (segment_distance(a, b, up0, up1) <= tol) return true;
    if (segment_distance(a, b, dn0, dn1) <= tol) return true;
  }
  return false;
}

double SlitDomain::min_height() const {
  double h = kInf;
  for (const auto& s : slits_) h = std::min(h, s.im_min);
  return h;
}

SlitDomain slit_domain(const RamificationData& ram) {
  std::vector<SlitDomain::Slit> slits;
  for (const auto& p : ram.branch_points_upper) {
    if (std::abs(p.imag()) < 1e-10)
      throw NumericalError(NumericalFailure::degenerate_ramification, "slit_domain",
                           "branch point on the real axis disconnects the slit domain");
    slits.push_back({p.real(), std::abs(p.imag())});
  }
  return SlitDomain(std::move(slits));
}

// ------------------------------------------------------------- path lifting

namespace {

struct Newton {
  cdouble w;
  double residual;
  int iterations;
  bool converged;
};

Newton newton_solve(const DiscreteMeasure& mu, cdouble w, cdouble m, const LiftConfig& cfg) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double res = std::abs(moment_map(mu, w) - m);
  int it = 0;
  while (res > cfg.newton_tol && it < cfg.max_newton) {
    const cdouble delta = (m - moment_map(mu, w)) / moment_map_derivative(mu, w);
    if (!std::isfinite(delta.real()) || !std::isfinite(delta.imag())) break;
    w += delta;
    ++it;
    const double next = std::abs(moment_map(mu, w) - m);
    if (std::abs(delta) <= 4 * eps * std::abs(w)) {
      res = next;
      return {w, res, it, true};  // stalled at rounding level
    }
    if (it > 2 && !(next < res)) {
      res = next;
      break;
    }
    res = next;
  }
  return {w, res, it, res <= cfg.newton_tol};
}

}  // namespace

void track_segment(const DiscreteMeasure& mu, PathLiftState& state, cdouble m_to,
                   const LiftConfig& cfg, LiftDiagnostics* diag) {
  const cdouble m_from = state.m_current;
  if (m_to == m_from) return;
  // Radial segments are traversed geometrically, so the relative change of
  // w per step stays uniform on the approach from infinity.
  const cdouble ratio = m_to / m_from;
  const bool radial = m_from != cdouble(0) && std::abs(ratio.imag()) <= 1e-14 * std::abs(ratio) &&
                      ratio.real() > 0;
  auto point = [&](double s) {
    if (s >= 1.0) return m_to;
    if (radial) return m_from * std::pow(ratio.real(), s);
    return m_from + s * (m_to - m_from);
  };

  double s = 0.0;
  double h = std::min(cfg.initial_fraction, cfg.max_fraction);
  int easy = 0;
  cdouble w = state.w_current;
  cdouble m = m_from;
  cdouble dM = moment_map_derivative(mu, w);
  while (s < 1.0) {
    const double s_next = std::min(1.0, s + h);
    const cdouble m_next = point(s_next);
    const cdouble predicted = w + (m_next - m) / dM;
    const Newton nt = newton_solve(mu, predicted, m_next, cfg);
    if (diag) diag->newton_iterations += nt.iterations;
    const bool local = std::abs(nt.w - predicted) <= 0.5 * std::abs(predicted - w) + 1e-10 * std::abs(w);
    if (nt.converged && local) {
      w = nt.w;
      m = m_next;
      s = s_next;
      dM = moment_map_derivative(mu, w);
      state.m_current = m;
      state.w_current = w;
      state.residual = nt.residual;
      ++state.steps_taken;
      if (diag) ++diag->steps;
      if (nt.iterations <= 1 && ++easy >= 4) {
        h = std::min(2.0 * h, cfg.max_fraction);
        easy = 0;
      } else if (nt.iterations > 1) {
        easy = 0;
      }
    } else {
      if (diag) ++diag->rejected_steps;
      easy = 0;
      h *= 0.5;
      if (h < cfg.min_step) {
        std::ostringstream os;
        os.precision(17);
        os << "path lifting stalled at m = " << state.m_current << " (w = " << state.w_current
           << ", residual " << state.residual << ")";
        throw NumericalError(NumericalFailure::lift_failure, "lift_path", os.str());
      }
    }
  }
  if (diag) diag->residual = state.residual;
}

std::vector<cdouble> default_path(const SlitDomain& dom, cdouble target) {
  if (!dom.segment_crosses(0.0, target)) return {0.0, target};
  const double h_max = 0.5 * dom.min_height();
  const double h = std::copysign(std::min(std::abs(target.imag()), h_max), target.imag());
  const cdouble corner(target.real(), h);
  if (dom.segment_crosses(corner, target))
    throw NumericalError(NumericalFailure::domain_violation, "lift_path",
                         "target lies on a slit of the domain");
  return {0.0, corner, target};
}

cdouble lift_polyline(const DiscreteMeasure& mu, const std::vector<cdouble>& waypoints,
                      const SlitDomain& dom, const LiftConfig& cfg, LiftDiagnostics* diag) {
  if (waypoints.size() < 2 || waypoints.front() != cdouble(0))
    throw ContractViolation("lift path must start at the origin and have an endpoint");
  for (std::size_t k = 0; k + 1 < waypoints.size(); ++k)
    if (dom.segment_crosses(waypoints[k], waypoints[k + 1]))
      throw NumericalError(NumericalFailure::domain_violation, "lift_path",
                           "lift path leaves the slit domain");
  const double m1 = exact_moment(mu, 1);
  const double m2 = exact_moment(mu, 2);
  if (std::abs(m1) <= 1e-300) throw ContractViolation("path lifting needs a measure with nonzero mean");

  const cdouble first = waypoints[1];
  if (first == cdouble(0)) throw ContractViolation("lift path cannot revisit the origin");
  const cdouble dir = first / std::abs(first);

  double radius = std::min(cfg.start_radius, std::abs(first));
  PathLiftState state;
  bool seeded = false;
  for (int attempt = 0; attempt < 6 && !seeded; ++attempt, radius *= 0.1) {
    const cdouble m_start = radius * dir;
    const cdouble seed = m1 / m_start + m2 / m1;
    LiftConfig strict = cfg;
    strict.max_newton = 2 * cfg.max_newton;
    const Newton nt = newton_solve(mu, seed, m_start, strict);
    if (diag) diag->newton_iterations += nt.iterations;
    // the seed sits O(m) away from the branch at infinity
    if (nt.converged && std::abs(nt.w - seed) <= 0.25 * std::abs(seed)) {
      state = {m_start, nt.w, nt.residual, 0};
      seeded = true;
    }
  }
  if (!seeded)
    throw NumericalError(NumericalFailure::lift_failure, "lift_path",
                         "could not enter the branch at infinity");

  for (std::size_t k = 1; k < waypoints.size(); ++k) track_segment(mu, state, waypoints[k], cfg, diag);

  // final polish at the endpoint
  const Newton nt = newton_solve(mu, state.w_current, waypoints.back(), cfg);
  if (nt.residual <= state.residual || !std::isfinite(state.residual)) {
    state.w_current = nt.w;
    state.residual = nt.residual;
  }
  if (diag) diag->residual = state.residual;
  return state.w_current;
}

cdouble lift_path(const DiscreteMeasure& mu, cdouble target, const SlitDomain& dom,
                  const LiftConfig& cfg, LiftDiagnostics* diag) {
  if (target == cdouble(0)) throw ContractViolation("cannot lift to m = 0 (the preimage is infinity)");
  if (!dom.contains(target))
    throw NumericalError(NumericalFailure::domain_violation, "lift_path", "target outside the slit domain");
  return lift_polyline(mu, default_path(dom, target), dom, cfg, diag);
}

std::vector<cdouble> lift_contour(const DiscreteMeasure& mu, const std::vector<cdouble>& nodes,
                                  const SlitDomain& dom, const LiftConfig& cfg, LiftDiagnostics* diag) {
  std::vector<cdouble> out;
  out.reserve(nodes.size());
  if (nodes.empty()) return out;
  out.push_back(lift_path(mu, nodes[0], dom, cfg, diag));
  LiftConfig chord = cfg;
  chord.initial_fraction = 1.0;
  chord.max_fraction = 1.0;
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    if (nodes[k] == cdouble(0)) throw ContractViolation("contour passes through the origin");
    if (dom.segment_crosses(nodes[k - 1], nodes[k])) {
      out.push_back(lift_path(mu, nodes[k], dom, cfg, diag));
      continue;
    }
    PathLiftState state{nodes[k - 1], out.back(), 0.0, 0};
    track_segment(mu, state, nodes[k], chord, diag);
    const Newton nt = newton_solve(mu, state.w_current, nodes[k], cfg);
    out.push_back(nt.residual <= state.residual ? nt.w : state.w_current);
  }
  return out;
}

cdouble s_transform(const DiscreteMeasure& mu, cdouble m, const SlitDomain& dom, const LiftConfig& cfg) {
  if (m == cdouble(0)) throw ContractViolation("s_transform: m must be nonzero");
  const cdouble w = lift_path(mu, m, dom, cfg);
  return (1.0 + m) / (m * w);
}

// ------------------------------------------------------------- injectivity

InjectivityReport injectivity_report(const DiscreteMeasure& mu, const std::vector<cdouble>& contour) {
  std::vector<cdouble> pts = contour;
  if (pts.size() >= 2 && std::abs(pts.front() - pts.back()) <= 1e-12 * std::max(1.0, std::abs(pts.front())))
    pts.pop_back();
  if (pts.size() < 3) throw ContractViolation("injectivity_check needs at least three contour points");

  std::vector<cdouble> img(pts.size());
  double scale = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    img[k] = moment_map(mu, pts[k]);
    scale = std::max(scale, std::abs(img[k]));
  }
  const double tol = 1e-10 * std::max(1.0, scale);
  const std::size_t n = img.size();

  struct Seg {
    std::size_t idx;
    double xmin, xmax, ymin, ymax;
  };
  std::vector<Seg> segs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cdouble a = img[i], b = img[(i + 1) % n];
    segs[i] = {i, std::min(a.real(), b.real()), std::max(a.real(), b.real()),
               std::min(a.imag(), b.imag()), std::max(a.imag(), b.imag())};
  }
  std::sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) { return a.xmin < b.xmin; });

  InjectivityReport report;
  bool near_touch = false;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n && segs[t].xmin <= segs[s].xmax + tol; ++t) {
      const std::size_t i = segs[s].idx, j = segs[t].idx;
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap == 1 || gap == n - 1) continue;  // neighbours share a vertex
      if (segs[t].ymin > segs[s].ymax + tol || segs[s].ymin > segs[t].ymax + tol) continue;
      const cdouble a = img[i], b = img[(i + 1) % n], c = img[j], d = img[(j + 1) % n];
      if (segments_intersect(a, b, c, d)) {
        ++report.crossings;
      } else if (segment_distance(a, b, c, d) <= tol) {
        ++report.crossings;
        near_touch = true;
      }
    }
  }
  report.simple = report.crossings == 0;
  if (!report.simple) {
    std::ostringstream os;
    os << report.crossings << " self-intersection(s) of the image curve";
    if (near_touch) os << " (including near-tangencies within " << tol << ")";
    report.diagnostic = os.str();
  }
  return report;
}

bool injectivity_check(const DiscreteMeasure& mu, const std::vector<cdouble>& contour) {
  return injectivity_report(mu, contour).simple;
}

}  // namespace freedeconv
