#include "freedeconv/deconvolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "freedeconv/tridiagonal.hpp"

namespace freedeconv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double max_relative_change(const MomentSequence& a, const MomentSequence& b) {
  double d = 0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k)
    d = std::max(d, std::abs(a[k] - b[k]) / std::max(1.0, std::abs(b[k])));
  return d;
}

}  // namespace

void DeconvConfig::validate() const {
  if (!(contour_margin > 0 && contour_margin < 1)) throw ContractViolation("contour_margin must lie in (0, 1)");
  if (contour_nodes < 64) throw ContractViolation("contour_nodes must be at least 64");
  if (max_contour_nodes < contour_nodes) throw ContractViolation("max_contour_nodes below contour_nodes");
  if (!(newton_tol > 0 && min_step > 0 && rank_tol > 0 && contour_noise_tol > 0 && node_convergence_tol > 0))
    throw ContractViolation("deconvolution tolerances must be positive");
  if (max_support < 1) throw ContractViolation("max_support must be at least 1");
  if (max_moments != 0 && max_moments < 2 * max_support)
    throw ContractViolation("max_moments must be at least 2 * max_support");
}

cdouble t_ratio(const DiscreteMeasure& mu_n, double c, cdouble m, const SlitDomain& dom, const DeconvConfig& cfg) {
  LiftConfig lc;
  lc.newton_tol = cfg.newton_tol;
  lc.min_step = cfg.min_step;
  const MarchenkoPastur mp(c);
  return s_transform(mu_n, m, dom, lc) / mp.s_transform(m);
}

DeconvResult deconvolve(const DiscreteMeasure& mu_n, double c, const DeconvConfig& cfg) {
  cfg.validate();
  const MarchenkoPastur mp(c);
  if (!(mu_n.min_atom() > 0)) throw ContractViolation("empirical spectrum must be positive");

  DeconvResult res;
  res.config = cfg;
  res.c = c;
  DeconvDiagnostics& diag = res.diagnostics;

  auto t0 = Clock::now();
  const RamificationData ram = critical_points(mu_n);
  const SlitDomain dom = slit_domain(ram);
  diag.branch_points = ram.branch_points_upper.size();
  // |m| = 1 reaches m = -1, where M^-1 = 0 and G of the estimate is 0/0 on the contour
  const double cap = (1.0 - cfg.contour_margin) * std::min(1.0, 1.0 / (2.0 * c));
  const double radius = choose_m_radius(dom, cfg.contour_margin, cap);
  diag.contour_radius = radius;
  diag.t_ramification_s = seconds_since(t0);

  LiftConfig lc;
  lc.newton_tol = cfg.newton_tol;
  lc.min_step = cfg.min_step;
  const int K = cfg.moment_count();

  t0 = Clock::now();
  auto attempt = [&](int nodes, ContourRepresentation& rep, std::vector<cdouble>& m_nodes,
                     std::vector<cdouble>& s) {
    m_nodes = circle_nodes(0.0, radius, std::size_t(nodes));
    LiftDiagnostics ld;
    const std::vector<cdouble> w = lift_contour(mu_n, m_nodes, dom, lc, &ld);
    diag.lift_steps += ld.steps;
    diag.lift_rejected += ld.rejected_steps;
    diag.newton_iterations += ld.newton_iterations;
    s.assign(w.size(), 0.0);
    double worst = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const cdouble m = m_nodes[j];
      worst = std::max(worst, std::abs(moment_map(mu_n, w[j]) - m));
      s[j] = (1.0 + m) * (1.0 + c * m) / (m * w[j]);  // S_mu / S_MP
    }
    diag.lift_residual = worst;
    rep = contour_rep_from_s(s, m_nodes);
    return moments_from_contour(rep, K, cfg.contour_noise_tol);
  };

  int nodes = cfg.contour_nodes;
  ContourRepresentation rep;
  std::vector<cdouble> m_nodes, t_values;
  ContourMoments cm = attempt(nodes, rep, m_nodes, t_values);
  while (2 * nodes <= cfg.max_contour_nodes) {
    ContourRepresentation rep2;
    std::vector<cdouble> m2, t2;
    ContourMoments cm2 = attempt(2 * nodes, rep2, m2, t2);
    const double change = max_relative_change(cm2.moments, cm.moments);
    nodes *= 2;
    cm = std::move(cm2);
    rep = std::move(rep2);
    m_nodes = std::move(m2);
    t_values = std::move(t2);
    if (change < cfg.node_convergence_tol) break;
    if (2 * nodes > cfg.max_contour_nodes) {
      std::ostringstream os;
      os << "contour moments still changing by " << change << " at " << nodes << " nodes";
      diag.notes.push_back(os.str());
    }
  }
  diag.contour_nodes = nodes;
  diag.imag_residue = cm.imag_residue;
  diag.mass_defect = cm.mass_defect;
  diag.t_lift_s = seconds_since(t0);

  t0 = Clock::now();
  const double window_hi = 1.1 * mu_n.max_atom() / mp.left();
  int support = cfg.max_support;
  bool done = false;
  while (support >= 1 && !done) {
    RecoveryReport rr;
    try {
      DiscreteMeasure est = recover_measure(cm.moments, support, cfg.rank_tol, &rr);
      if (est.min_atom() < 0 || est.max_atom() > window_hi) {
        std::ostringstream os;
        os << "estimate with " << est.size() << " atoms leaves the window [0, " << window_hi
           << "]; reducing support";
        diag.notes.push_back(os.str());
        support = std::min(support, int(est.size())) - 1;
        continue;
      }
      res.estimate = std::move(est);
      diag.rank = rr.rank;
      diag.pivots = rr.pivots;
      done = true;
    } catch (const NumericalError& e) {
      if (e.kind() != NumericalFailure::invalid_moments) throw;
      diag.notes.push_back(std::string(e.what()) + "; reducing support");
      support = std::min(support - 1, std::max(rr.rank, 1));
      if (rr.rank == 0) break;
    }
  }
  if (!done)
    throw NumericalError(NumericalFailure::invalid_moments, "recover_measure",
                         "no support size yields a measure inside the sanity window");
  diag.support_used = support;
  diag.t_recovery_s = seconds_since(t0);

  res.moments_used = cm.moments;
  res.z_contour = std::move(rep);
  res.m_contour = std::move(m_nodes);
  res.t_values = std::move(t_values);
  return res;
}

cdouble forward_mp_G(const DiscreteMeasure& nu, double c, cdouble z) {
  const MarchenkoPastur mp(c);
  if (z.imag() == 0.0) throw ContractViolation("forward_mp_G needs z off the real axis");
  if (z.imag() < 0) return std::conj(forward_mp_G(nu, c, std::conj(z)));

  const auto& lam = nu.atoms();
  const auto& wt = nu.weights();
  auto sum = [&](cdouble v, cdouble* deriv) {
    cdouble s = 0, ds = 0;
    for (Eigen::Index j = 0; j < lam.size(); ++j) {
      const cdouble d = 1.0 + lam(j) * v;
      s += wt(j) * lam(j) / d;
      ds -= wt(j) * lam(j) * lam(j) / (d * d);
    }
    if (deriv) *deriv = ds;
    return s;
  };
  auto residual = [&](cdouble v) {
    const cdouble F = -1.0 / v - z + c * sum(v, nullptr);
    return std::abs(F) / (std::abs(z) + 1.0 / std::abs(v));
  };

  cdouble v = -1.0 / z;
  double res = residual(v);
  double theta = 1.0;
  int it = 0;
  for (; it < 10000 && res > 1e-8; ++it) {
    const cdouble next = (1.0 - theta) * v + theta * (-1.0 / (z - c * sum(v, nullptr)));
    const double r = residual(next);
    if (!(r < res)) theta = std::max(0.5 * theta, 1.0 / 64.0);
    v = next;
    res = r;
  }
  // Newton polish; keep the fixed-point iterate if Newton leaves the upper half-plane
  cdouble vn = v;
  for (int k = 0; k < 50 && residual(vn) > 1e-15; ++k) {
    cdouble ds;
    const cdouble F = -1.0 / vn - z + c * sum(vn, &ds);
    const cdouble dF = 1.0 / (vn * vn) + c * ds;
    const cdouble step = F / dF;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
    vn -= step;
    if (std::abs(step) <= 1e-16 * std::abs(vn)) break;
  }
  if (vn.imag() > 0 && residual(vn) <= res) {
    v = vn;
    res = residual(v);
  }
  for (; it < 10000 && res > 1e-12; ++it) {
    v = 0.5 * v + 0.5 * (-1.0 / (z - c * sum(v, nullptr)));
    res = residual(v);
  }
  if (!(res <= 1e-12) || !(v.imag() > 0)) {
    std::ostringstream os;
    os.precision(17);
    os << "Marchenko-Pastur equation did not converge at z = " << z << " (residual " << res << ")";
    throw NumericalError(NumericalFailure::solver, "forward_mp_G", os.str());
  }
  return (-v - (1.0 - c) / z) / c;
}

std::pair<double, double> forward_support_hull(const DiscreteMeasure& nu, double c) {
  const MarchenkoPastur mp(c);
  if (nu.min_atom() < 0) throw ContractViolation("population measure must be nonnegative");
  if (!(nu.max_atom() > 0)) throw ContractViolation("population measure must have a positive atom");
  return {mp.left() * nu.min_atom(), mp.right() * nu.max_atom()};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n) {
  if (n < 1) throw ContractViolation("gauss_legendre needs n >= 1");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  const auto eig = tridiagonal_eigen<double>(a, off);
  return {eig.values, 2.0 * eig.first_components.array().square().matrix()};
}

ContourRepresentation forward_contour(const DiscreteMeasure& nu, double c, int nodes) {
  if (nodes < 64) throw ContractViolation("forward_contour needs at least 64 nodes");
  const auto [lo, hi] = forward_support_hull(nu, c);
  const double span = hi - lo;
  const double eta = 0.05 * span;
  const double x0 = lo - eta, x1 = hi + eta;
  constexpr int order = 16;
  static const auto gl = gauss_legendre(order);
  const double perimeter = 2.0 * (x1 - x0) + 4.0 * eta;
  const double h = std::min(eta, perimeter * order / nodes);

  ContourRepresentation rep;
  auto side = [&](cdouble A, cdouble B, int panels) {
    for (int p = 0; p < panels; ++p) {
      const cdouble a = A + (B - A) * (double(p) / panels);
      const cdouble b = A + (B - A) * (double(p + 1) / panels);
      const cdouble mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int i = 0; i < order; ++i) {
        rep.sigma.push_back(mid + half * gl.first(i));
        rep.dsigma.push_back(half * gl.second(i));
      }
    }
  };
  const int horizontal = std::max(1, int(std::ceil((x1 - x0) / h)));
  const int vertical = 2 * std::max(1, int(std::ceil(eta / h)));  // even: no node on the real axis
  side({x0, -eta}, {x1, -eta}, horizontal);
  side({x1, -eta}, {x1, eta}, vertical);
  side({x1, eta}, {x0, eta}, horizontal);
  side({x0, eta}, {x0, -eta}, vertical);
  rep.value.reserve(rep.sigma.size());
  for (const auto& z : rep.sigma) rep.value.push_back(forward_mp_G(nu, c, z));
  return rep;
}

DiscreteMeasure discretize_forward(const DiscreteMeasure& nu, double c, int n) {
  return measure_from_jacobi(jacobi_from_contour(forward_contour(nu, c, 1024), n));
}

Eigen::MatrixXd ree_assemble(const Eigen::MatrixXd& eigvecs, const Eigen::VectorXd& eigvals,
                             const DiscreteMeasure& nu_hat) {
  const Eigen::Index p = eigvecs.rows();
  if (eigvecs.cols() != p || eigvals.size() != p || p == 0)
    throw ContractViolation("ree_assemble needs a square eigenvector matrix and one eigenvalue per column");
  const double defect =
      (eigvecs.transpose() * eigvecs - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
  if (defect > 1e-8) throw ContractViolation("ree_assemble: eigenvectors are not orthonormal");
  for (Eigen::Index i = 1; i < p; ++i)
    if (eigvals(i) < eigvals(i - 1)) throw ContractViolation("ree_assemble: eigenvalues must be ascending");
  Eigen::VectorXd lambda(p);
  for (Eigen::Index i = 0; i < p; ++i) lambda(i) = quantile(nu_hat, (double(i) + 0.5) / double(p));
  return eigvecs * lambda.asDiagonal() * eigvecs.transpose();
}

Eigen::MatrixXd ree_estimate(const Eigen::MatrixXd& X, const DiscreteMeasure& nu_hat) {
  if (X.cols() == 0) throw ContractViolation("ree_estimate needs at least one sample");
  const Eigen::MatrixXd S = X * X.transpose() / double(X.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  if (eig.info() != Eigen::Success)
    throw NumericalError(NumericalFailure::solver, "ree_estimate", "sample covariance eigensolver failed");
  return ree_assemble(eig.eigenvectors(), eig.eigenvalues(), nu_hat);
}

}  // namespace freedeconv
