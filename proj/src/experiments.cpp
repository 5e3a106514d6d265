#include "freedeconv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace freedeconv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::MatrixXd toeplitz_matrix(int p, double rho) {
  Eigen::MatrixXd T(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) T(i, j) = std::pow(rho, std::abs(i - j));
  return T;
}

}  // namespace

DiscreteMeasure Scenario::truth(int p) const {
  if (is_toeplitz()) return toeplitz_spectrum(p, toeplitz_rho);
  return *population;
}

Scenario scenario_by_id(const std::string& id) {
  auto measure = [](std::vector<double> x) {
    Eigen::VectorXd a = Eigen::Map<Eigen::VectorXd>(x.data(), Eigen::Index(x.size()));
    return DiscreteMeasure::uniform(a);
  };
  Scenario sc;
  sc.id = id;
  if (id == "S1") {
    sc.population = DiscreteMeasure::dirac(1.0);
  } else if (id == "S2_1") {
    sc.population = measure({1.0, 2.0});
  } else if (id == "S2_2") {
    sc.population = measure({1.0, 1.2});
    sc.c = 0.95;  // nominal ratio is 1, outside 0 < c < 1
    sc.modified = true;
  } else if (id == "S2_3") {
    sc.population = measure({1.0, 2.0, 5.0, 6.0, 8.0});
  } else if (id == "S3") {
    sc.toeplitz_rho = 0.3;
  } else {
    throw ContractViolation("unknown scenario id '" + id + "' (expected S1, S2_1, S2_2, S2_3 or S3)");
  }
  return sc;
}

Eigen::VectorXd population_diagonal(const DiscreteMeasure& pop, int p) {
  if (p < 1) throw ContractViolation("dimension p must be positive");
  const auto& w = pop.weights();
  std::vector<int> count(std::size_t(pop.size()));
  int assigned = 0;
  Eigen::Index heaviest = 0;
  for (Eigen::Index k = 0; k < pop.size(); ++k) {
    count[std::size_t(k)] = int(std::floor(w(k) * p + 1e-9));
    assigned += count[std::size_t(k)];
    if (w(k) > w(heaviest)) heaviest = k;
  }
  count[std::size_t(heaviest)] += p - assigned;
  Eigen::VectorXd d(p);
  int i = 0;
  for (Eigen::Index k = 0; k < pop.size(); ++k)
    for (int r = 0; r < count[std::size_t(k)]; ++r) d(i++) = pop.atoms()(k);
  return d;
}

DiscreteMeasure toeplitz_spectrum(int p, double rho) {
  if (p < 1) throw ContractViolation("dimension p must be positive");
  if (!(std::abs(rho) < 1)) throw ContractViolation("Toeplitz correlation must satisfy |rho| < 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(toeplitz_matrix(p, rho), Eigen::EigenvaluesOnly);
  return DiscreteMeasure::uniform(eig.eigenvalues());
}

Eigen::MatrixXd sample_data(const Scenario& sc, int p, int n, std::uint64_t seed) {
  if (p < 1 || p >= n) throw ContractViolation("sampling needs 1 <= p < n");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd Y(p, n);
  for (Eigen::Index j = 0; j < Y.cols(); ++j)
    for (Eigen::Index i = 0; i < Y.rows(); ++i) Y(i, j) = normal(gen);
  if (sc.is_toeplitz()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(toeplitz_matrix(p, sc.toeplitz_rho));
    const Eigen::MatrixXd root =
        eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
    return root * Y;
  }
  return population_diagonal(*sc.population, p).cwiseSqrt().asDiagonal() * Y;
}

DiscreteMeasure sample_spectrum(const Scenario& sc, int p, int n, std::uint64_t seed) {
  const Eigen::MatrixXd X = sample_data(sc, p, n, seed);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p, p);
  S.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0 / n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw NumericalError(NumericalFailure::solver, "sample_spectrum", "eigensolver failed");
  return DiscreteMeasure::uniform(eig.eigenvalues());
}

Eigen::VectorXd baseline_grid(const DiscreteMeasure& mu3, int grid_points) {
  if (grid_points < 2) throw ContractViolation("baseline grid needs at least two points");
  return Eigen::VectorXd::LinSpaced(grid_points, 0.0, 1.2 * mu3.max_atom());
}

namespace {

// Lawson-Hanson active-set solution of min |A x - b| subject to x >= 0, given
// the normal equations AtA x = Atb.
Eigen::VectorXd nnls_normal(const Eigen::MatrixXd& AtA, const Eigen::VectorXd& Atb, int max_iter) {
  const Eigen::Index n = Atb.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(std::size_t(n), false);
  const double tol = 1e-12 * std::max(1.0, Atb.cwiseAbs().maxCoeff());

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[std::size_t(j)]) idx.push_back(j);
    const Eigen::Index m = Eigen::Index(idx.size());
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      rhs(i) = Atb(idx[std::size_t(i)]);
      for (Eigen::Index j = 0; j < m; ++j) A(i, j) = AtA(idx[std::size_t(i)], idx[std::size_t(j)]);
    }
    const Eigen::VectorXd sol = A.ldlt().solve(rhs);
    z.setZero(n);
    for (Eigen::Index i = 0; i < m; ++i) z(idx[std::size_t(i)]) = sol(i);
  };

  for (int outer = 0; outer < max_iter; ++outer) {
    const Eigen::VectorXd grad = Atb - AtA * x;
    Eigen::Index best = -1;
    double gmax = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[std::size_t(j)] && grad(j) > gmax) {
        gmax = grad(j);
        best = j;
      }
    if (best < 0) break;
    passive[std::size_t(best)] = true;
    Eigen::VectorXd z;
    for (int inner = 0; inner < 3 * int(n); ++inner) {
      solve_passive(z);
      double alpha = 1.0;
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[std::size_t(j)] && z(j) <= 0) {
          feasible = false;
          alpha = std::min(alpha, x(j) / (x(j) - z(j)));
        }
      if (feasible) break;
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[std::size_t(j)] && x(j) <= 1e-15) {
          passive[std::size_t(j)] = false;
          x(j) = 0.0;
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) x(j) = passive[std::size_t(j)] ? std::max(z(j), 0.0) : 0.0;
  }
  return x;
}

}  // namespace

DiscreteMeasure baseline_subordination(const DiscreteMeasure& mu3, double c, const Eigen::VectorXd& grid,
                                       const BaselineOptions& opts, BaselineDiagnostics* diag) {
  const MarchenkoPastur mp(c);
  if (!(opts.sigma > 0)) throw ContractViolation("baseline sigma must be positive");
  if (!(opts.ridge_alpha >= 0)) throw ContractViolation("ridge parameter must be nonnegative");
  if (grid.size() < 2) throw ContractViolation("baseline grid needs at least two points");

  auto t0 = Clock::now();
  const double s = opts.sigma;
  const Eigen::Index N = grid.size();
  // the smoothed density is sampled past the candidate grid so the Cauchy tails are seen
  const Eigen::VectorXd xs =
      Eigen::VectorXd::LinSpaced(N, grid.minCoeff() - 3.0 * s, grid.maxCoeff() + 3.0 * s);
  std::vector<bool> ok(std::size_t(N), false);
  Eigen::VectorXd smoothed(N);
  int failures = 0;
  for (Eigen::Index g = 0; g < N; ++g) {
    const cdouble z(xs(g), s);
    auto T = [&](cdouble w) {
      const cdouble F3 = 1.0 / stieltjes(mu3, w);
      const cdouble h3 = (w - F3) / (w * w);
      const cdouble u = 1.0 / (z * h3);
      return z * (u - 1.0 / mp.stieltjes(u));
    };
    // plain iteration first, then damped restarts
    bool converged = false;
    cdouble w = z;
    const double thetas[] = {1.0, 0.5, 0.25};
    const int budget = std::max(1, opts.max_iter / 3);
    for (double theta : thetas) {
      w = z;
      for (int it = 0; it < budget; ++it) {
        cdouble next;
        try {
          next = (1.0 - theta) * w + theta * T(w);
        } catch (const NumericalError&) {
          break;
        }
        if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
        const double step = std::abs(next - w);
        w = next;
        if (step < opts.tol) {
          converged = w.imag() > 0;
          break;
        }
      }
      if (converged) break;
    }
    if (!converged) {
      ++failures;
      continue;
    }
    const cdouble F3 = 1.0 / stieltjes(mu3, w);
    const cdouble G2 = w / (F3 * z);
    smoothed(g) = -G2.imag() / std::numbers::pi;
    ok[std::size_t(g)] = true;
  }
  if (diag) {
    diag->unconverged = failures;
    diag->t_fixed_point_s = seconds_since(t0);
  }
  if (failures > N / 10) {
    std::ostringstream os;
    os << "subordination fixed point failed at " << failures << " of " << N
       << " grid points; try a larger sigma than " << opts.sigma;
    throw NumericalError(NumericalFailure::baseline_failure, "baseline_subordination", os.str());
  }

  t0 = Clock::now();
  // rows: converged evaluation points; columns: candidate atoms on the grid
  std::vector<Eigen::Index> rows;
  for (Eigen::Index g = 0; g < N; ++g)
    if (ok[std::size_t(g)]) rows.push_back(g);
  Eigen::MatrixXd K(Eigen::Index(rows.size()), N);
  Eigen::VectorXd V(Eigen::Index(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double x = xs(rows[r]);
    V(Eigen::Index(r)) = smoothed(rows[r]);
    for (Eigen::Index k = 0; k < N; ++k) {
      const double d = x - grid(k);
      K(Eigen::Index(r), k) = s / (std::numbers::pi * (d * d + s * s));
    }
  }
  Eigen::MatrixXd A = K.transpose() * K;
  A.diagonal().array() += opts.ridge_alpha * opts.ridge_alpha;
  const Eigen::VectorXd U = nnls_normal(A, K.transpose() * V, 3 * int(N));
  if (diag) diag->t_solve_s = seconds_since(t0);
  if (!(U.sum() > 0))
    throw NumericalError(NumericalFailure::baseline_failure, "baseline_subordination",
                         "regularized solution has no positive mass");
  return DiscreteMeasure::from_unnormalized(grid, U);
}

std::string to_string(Method m) { return m == Method::contour ? "contour" : "subordination"; }

Method method_from_string(const std::string& s) {
  if (s == "contour") return Method::contour;
  if (s == "subordination") return Method::subordination;
  throw ContractViolation("unknown method '" + s + "' (expected contour or subordination)");
}

std::vector<RunReport> run_scenario(const Scenario& sc, const std::vector<int>& n_list, Method method,
                                    const std::vector<std::uint64_t>& seeds, const DeconvConfig& cfg,
                                    const BaselineOptions& baseline, unsigned threads) {
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] < n_list[i - 1]) throw ContractViolation("sample sizes must be ascending");
  std::vector<RunReport> reports;
  for (int n : n_list)
    for (std::uint64_t seed : seeds) {
      RunReport r;
      r.scenario = sc.label();
      r.n = n;
      r.p = int(std::lround(sc.c * n));
      r.seed = seed;
      r.method = method;
      reports.push_back(r);
    }

  auto run_one = [&](RunReport& r) {
    const auto t0 = Clock::now();
    try {
      const DiscreteMeasure spectrum = sample_spectrum(sc, r.p, r.n, r.seed);
      const double c = double(r.p) / double(r.n);
      const DiscreteMeasure truth = sc.truth(r.p);
      if (method == Method::contour) {
        const DeconvResult res = deconvolve(spectrum, c, cfg);
        r.w1_error = wasserstein1(res.estimate, truth);
        r.t_lift_s = res.diagnostics.t_lift_s;
        r.t_recovery_s = res.diagnostics.t_recovery_s;
        r.diag_rank = res.diagnostics.rank;
        r.diag_imag_residue = res.diagnostics.imag_residue;
      } else {
        BaselineDiagnostics bd;
        const DiscreteMeasure est =
            baseline_subordination(spectrum, c, baseline_grid(spectrum, baseline.grid_points), baseline, &bd);
        r.w1_error = wasserstein1(est, truth);
        r.t_lift_s = bd.t_fixed_point_s;
        r.t_recovery_s = bd.t_solve_s;
        r.diag_rank = int(est.size());
        r.diag_imag_residue = 0.0;
      }
    } catch (const std::exception& e) {
      r.w1_error = std::numeric_limits<double>::quiet_NaN();
      r.error = e.what();
    }
    r.t_total_s = seconds_since(t0);
  };

  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, unsigned(std::max<std::size_t>(reports.size(), 1)));
  if (workers <= 1) {
    for (auto& r : reports) run_one(r);
    return reports;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < reports.size(); i = next++) run_one(reports[i]);
    });
  for (auto& th : pool) th.join();
  return reports;
}

void write_reports_csv(std::ostream& os, const std::vector<RunReport>& reports) {
  os << "scenario,n,p,seed,method,w1_error,t_total_s,t_lift_s,t_recovery_s,diag_rank,diag_imag_residue\n";
  os << std::setprecision(10);
  for (const auto& r : reports)
    os << r.scenario << ',' << r.n << ',' << r.p << ',' << r.seed << ',' << to_string(r.method) << ','
       << r.w1_error << ',' << r.t_total_s << ',' << r.t_lift_s << ',' << r.t_recovery_s << ',' << r.diag_rank
       << ',' << r.diag_imag_residue << '\n';
}

}  // namespace freedeconv
