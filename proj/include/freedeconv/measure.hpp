#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "freedeconv/errors.hpp"

namespace freedeconv {

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Finitely supported probability measure sum_j w_j delta_{x_j} on the real
/// line. Atoms are kept strictly increasing; atoms closer than
/// 1e-10 * (support span) are merged at construction.
template <class Scalar>
class BasicDiscreteMeasure {
 public:
  using Vector = VectorX<Scalar>;
  using Complex = std::complex<Scalar>;

  /// Weights must be positive and sum to one within 1e-9; they are then
  /// renormalized exactly.
  BasicDiscreteMeasure(const Vector& atoms, const Vector& weights) {
    build(atoms, weights, /*normalize_only=*/false);
  }

  static BasicDiscreteMeasure dirac(Scalar x) {
    return BasicDiscreteMeasure(Vector::Constant(1, x), Vector::Ones(1));
  }

  /// Empirical measure: uniform weight on each entry (duplicates merge).
  static BasicDiscreteMeasure uniform(const Vector& atoms) {
    if (atoms.size() == 0) throw ContractViolation("uniform measure needs at least one atom");
    return BasicDiscreteMeasure(atoms, Vector::Constant(atoms.size(), Scalar(1) / atoms.size()));
  }

  /// Accepts any nonnegative weights with a positive total; zero weights are
  /// dropped and the rest normalized.
  static BasicDiscreteMeasure from_unnormalized(const Vector& atoms, const Vector& weights) {
    BasicDiscreteMeasure mu;
    mu.build(atoms, weights, /*normalize_only=*/true);
    return mu;
  }

  Eigen::Index size() const { return atoms_.size(); }
  const Vector& atoms() const { return atoms_; }
  const Vector& weights() const { return weights_; }
  Scalar min_atom() const { return atoms_(0); }
  Scalar max_atom() const { return atoms_(atoms_.size() - 1); }

  template <class Other>
  BasicDiscreteMeasure<Other> cast() const {
    return BasicDiscreteMeasure<Other>(atoms_.template cast<Other>(),
                                       weights_.template cast<Other>());
  }

 private:
  BasicDiscreteMeasure() = default;

  void build(const Vector& atoms, const Vector& weights, bool normalize_only) {
    using std::abs;
    using std::isfinite;
    if (atoms.size() == 0 || atoms.size() != weights.size())
      throw ContractViolation("measure needs matching, non-empty atom and weight arrays");
    std::vector<Eigen::Index> order;
    Scalar total = 0;
    for (Eigen::Index i = 0; i < atoms.size(); ++i) {
      if (!isfinite(atoms(i)) || !isfinite(weights(i)))
        throw ContractViolation("measure entries must be finite");
      if (weights(i) < 0 || (!normalize_only && weights(i) == 0))
        throw ContractViolation("measure weights must be positive");
      if (weights(i) > 0) order.push_back(i);
      total += weights(i);
    }
    if (order.empty() || !(total > 0)) throw ContractViolation("measure has zero total mass");
    if (!normalize_only && abs(total - Scalar(1)) > Scalar(1e-9))
      throw ContractViolation("measure weights must sum to one");

    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return atoms(a) < atoms(b); });
    const Scalar span = atoms(order.back()) - atoms(order.front());
    const Scalar merge_tol = Scalar(1e-10) * span;

    std::vector<Scalar> xs, ws;
    for (Eigen::Index i : order) {
      const Scalar w = weights(i) / total;
      if (!xs.empty() && atoms(i) - xs.back() <= merge_tol) {
        xs.back() = (xs.back() * ws.back() + atoms(i) * w) / (ws.back() + w);
        ws.back() += w;
      } else {
        xs.push_back(atoms(i));
        ws.push_back(w);
      }
    }
    atoms_ = Eigen::Map<const Vector>(xs.data(), Eigen::Index(xs.size()));
    weights_ = Eigen::Map<const Vector>(ws.data(), Eigen::Index(ws.size()));
  }

  Vector atoms_;
  Vector weights_;
};

using DiscreteMeasure = BasicDiscreteMeasure<double>;

/// Moments m_0 = 1, m_1, ..., m_K.
template <class Scalar>
class BasicMomentSequence {
 public:
  explicit BasicMomentSequence(std::vector<Scalar> values) : values_(std::move(values)) {
    using std::isfinite;
    if (values_.empty() || values_.front() != Scalar(1))
      throw ContractViolation("moment sequence must start with m_0 = 1");
    for (const Scalar& v : values_)
      if (!isfinite(v)) throw ContractViolation("moment sequence entries must be finite");
  }

  std::size_t size() const { return values_.size(); }
  const Scalar& operator[](std::size_t k) const { return values_[k]; }
  const std::vector<Scalar>& values() const { return values_; }

 private:
  std::vector<Scalar> values_;
};

using MomentSequence = BasicMomentSequence<double>;

namespace detail {
template <class Scalar>
void check_not_atom(const BasicDiscreteMeasure<Scalar>& mu, const std::complex<Scalar>& z) {
  using std::abs;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    const Scalar x = mu.atoms()(j);
    if (abs(z - x) <= Scalar(1e-14) * std::max(Scalar(1), abs(x)))
      throw NumericalError(NumericalFailure::pole, "transform",
                           "evaluation point coincides with an atom");
  }
}
}  // namespace detail

/// Stieltjes transform G(z) = sum_j w_j / (z - x_j).
template <class Scalar>
std::complex<Scalar> stieltjes(const BasicDiscreteMeasure<Scalar>& mu, const std::complex<Scalar>& z) {
  detail::check_not_atom(mu, z);
  std::complex<Scalar> g(0);
  for (Eigen::Index j = 0; j < mu.size(); ++j) g += mu.weights()(j) / (z - mu.atoms()(j));
  return g;
}

/// M(z) = z G(z) - 1, evaluated as sum_j w_j x_j / (z - x_j) which avoids the
/// cancellation of the defining form at large |z|.
template <class Scalar>
std::complex<Scalar> moment_map(const BasicDiscreteMeasure<Scalar>& mu, const std::complex<Scalar>& z) {
  detail::check_not_atom(mu, z);
  std::complex<Scalar> m(0);
  for (Eigen::Index j = 0; j < mu.size(); ++j)
    m += mu.weights()(j) * mu.atoms()(j) / (z - mu.atoms()(j));
  return m;
}

/// M'(z) = -sum_j w_j x_j / (z - x_j)^2.
template <class Scalar>
std::complex<Scalar> moment_map_derivative(const BasicDiscreteMeasure<Scalar>& mu,
                                           const std::complex<Scalar>& z) {
  detail::check_not_atom(mu, z);
  std::complex<Scalar> d(0);
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    const std::complex<Scalar> r = Scalar(1) / (z - mu.atoms()(j));
    d -= mu.weights()(j) * mu.atoms()(j) * r * r;
  }
  return d;
}

/// Power sum sum_j w_j x_j^k.
template <class Scalar>
Scalar exact_moment(const BasicDiscreteMeasure<Scalar>& mu, int k) {
  if (k < 0) throw ContractViolation("moment order must be nonnegative");
  Scalar s = 0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    Scalar p = 1;
    for (int i = 0; i < k; ++i) p *= mu.atoms()(j);
    s += mu.weights()(j) * p;
  }
  return s;
}

template <class Scalar>
BasicMomentSequence<Scalar> exact_moments(const BasicDiscreteMeasure<Scalar>& mu, int max_order) {
  if (max_order < 0) throw ContractViolation("moment order must be nonnegative");
  std::vector<Scalar> m(std::size_t(max_order) + 1);
  for (int k = 0; k <= max_order; ++k) m[std::size_t(k)] = exact_moment(mu, k);
  m[0] = Scalar(1);
  return BasicMomentSequence<Scalar>(std::move(m));
}

/// Cumulative distribution function t -> mu((-inf, t]).
template <class Scalar>
Scalar cdf(const BasicDiscreteMeasure<Scalar>& mu, Scalar t) {
  Scalar s = 0;
  for (Eigen::Index j = 0; j < mu.size() && mu.atoms()(j) <= t; ++j) s += mu.weights()(j);
  return std::min(s, Scalar(1));
}

/// Smallest atom x with F(x) >= q.
template <class Scalar>
Scalar quantile(const BasicDiscreteMeasure<Scalar>& mu, Scalar q) {
  Scalar s = 0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    s += mu.weights()(j);
    if (s >= q - Scalar(1e-12)) return mu.atoms()(j);
  }
  return mu.max_atom();
}

/// Wasserstein-1 distance, integral of |F_mu - F_nu| computed exactly over
/// the merged breakpoints of the two step functions.
template <class Scalar>
Scalar wasserstein1(const BasicDiscreteMeasure<Scalar>& mu, const BasicDiscreteMeasure<Scalar>& nu) {
  using std::abs;
  Eigen::Index i = 0, j = 0;
  Scalar fmu = 0, fnu = 0, prev = 0, total = 0;
  bool started = false;
  while (i < mu.size() || j < nu.size()) {
    const Scalar a = i < mu.size() ? mu.atoms()(i) : std::numeric_limits<Scalar>::infinity();
    const Scalar b = j < nu.size() ? nu.atoms()(j) : std::numeric_limits<Scalar>::infinity();
    const Scalar t = std::min(a, b);
    if (started) total += abs(fmu - fnu) * (t - prev);
    if (a == t) fmu += mu.weights()(i++);
    if (b == t) fnu += nu.weights()(j++);
    prev = t;
    started = true;
  }
  return total;
}

}  // namespace freedeconv
