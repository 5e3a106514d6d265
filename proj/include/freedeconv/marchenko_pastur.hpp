#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "freedeconv/errors.hpp"

namespace freedeconv {

/// Marchenko-Pastur law MP_c of aspect ratio c = p/n in (0, 1): limiting
/// spectrum of (1/n) Y Y^T for a p x n matrix Y of iid unit-variance entries.
template <class Scalar>
class BasicMarchenkoPastur {
 public:
  using Complex = std::complex<Scalar>;

  explicit BasicMarchenkoPastur(Scalar c) : c_(c) {
    if (!(c > 0 && c < 1)) throw ContractViolation("Marchenko-Pastur ratio must lie in (0, 1)");
  }

  Scalar ratio() const { return c_; }
  Scalar left() const { return (1 - std::sqrt(c_)) * (1 - std::sqrt(c_)); }
  Scalar right() const { return (1 + std::sqrt(c_)) * (1 + std::sqrt(c_)); }

  /// sqrt((x-l)(r-x)) / (2 pi c x) on [l, r], zero elsewhere. The factor c
  /// makes the total mass one for every c.
  Scalar density(Scalar x) const {
    const Scalar l = left(), r = right();
    if (x <= l || x >= r) return 0;
    return std::sqrt((x - l) * (r - x)) / (2 * std::numbers::pi_v<Scalar> * c_ * x);
  }

  /// S_MP(m) = 1 / (1 + c m).
  Complex s_transform(const Complex& m) const {
    const Complex d = Scalar(1) + c_ * m;
    if (std::abs(d) < Scalar(1e-14))
      throw NumericalError(NumericalFailure::pole, "mp_s_transform", "S_MP has a pole at m = -1/c");
    return Scalar(1) / d;
  }

  /// Inverse of the moment map on the branch through infinity:
  /// (1 + m)(1 + c m) / m.
  Complex inverse_moment_map(const Complex& m) const {
    return (Scalar(1) + m) * (Scalar(1) + c_ * m) / m;
  }

  /// Closed-form Stieltjes transform off [l, r]; the product of principal
  /// square roots selects the branch with G(z) ~ 1/z.
  Complex stieltjes(const Complex& z) const {
    const Complex root = std::sqrt(z - left()) * std::sqrt(z - right());
    return (z - (1 - c_) - root) / (2 * c_ * z);
  }

 private:
  Scalar c_;
};

using MarchenkoPastur = BasicMarchenkoPastur<double>;

}  // namespace freedeconv
