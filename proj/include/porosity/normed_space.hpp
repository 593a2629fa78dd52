#pragma once

// Finite-dimensional lp spaces: norms, distances and norming functionals.

#include "porosity/core.hpp"

#include <limits>

namespace porosity {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Tolerance on "unit norm" preconditions.
inline constexpr double kUnitNormTol = 1e-9;

/// The space (R^dim, ||.||_p), p in [1, inf].
class NormSpec {
 public:
  NormSpec(int dim, double p);

  static NormSpec lp(int dim, double p) { return NormSpec(dim, p); }
  static NormSpec l1(int dim) { return NormSpec(dim, 1.0); }
  static NormSpec l2(int dim) { return NormSpec(dim, 2.0); }
  static NormSpec linf(int dim) { return NormSpec(dim, kInfinity); }

  int dim() const noexcept { return dim_; }
  double p() const noexcept { return p_; }
  bool is_inf() const noexcept { return p_ == kInfinity; }

  /// q with 1/p + 1/q = 1.
  double dual_exponent() const noexcept;

  /// The same dimension with the dual exponent.
  NormSpec dual() const { return NormSpec(dim_, dual_exponent()); }

  friend bool operator==(const NormSpec&, const NormSpec&) = default;

 private:
  int dim_;
  double p_;
};

/// A linear functional v -> <coeffs, v>.
struct Covector {
  Vector coeffs;

  double operator()(const Vector& v) const { return coeffs.dot(v); }
};

/// ||v||_p. Throws on dimension mismatch or non-finite entries.
double norm(const NormSpec& space, const Vector& v);

/// ||x - y||_p.
double distance(const NormSpec& space, const Vector& x, const Vector& y);

/// Norm of a covector in the dual space (lq with q the dual exponent).
double dual_norm(const NormSpec& space, const Covector& f);

/// A norm-one functional with f(e) = 1 for a unit vector e.
///
/// 1 < p < inf uses the duality map sign(e_i)|e_i|^(p-1); p = 1 the sign
/// vector; p = inf the signed coordinate functional at the first maximal
/// coordinate.
Covector norming_functional(const NormSpec& space, const Vector& e);

/// Throws unless v has the space's dimension and finite entries.
void require_compatible(const NormSpec& space, const Vector& v);

}  // namespace porosity
