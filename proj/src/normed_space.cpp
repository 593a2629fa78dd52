#include "porosity/normed_space.hpp"

#include <cmath>
#include <string>

namespace porosity {

NormSpec::NormSpec(int dim, double p) : dim_(dim), p_(p) {
  if (dim < 1) throw Error("NormSpec: dimension must be positive");
  if (!(p >= 1.0)) throw Error("NormSpec: p must satisfy p >= 1 (or be inf)");
}

double NormSpec::dual_exponent() const noexcept {
  if (p_ == 1.0) return kInfinity;
  if (is_inf()) return 1.0;
  return p_ / (p_ - 1.0);
}

void require_compatible(const NormSpec& space, const Vector& v) {
  if (v.size() != space.dim()) {
    throw Error("dimension mismatch: vector has " + std::to_string(v.size()) +
                " entries, space has dimension " + std::to_string(space.dim()));
  }
  if (!v.allFinite()) throw Error("vector has a non-finite entry");
}

namespace {

double lp_norm(const Vector& v, double p) {
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == 2.0) return v.stableNorm();
  if (p == kInfinity) return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  // scaled power sum, avoids overflow for large p
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += std::pow(std::abs(v[i]) / scale, p);
  return scale * std::pow(sum, 1.0 / p);
}

}  // namespace

double norm(const NormSpec& space, const Vector& v) {
  require_compatible(space, v);
  return lp_norm(v, space.p());
}

double distance(const NormSpec& space, const Vector& x, const Vector& y) {
  require_compatible(space, x);
  require_compatible(space, y);
  return lp_norm(x - y, space.p());
}

double dual_norm(const NormSpec& space, const Covector& f) {
  require_compatible(space, f.coeffs);
  return lp_norm(f.coeffs, space.dual_exponent());
}

Covector norming_functional(const NormSpec& space, const Vector& e) {
  const double n = norm(space, e);
  if (n == 0.0) throw Error("norming_functional: zero vector");
  if (std::abs(n - 1.0) > kUnitNormTol) {
    throw Error("norming_functional: vector is not unit-norm (norm " + std::to_string(n) + ")");
  }
  Vector coeffs = Vector::Zero(e.size());
  if (space.is_inf()) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < e.size(); ++i) {
      if (std::abs(e[i]) > std::abs(e[arg])) arg = i;
    }
    coeffs[arg] = e[arg] > 0 ? 1.0 : -1.0;
  } else if (space.p() == 1.0) {
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      coeffs[i] = e[i] > 0 ? 1.0 : (e[i] < 0 ? -1.0 : 0.0);
    }
  } else if (space.p() == 2.0) {
    coeffs = e / n;
  } else {
    const double p = space.p();
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      const double mag = std::pow(std::abs(e[i]) / n, p - 1.0);
      coeffs[i] = e[i] > 0 ? mag : (e[i] < 0 ? -mag : 0.0);
    }
  }
  return Covector{std::move(coeffs)};
}

}  // namespace porosity
