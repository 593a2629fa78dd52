#include "porosity/perturbation.hpp"

#include <algorithm>
#include <cmath>

namespace porosity {

double bump_phi(double eps, double sigma, double t) {
  if (!(eps > 0.0) || !(sigma > 0.0)) throw Error("bump_phi: eps and sigma must be positive");
  return std::min(std::abs(t), eps / sigma);
}

double bump_psi(double r, const Vector& x, const NormSpec& space) {
  if (!(r > 0.0)) throw Error("bump_psi: r must be positive");
  return std::clamp(2.0 - 2.0 * norm(space, x) / r, 0.0, 1.0);
}

double gamma_weight(const WitnessParams& params, const Vector& x, const NormSpec& space) {
  const double psi = bump_psi(params.r, x, space);
  if (psi == 0.0) return 0.0;
  const double phi = bump_phi(params.eps, params.sigma, params.e_star(x));
  return params.sigma / (2.0 * params.r) * psi * phi;
}

Vector gamma(const WitnessParams& params, const Vector& x, const NormSpec& space) {
  const double lambda = gamma_weight(params, x, space);
  if (lambda == 0.0) return Vector::Zero(x.size());
  return lambda * (params.r * params.e - x);
}

}  // namespace porosity
