#pragma once

// The witness parameter tuple and the local perturbation built from it:
//
//   phi(t)   = min(|t|, eps/sigma)
//   psi(x)   = clamp(2 - 2||x||/r, 0, 1)
//   gamma(x) = (sigma / 2r) psi(x) phi(e*(x)) (r e - x)
//
// The witness map is g(x) = f(x + gamma(x - x0)).

#include "porosity/core.hpp"
#include "porosity/normed_space.hpp"

namespace porosity {

struct WitnessParams {
  double a = 0.0;
  double b = 0.0;
  Vector x0;
  Vector e;
  Covector e_star;
  double r = 0.0;
  double sigma = 0.0;
  double eps0 = 0.0;
  double eps = 0.0;
  double alpha = 0.0;
};

double bump_phi(double eps, double sigma, double t);

double bump_psi(double r, const Vector& x, const NormSpec& space);

/// Convex-combination weight lambda(x) = (sigma/2r) psi(x) phi(e*(x)) of the
/// displacement toward r e. Zero whenever ||x|| >= r.
double gamma_weight(const WitnessParams& params, const Vector& x, const NormSpec& space);

/// gamma(x); exactly the zero vector when ||x|| >= r.
Vector gamma(const WitnessParams& params, const Vector& x, const NormSpec& space);

}  // namespace porosity
