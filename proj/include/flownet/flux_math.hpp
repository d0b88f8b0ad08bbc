#pragma once

#include <cmath>

// Per-edge dissipation formulas shared by the scalar kernels and the scalar
// model evaluator. The SIMD kernels mirror these expressions operation for
// operation; keep the order of arithmetic unchanged in all three places so
// the paths stay bit-identical.

namespace flownet::detail {

struct FluxTerms {
  double f;   // dissipation value
  double h;   // derivative with respect to the density gradient
  double fu;  // derivative with respect to the density
};

inline double linear_flux(double beta, double v) { return beta * v; }

inline FluxTerms linear_flux_terms(double beta, double v) {
  return {beta * v, beta, 0.0};
}

// sign(v) * sqrt(kappa * u * |v|), linearized on |v| < delta so the slope
// stays finite through v = 0.
inline double weymouth_flux(double kappa, double delta, double u, double v) {
  const double av = std::fabs(v);
  const double m = av >= delta ? av : delta;
  const double s = std::sqrt(kappa * u * m);
  return av >= delta ? std::copysign(s, v) : v * (s / delta);
}

inline FluxTerms weymouth_flux_terms(double kappa, double delta, double u, double v) {
  const double av = std::fabs(v);
  const bool outer = av >= delta;
  const double m = outer ? av : delta;
  const double s = std::sqrt(kappa * u * m);
  const double f = outer ? std::copysign(s, v) : v * (s / delta);
  const double h = (s / m) * (outer ? 0.5 : 1.0);
  const double fu = 0.5 * (f / u);
  return {f, h, fu};
}

}  // namespace flownet::detail
