#include "flownet/dissipation.hpp"

#include <cmath>
#include <string>

#include "flownet/errors.hpp"
#include "flownet/flux_math.hpp"

namespace flownet {

DissipationModel DissipationModel::linear(double beta) {
  DissipationModel m;
  m.kind = Kind::Linear;
  m.beta = beta;
  m.validate();
  return m;
}

DissipationModel DissipationModel::gas_weymouth(double kappa, double delta) {
  DissipationModel m;
  m.kind = Kind::GasWeymouth;
  m.kappa = kappa;
  m.delta = delta;
  m.validate();
  return m;
}

void DissipationModel::validate() const {
  if (kind == Kind::Linear) {
    if (!std::isfinite(beta) || beta <= 0.0) {
      throw ValidationError("dissipation model: beta must be positive, got " +
                            std::to_string(beta));
    }
  } else {
    if (!std::isfinite(kappa) || kappa <= 0.0) {
      throw ValidationError("dissipation model: kappa must be positive, got " +
                            std::to_string(kappa));
    }
    if (!std::isfinite(delta) || delta <= 0.0) {
      throw ValidationError("dissipation model: delta must be positive, got " +
                            std::to_string(delta));
    }
  }
  // Numeric sweep of the gradient slope over a log grid in u and a signed
  // range in v, including the regularized zone.
  for (double u = 1e-3; u <= 1e3; u *= 10.0) {
    for (double mag : {0.0, 0.25, 1.0, 4.0}) {
      for (double sign : {-1.0, 1.0}) {
        const double v = sign * (kind == Kind::GasWeymouth ? mag * delta + mag : mag);
        const double slope = kind == Kind::Linear
                                 ? beta
                                 : detail::weymouth_flux_terms(kappa, delta, u, v).h;
        if (!(slope > 0.0)) {
          throw ValidationError("dissipation model: df/dv is not positive at u=" +
                                std::to_string(u) + " v=" + std::to_string(v));
        }
      }
    }
  }
}

DissipationModel::Eval DissipationModel::eval(double t, double u, double v) const {
  (void)t;
  if (!std::isfinite(u) || !std::isfinite(v)) {
    throw ValidationError("dissipation eval: non-finite input");
  }
  if (kind == Kind::Linear) {
    const auto terms = detail::linear_flux_terms(beta, v);
    return {terms.f, terms.fu, terms.h};
  }
  if (u <= 0.0) {
    throw ValidationError("dissipation eval: density must be positive, got " +
                          std::to_string(u));
  }
  const auto terms = detail::weymouth_flux_terms(kappa, delta, u, v);
  return {terms.f, terms.fu, terms.h};
}

}  // namespace flownet
