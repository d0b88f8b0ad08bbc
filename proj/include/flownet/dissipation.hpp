#pragma once

namespace flownet {

/// Edge dissipation law: maps density u and density gradient v to the
/// dissipation value f(t, u, v) whose negative is the mass flux. Both
/// variants are time-independent; t is kept in the evaluation signature
/// because the edge law is allowed to depend on it.
///
/// Units with flux in kg/m^2/s: beta is m^2/s, kappa is m^3/s^2.
struct DissipationModel {
  enum class Kind { Linear, GasWeymouth };

  Kind kind = Kind::Linear;
  double beta = 1.0;   // Linear: f = beta * v
  double kappa = 1.0;  // GasWeymouth: f = sign(v) * sqrt(kappa * u * |v|)
  double delta = 1e-6; // GasWeymouth: |v| below delta is linearized

  /// Validated constructors; throw ValidationError when the parameters do
  /// not give a strictly gradient-increasing law.
  static DissipationModel linear(double beta);
  static DissipationModel gas_weymouth(double kappa, double delta = 1e-6);

  /// Parameter checks plus a numeric sweep of df/dv > 0 over a (u, v) grid.
  void validate() const;

  struct Eval {
    double f;
    double df_du;
    double df_dv;
  };

  /// Value and analytic partials. Throws ValidationError for non-finite
  /// inputs, and for u <= 0 under GasWeymouth.
  Eval eval(double t, double u, double v) const;

  bool operator==(const DissipationModel&) const = default;
};

}  // namespace flownet
