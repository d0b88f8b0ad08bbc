#pragma once

#include <string>

#include "flownet/time_profile.hpp"

namespace flownet {

/// Density feedback law for an actuator: the compression ratio applied at an
/// edge end as a function of the local nodal density, alpha = k(rho).
///
/// Monotone closed-loop dynamics additionally need the effective slope
/// r(rho) = k(rho) + k'(rho) * rho to stay positive wherever the state can
/// go; check_feedback_policy probes that margin and the simulator enforces it
/// along trajectories.
class FeedbackPolicy {
 public:
  enum class Kind { Constant, PowerLaw, Tabulated };

  struct Eval {
    double k;   // ratio value
    double dk;  // derivative with respect to density
  };

  static FeedbackPolicy constant(double value);
  /// k(rho) = coeff * rho^exponent
  static FeedbackPolicy power_law(double coeff, double exponent);
  /// Piecewise-linear ratio table over density; held flat outside the table.
  static FeedbackPolicy tabulated(PiecewiseLinear table);

  Kind kind() const { return kind_; }
  double coeff() const { return coeff_; }
  double exponent() const { return exponent_; }
  const PiecewiseLinear& table() const { return table_; }

  Eval eval(double rho) const;

  bool operator==(const FeedbackPolicy&) const = default;

 private:
  FeedbackPolicy() = default;

  Kind kind_ = Kind::Constant;
  double coeff_ = 1.0;
  double exponent_ = 0.0;
  PiecewiseLinear table_ = PiecewiseLinear::constant(1.0);
};

struct FeedbackCheck {
  bool ok = false;           // margin strictly positive across the probe grid
  double min_margin = 0.0;   // min of k(rho) + k'(rho) * rho
  double argmin = 0.0;       // density where the minimum was seen
};

/// Probe r(rho) = k + k' * rho on a uniform grid over [rho_lo, rho_hi]
/// (plus table breakpoints for tabulated laws, where the one-sided slopes
/// both get checked).
FeedbackCheck check_feedback_policy(const FeedbackPolicy& policy, double rho_lo,
                                    double rho_hi, int grid_points = 256);

}  // namespace flownet
