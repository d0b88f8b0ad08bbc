#pragma once

#include <array>
#include <vector>

namespace flownet {

/// Continuous piecewise-linear curve defined by breakpoints with strictly
/// increasing abscissae. Evaluation holds the endpoint values outside the
/// breakpoint range (with zero slope there). The slope is right-continuous
/// at breakpoints.
class PiecewiseLinear {
public:
  struct Sample {
    double value;
    double rate;  // slope of the active segment
  };

  PiecewiseLinear() : xs_{0.0}, ys_{0.0} {}

  static PiecewiseLinear constant(double value);

  /// Builds from (x, value) pairs; throws ValidationError unless the
  /// abscissae are strictly increasing and all entries are finite.
  static PiecewiseLinear from_points(const std::vector<std::array<double, 2>>& points);

  Sample at(double x) const;
  double value(double x) const { return at(x).value; }

  /// Exact integral of the curve (including hold extrapolation) over [x0, x1].
  double integral(double x0, double x1) const;

  /// Exact minimum / maximum of the curve over [x0, x1].
  double min_on(double x0, double x1) const;
  double max_on(double x0, double x1) const;

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  std::vector<std::array<double, 2>> points() const;

  bool operator==(const PiecewiseLinear&) const = default;

private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// Piecewise-linear scalar function of time; used for injection profiles and
/// actuation ratios.
using TimeProfile = PiecewiseLinear;

/// Pointwise sum, exact on the merged breakpoint grid.
PiecewiseLinear sum_profiles(const PiecewiseLinear& a, const PiecewiseLinear& b);

/// Union of both breakpoint sets restricted to [x0, x1], including x0 and x1.
std::vector<double> merged_breakpoints(const PiecewiseLinear& a, const PiecewiseLinear& b,
                                       double x0, double x1);

}  // namespace flownet
