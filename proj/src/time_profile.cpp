#include "flownet/time_profile.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "flownet/errors.hpp"

namespace flownet {

PiecewiseLinear PiecewiseLinear::constant(double value) {
  return from_points({{0.0, value}});
}

PiecewiseLinear PiecewiseLinear::from_points(const std::vector<std::array<double, 2>>& points) {
  if (points.empty()) {
    throw ValidationError("profile: needs at least one breakpoint");
  }
  PiecewiseLinear p;
  p.xs_.clear();
  p.ys_.clear();
  p.xs_.reserve(points.size());
  p.ys_.reserve(points.size());
  for (const auto& pt : points) {
    if (!std::isfinite(pt[0]) || !std::isfinite(pt[1])) {
      throw ValidationError("profile: non-finite breakpoint");
    }
    if (!p.xs_.empty() && pt[0] <= p.xs_.back()) {
      throw ValidationError("profile: breakpoint abscissae must be strictly increasing");
    }
    p.xs_.push_back(pt[0]);
    p.ys_.push_back(pt[1]);
  }
  return p;
}

PiecewiseLinear::Sample PiecewiseLinear::at(double x) const {
  if (x <= xs_.front()) {
    if (x == xs_.front() && xs_.size() > 1) {
      const double slope = (ys_[1] - ys_[0]) / (xs_[1] - xs_[0]);
      return {ys_[0], slope};
    }
    return {ys_.front(), 0.0};
  }
  if (x >= xs_.back()) {
    return {ys_.back(), 0.0};
  }
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
  const std::size_t lo = hi - 1;
  const double slope = (ys_[hi] - ys_[lo]) / (xs_[hi] - xs_[lo]);
  return {ys_[lo] + slope * (x - xs_[lo]), slope};
}

double PiecewiseLinear::integral(double x0, double x1) const {
  if (x1 < x0) return -integral(x1, x0);
  // Trapezoid over each linear piece is exact; the breakpoint grid clipped
  // to [x0, x1] exposes every piece.
  std::vector<double> grid;
  grid.push_back(x0);
  for (double x : xs_) {
    if (x > x0 && x < x1) grid.push_back(x);
  }
  grid.push_back(x1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    acc += 0.5 * (value(grid[i]) + value(grid[i + 1])) * (grid[i + 1] - grid[i]);
  }
  return acc;
}

double PiecewiseLinear::min_on(double x0, double x1) const {
  double m = std::min(value(x0), value(x1));
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (xs_[i] > x0 && xs_[i] < x1) m = std::min(m, ys_[i]);
  }
  return m;
}

double PiecewiseLinear::max_on(double x0, double x1) const {
  double m = std::max(value(x0), value(x1));
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (xs_[i] > x0 && xs_[i] < x1) m = std::max(m, ys_[i]);
  }
  return m;
}

std::vector<std::array<double, 2>> PiecewiseLinear::points() const {
  std::vector<std::array<double, 2>> pts(xs_.size());
  for (std::size_t i = 0; i < xs_.size(); ++i) pts[i] = {xs_[i], ys_[i]};
  return pts;
}

PiecewiseLinear sum_profiles(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  std::set<double> grid(a.xs().begin(), a.xs().end());
  grid.insert(b.xs().begin(), b.xs().end());
  std::vector<std::array<double, 2>> pts;
  pts.reserve(grid.size());
  for (double x : grid) pts.push_back({x, a.value(x) + b.value(x)});
  return PiecewiseLinear::from_points(pts);
}

std::vector<double> merged_breakpoints(const PiecewiseLinear& a, const PiecewiseLinear& b,
                                       double x0, double x1) {
  std::set<double> grid;
  grid.insert(x0);
  grid.insert(x1);
  for (double x : a.xs()) {
    if (x > x0 && x < x1) grid.insert(x);
  }
  for (double x : b.xs()) {
    if (x > x0 && x < x1) grid.insert(x);
  }
  return {grid.begin(), grid.end()};
}

}  // namespace flownet
