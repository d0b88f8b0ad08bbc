#include "flownet/feedback.hpp"

#include <algorithm>
#include <cmath>

#include "flownet/errors.hpp"

namespace flownet {

FeedbackPolicy FeedbackPolicy::constant(double value) {
  if (!std::isfinite(value) || value <= 0.0)
    throw ValidationError("feedback ratio must be positive and finite");
  FeedbackPolicy p;
  p.kind_ = Kind::Constant;
  p.coeff_ = value;
  return p;
}

FeedbackPolicy FeedbackPolicy::power_law(double coeff, double exponent) {
  if (!std::isfinite(coeff) || coeff <= 0.0)
    throw ValidationError("power-law feedback coefficient must be positive and finite");
  if (!std::isfinite(exponent))
    throw ValidationError("power-law feedback exponent must be finite");
  FeedbackPolicy p;
  p.kind_ = Kind::PowerLaw;
  p.coeff_ = coeff;
  p.exponent_ = exponent;
  return p;
}

FeedbackPolicy FeedbackPolicy::tabulated(PiecewiseLinear table) {
  if (table.xs().front() <= 0.0)
    throw ValidationError("feedback table densities must be positive");
  for (double y : table.ys())
    if (y <= 0.0) throw ValidationError("feedback table ratios must be positive");
  FeedbackPolicy p;
  p.kind_ = Kind::Tabulated;
  p.table_ = std::move(table);
  return p;
}

FeedbackPolicy::Eval FeedbackPolicy::eval(double rho) const {
  switch (kind_) {
    case Kind::Constant:
      return {coeff_, 0.0};
    case Kind::PowerLaw:
      return {coeff_ * std::pow(rho, exponent_),
              coeff_ * exponent_ * std::pow(rho, exponent_ - 1.0)};
    case Kind::Tabulated: {
      const auto s = table_.at(rho);
      return {s.value, s.rate};
    }
  }
  return {1.0, 0.0};
}

namespace {

double margin_at(const FeedbackPolicy& policy, double rho) {
  const auto e = policy.eval(rho);
  return e.k + e.dk * rho;
}

void consider(FeedbackCheck& r, double rho, double margin) {
  if (margin < r.min_margin) {
    r.min_margin = margin;
    r.argmin = rho;
  }
}

}  // namespace

FeedbackCheck check_feedback_policy(const FeedbackPolicy& policy, double rho_lo,
                                    double rho_hi, int grid_points) {
  if (!std::isfinite(rho_lo) || !std::isfinite(rho_hi) || rho_lo <= 0.0 ||
      rho_hi < rho_lo)
    throw ValidationError("feedback check needs 0 < rho_lo <= rho_hi");
  if (grid_points < 2) throw ValidationError("feedback check needs >= 2 grid points");

  FeedbackCheck result;
  result.min_margin = margin_at(policy, rho_lo);
  result.argmin = rho_lo;

  if (policy.kind() == FeedbackPolicy::Kind::Tabulated) {
    // k is piecewise affine, so the margin k + k' * rho is affine per segment
    // and flat outside the table; endpoint probes with each one-sided slope
    // give the exact minimum.
    const auto& xs = policy.table().xs();
    const auto& ys = policy.table().ys();
    consider(result, rho_lo, policy.eval(rho_lo).k);  // flat hold below table
    consider(result, rho_hi, policy.eval(rho_hi).k);  // flat hold above table
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double a = std::max(xs[i], rho_lo);
      const double b = std::min(xs[i + 1], rho_hi);
      if (a > b) continue;
      const double slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
      const double ka = ys[i] + slope * (a - xs[i]);
      const double kb = ys[i] + slope * (b - xs[i]);
      consider(result, a, ka + slope * a);
      consider(result, b, kb + slope * b);
    }
  } else {
    const double span = rho_hi - rho_lo;
    for (int i = 0; i < grid_points; ++i) {
      const double rho = rho_lo + span * static_cast<double>(i) /
                                      static_cast<double>(grid_points - 1);
      consider(result, rho, margin_at(policy, rho));
    }
  }

  result.ok = std::isfinite(result.min_margin) && result.min_margin > 0.0;
  return result;
}

}  // namespace flownet
