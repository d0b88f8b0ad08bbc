#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flownet/simulator.hpp"

namespace flownet {

/// Jacobians of the nodal dynamics at one (t, rho, controls) point, with the
/// sign conditions for monotonicity: off-diagonal state entries and all
/// injection entries must be non-negative. Entries for non-adjacent node
/// pairs are structurally zero.
struct JacobianReport {
  double time = 0.0;
  Eigen::MatrixXd state_jacobian;
  Eigen::VectorXd injection_diagonal;  // the injection Jacobian is diagonal

  bool metzler_ok = false;
  double min_offdiagonal = 0.0;  // over graph-adjacent entries
  int worst_row = -1, worst_col = -1;

  bool nonneg_ok = false;
  double min_injection_entry = 0.0;
  int worst_injection_row = -1;

  double max_abs_nonadjacent = 0.0;  // should be exactly zero
};

JacobianReport jacobians(Simulator& sim, const std::vector<double>& rho, double t,
                         const ControlSource* controls, double tol = 1e-12);
JacobianReport jacobians(const RefinedNetwork& rnet, const std::vector<double>& rho,
                         double t, const ControlSource* controls, double tol = 1e-12);

/// Random sampling box for the grid check: densities and per-actuator ratios
/// uniform in their ranges, times uniform in [t_lo, t_hi].
struct MonotoneSampling {
  int samples = 50;
  double rho_lo = 0.5, rho_hi = 2.0;
  double alpha_lo = 0.5, alpha_hi = 2.0;
  double t_lo = 0.0, t_hi = 0.0;  // t_hi <= t_lo → use the network horizon
  std::uint64_t seed = 2026;
};

struct MonotoneSummary {
  int samples = 0;
  bool metzler_ok = true;
  bool nonneg_ok = true;
  double min_offdiagonal = 0.0;
  double min_injection_entry = 0.0;
  double max_abs_nonadjacent = 0.0;
  // location of the worst off-diagonal entry seen
  int worst_sample = -1;
  double worst_time = 0.0;
  std::string worst_row_id, worst_col_id;

  bool ok() const { return metzler_ok && nonneg_ok; }
};

MonotoneSummary check_monotone_conditions(const RefinedNetwork& rnet,
                                          const MonotoneSampling& sampling,
                                          double tol = 1e-12);

struct OrderViolation {
  double time = 0.0;
  std::string node;
  double rho_low = 0.0, rho_high = 0.0;
};

struct OrderTestResult {
  bool holds = false;
  double margin = 0.0;  // min over samples and nodes of rho_high - rho_low
  std::optional<OrderViolation> first_violation;
};

/// Simulates the low and high scenarios under identical controls and
/// integrator settings and checks componentwise ordering at every sample.
OrderTestResult verify_order_propagation(const RefinedNetwork& rnet,
                                         const std::vector<double>& rho0_low,
                                         const std::vector<double>& rho0_high,
                                         const InjectionSet& q_low,
                                         const InjectionSet& q_high,
                                         const ControlSource* controls, double t_end,
                                         double step, double tol = 1e-9);

}  // namespace flownet
