#pragma once

#include <string>
#include <vector>

#include "flownet/monotonicity.hpp"
#include "flownet/simulator.hpp"

namespace flownet {

/// Running cost and how the worst case over the injection band is taken.
/// Min-max mode substitutes one envelope trajectory for the worst case, which
/// is only sound when the cost is monotone in density: quadratic tracking is
/// not, so it is rejected for min-max; actuation power ignores the state and
/// either sign is valid (degenerate).
struct ObjectiveSpec {
  enum class Cost { ActuationPower, DensityTracking, WeightedSum };
  enum class Mode { Nominal, MinMax };
  enum class Sign { Increasing, Decreasing };

  Cost cost = Cost::ActuationPower;
  Mode mode = Mode::Nominal;
  Sign sign = Sign::Increasing;
  double actuation_weight = 1.0;
  double tracking_weight = 1.0;
  double rho_ref = 1.0;

  void validate() const;
  bool operator==(const ObjectiveSpec&) const = default;
};

struct OptimizerSettings {
  int max_iters = 200;
  double tol = 1e-6;      // projected-gradient infinity-norm stop
  double penalty = 1e3;   // initial constraint penalty weight
  double fd_step = 1e-6;  // forward-difference step on the controls

  bool operator==(const OptimizerSettings&) const = default;
};

/// Piecewise-constant per-actuator compression ratios on uniform intervals;
/// right-continuous, held on the last interval at t = horizon.
struct ControlSchedule {
  double horizon = 0.0;
  int intervals = 0;
  std::vector<std::vector<double>> values;  // [actuator][interval]

  static ControlSchedule uniform(std::size_t actuators, int intervals, double horizon,
                                 double value);
  double value(std::size_t actuator, double t) const;

  bool operator==(const ControlSchedule&) const = default;
};

class ScheduleControls : public ControlSource {
 public:
  explicit ScheduleControls(ControlSchedule schedule)
      : schedule_(std::move(schedule)) {}
  void eval(double t, double* values, double* rates) const override;

 private:
  ControlSchedule schedule_;
};

/// Robust control problem on the two-envelope reformulation: one schedule
/// drives three simulations (lower envelope, nominal, upper envelope
/// injections); the density box is enforced on the envelope trajectories,
/// which brackets every interior injection profile.
struct RobustOcp {
  Network network;
  RefinedNetwork rnet;
  double horizon = 0.0;
  int intervals = 1;
  double step = 0.0;  // integrator step; 0 → horizon / (20 * intervals)
  double alpha_lo = 0.5, alpha_hi = 2.0;
  std::vector<double> rho_min, rho_max;  // per refined node; +-inf = unconstrained
  std::vector<double> rho0_low, rho0_nominal, rho0_high;
  ObjectiveSpec objective;
  OptimizerSettings optimizer;

  std::size_t actuator_count() const { return network.actuators.size(); }
  double effective_step() const;
  void validate() const;

  /// Uniform box bounds and a common initial state for all three scenarios.
  static RobustOcp build(Network net, double epsilon, double horizon, int intervals,
                         double rho_min, double rho_max, double alpha_lo,
                         double alpha_hi, double rho0);
};

struct RobustEvaluation {
  double objective = 0.0;
  double margin_lower = 0.0;  // min over time/nodes of rho_low - rho_min
  double margin_upper = 0.0;  // min over time/nodes of rho_max - rho_high
  Trajectory low, nominal, high;

  bool feasible() const { return margin_lower >= 0.0 && margin_upper >= 0.0; }
};

RobustEvaluation evaluate_robust(const RobustOcp& ocp, const ControlSchedule& schedule);

struct SolveReport {
  ControlSchedule schedule;
  bool feasible = false;
  double objective = 0.0;
  double margin_lower = 0.0;
  double margin_upper = 0.0;
  int iterations = 0;
  long evaluations = 0;
  std::string termination;
};

/// Projected-gradient descent on objective + quadratic penalty over box
/// violations of the envelope trajectories, with penalty growth and a final
/// violation-only descent phase; returns the best feasible schedule found,
/// or the best attempt with feasible = false. Deterministic.
SolveReport solve_robust(const RobustOcp& ocp);

}  // namespace flownet
