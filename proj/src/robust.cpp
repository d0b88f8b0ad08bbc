#include "flownet/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flownet/errors.hpp"

namespace flownet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// The optimizer aims slightly inside the density box so round-off and the
// envelope bracketing tolerance cannot flip a reported-feasible schedule.
constexpr double kMarginBuffer = 1e-7;
}  // namespace

void ObjectiveSpec::validate() const {
  if (!std::isfinite(actuation_weight) || actuation_weight < 0.0 ||
      !std::isfinite(tracking_weight) || tracking_weight < 0.0)
    throw ValidationError("objective weights must be non-negative and finite");
  if (!std::isfinite(rho_ref))
    throw ValidationError("objective rho_ref must be finite");
  if (mode == Mode::MinMax && cost != Cost::ActuationPower)
    throw ValidationError(
        "min-max objectives need a running cost monotone in density; "
        "quadratic tracking is not, use the nominal mode for it");
}

ControlSchedule ControlSchedule::uniform(std::size_t actuators, int intervals,
                                         double horizon, double value) {
  ControlSchedule s;
  s.horizon = horizon;
  s.intervals = intervals;
  s.values.assign(actuators, std::vector<double>(intervals, value));
  return s;
}

double ControlSchedule::value(std::size_t actuator, double t) const {
  const double width = horizon / intervals;
  int k = static_cast<int>(std::floor(t / width));
  k = std::clamp(k, 0, intervals - 1);
  return values[actuator][k];
}

void ScheduleControls::eval(double t, double* values, double* rates) const {
  for (std::size_t a = 0; a < schedule_.values.size(); ++a) {
    values[a] = schedule_.value(a, t);
    rates[a] = 0.0;
  }
}

double RobustOcp::effective_step() const {
  return step > 0.0 ? step : horizon / (20.0 * intervals);
}

void RobustOcp::validate() const {
  network.validate();
  if (!std::isfinite(horizon) || horizon <= 0.0)
    throw ValidationError("horizon must be positive");
  if (intervals < 1) throw ValidationError("intervals must be at least 1");
  if (!std::isfinite(step) || step < 0.0)
    throw ValidationError("step must be non-negative");
  if (!std::isfinite(alpha_lo) || alpha_lo <= 0.0 || alpha_hi < alpha_lo)
    throw ValidationError("need 0 < alpha_lo <= alpha_hi");

  const std::size_t n = rnet.node_count();
  if (rho_min.size() != n || rho_max.size() != n)
    throw ValidationError("density bounds must cover every refined node");
  if (rho0_low.size() != n || rho0_nominal.size() != n || rho0_high.size() != n)
    throw ValidationError("initial states must cover every refined node");
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(rho_min[j]) && std::isfinite(rho_max[j]) &&
        rho_min[j] >= rho_max[j])
      throw ValidationError("rho_min must be below rho_max (node \"" +
                            rnet.node_ids[j] + "\")");
    if (!(rho0_low[j] > 0.0) || !(rho0_nominal[j] > 0.0) || !(rho0_high[j] > 0.0))
      throw ValidationError("initial densities must be positive");
    if (rho0_low[j] > rho0_nominal[j] || rho0_nominal[j] > rho0_high[j])
      throw ValidationError(
          "initial states must be ordered: low <= nominal <= high");
  }

  objective.validate();
  if (optimizer.max_iters < 1 || !(optimizer.tol > 0.0) ||
      !(optimizer.penalty > 0.0) || !(optimizer.fd_step > 0.0))
    throw ValidationError("optimizer settings must be positive");
}

RobustOcp RobustOcp::build(Network net, double epsilon, double horizon, int intervals,
                           double rho_min, double rho_max, double alpha_lo,
                           double alpha_hi, double rho0) {
  RobustOcp ocp;
  ocp.network = std::move(net);
  ocp.rnet = refine_network(ocp.network, epsilon);
  ocp.horizon = horizon;
  ocp.intervals = intervals;
  ocp.alpha_lo = alpha_lo;
  ocp.alpha_hi = alpha_hi;
  const std::size_t n = ocp.rnet.node_count();
  ocp.rho_min.assign(n, rho_min);
  ocp.rho_max.assign(n, rho_max);
  ocp.rho0_low.assign(n, rho0);
  ocp.rho0_nominal.assign(n, rho0);
  ocp.rho0_high.assign(n, rho0);
  return ocp;
}

namespace {

double tracking_cost(const Trajectory& tr, double weight, double ref) {
  double acc = 0.0;
  const std::size_t last = tr.samples() - 1;
  for (std::size_t s = 0; s <= last; ++s) {
    const double* rho = tr.state(s);
    double v = 0.0;
    for (std::size_t j = 0; j < tr.node_count; ++j) {
      const double d = rho[j] - ref;
      v += d * d;
    }
    acc += v * (s == 0 || s == last ? tr.step * 0.5 : tr.step);
  }
  return weight * acc;
}

double actuation_cost(const ControlSchedule& sched, double weight, double horizon) {
  const double width = horizon / sched.intervals;
  double acc = 0.0;
  for (const auto& row : sched.values)
    for (double v : row) acc += (v - 1.0) * (v - 1.0) * width;
  return weight * acc;
}

void box_margins(const Trajectory& low, const Trajectory& high,
                 const std::vector<double>& rho_min,
                 const std::vector<double>& rho_max, double& margin_lower,
                 double& margin_upper) {
  margin_lower = kInf;
  margin_upper = kInf;
  for (std::size_t s = 0; s < low.samples(); ++s) {
    const double* lo = low.state(s);
    const double* hi = high.state(s);
    for (std::size_t j = 0; j < low.node_count; ++j) {
      if (std::isfinite(rho_min[j]))
        margin_lower = std::min(margin_lower, lo[j] - rho_min[j]);
      if (std::isfinite(rho_max[j]))
        margin_upper = std::min(margin_upper, rho_max[j] - hi[j]);
    }
  }
}

/// Trapezoid-weighted sum of squared box violations of the envelope
/// trajectories, measured against bounds pulled in by kMarginBuffer.
double violation(const Trajectory& low, const Trajectory& high,
                 const std::vector<double>& rho_min,
                 const std::vector<double>& rho_max) {
  double acc = 0.0;
  const std::size_t last = low.samples() - 1;
  for (std::size_t s = 0; s <= last; ++s) {
    const double* lo = low.state(s);
    const double* hi = high.state(s);
    double v = 0.0;
    for (std::size_t j = 0; j < low.node_count; ++j) {
      if (std::isfinite(rho_min[j])) {
        const double gap = rho_min[j] + kMarginBuffer - lo[j];
        if (gap > 0.0) v += gap * gap;
      }
      if (std::isfinite(rho_max[j])) {
        const double gap = hi[j] - (rho_max[j] - kMarginBuffer);
        if (gap > 0.0) v += gap * gap;
      }
    }
    acc += v * (s == 0 || s == last ? low.step * 0.5 : low.step);
  }
  return acc;
}

struct PointEval {
  double J = kInf;
  double V = kInf;  // buffered violation
  double margin_lower = -kInf, margin_upper = -kInf;
  bool ok = false;

  bool feasible() const { return ok && margin_lower >= 0.0 && margin_upper >= 0.0; }
};

class PenaltyProblem {
 public:
  explicit PenaltyProblem(const RobustOcp& ocp)
      : ocp_(ocp),
        sim_(ocp.rnet),
        inj_low_(InjectionSet::lower(ocp.rnet)),
        inj_nominal_(InjectionSet::nominal(ocp.rnet)),
        inj_high_(InjectionSet::upper(ocp.rnet)),
        step_(ocp.effective_step()) {}

  ControlSchedule schedule(const std::vector<double>& x) const {
    ControlSchedule s = ControlSchedule::uniform(ocp_.actuator_count(),
                                                 ocp_.intervals, ocp_.horizon, 1.0);
    for (std::size_t a = 0; a < s.values.size(); ++a)
      for (int k = 0; k < ocp_.intervals; ++k)
        s.values[a][k] = x[a * ocp_.intervals + k];
    return s;
  }

  PointEval eval(const std::vector<double>& x) {
    ++evaluations;
    PointEval e;
    const ControlSchedule sched = schedule(x);
    const ScheduleControls controls(sched);
    try {
      const Trajectory low =
          sim_.run(ocp_.rho0_low, ocp_.horizon, step_, &controls, inj_low_);
      const Trajectory high =
          sim_.run(ocp_.rho0_high, ocp_.horizon, step_, &controls, inj_high_);
      box_margins(low, high, ocp_.rho_min, ocp_.rho_max, e.margin_lower,
                  e.margin_upper);
      e.V = violation(low, high, ocp_.rho_min, ocp_.rho_max);

      const auto& ob = ocp_.objective;
      double J = 0.0;
      if (ob.cost != ObjectiveSpec::Cost::DensityTracking)
        J += actuation_cost(sched, ob.actuation_weight, ocp_.horizon);
      if (ob.cost != ObjectiveSpec::Cost::ActuationPower) {
        if (ob.mode == ObjectiveSpec::Mode::Nominal) {
          const Trajectory nominal =
              sim_.run(ocp_.rho0_nominal, ocp_.horizon, step_, &controls, inj_nominal_);
          J += tracking_cost(nominal, ob.tracking_weight, ob.rho_ref);
        } else {
          const Trajectory& worst =
              ob.sign == ObjectiveSpec::Sign::Increasing ? high : low;
          J += tracking_cost(worst, ob.tracking_weight, ob.rho_ref);
        }
      }
      e.J = J;
      e.ok = true;
    } catch (const SimulationError&) {
      // A probe drove the state out of the admissible region; report the
      // point as unusable so the line search backs off.
      e = PointEval{};
    }
    return e;
  }

  long evaluations = 0;

 private:
  const RobustOcp& ocp_;
  Simulator sim_;
  InjectionSet inj_low_, inj_nominal_, inj_high_;
  double step_;
};

}  // namespace

RobustEvaluation evaluate_robust(const RobustOcp& ocp, const ControlSchedule& sched) {
  if (sched.values.size() != ocp.actuator_count())
    throw ValidationError("schedule must cover every actuator");
  if (std::abs(sched.horizon - ocp.horizon) > 1e-12 * std::max(1.0, ocp.horizon))
    throw ValidationError("schedule horizon must match the problem horizon");
  for (const auto& row : sched.values) {
    if (static_cast<int>(row.size()) != ocp.intervals)
      throw ValidationError("schedule rows must have one value per interval");
    for (double v : row)
      if (v < ocp.alpha_lo - 1e-9 || v > ocp.alpha_hi + 1e-9)
        throw ValidationError("schedule value outside the ratio bounds");
  }

  const ScheduleControls controls(sched);
  Simulator sim(ocp.rnet);
  const double h = ocp.effective_step();

  RobustEvaluation ev;
  ev.low = sim.run(ocp.rho0_low, ocp.horizon, h, &controls, InjectionSet::lower(ocp.rnet));
  ev.nominal =
      sim.run(ocp.rho0_nominal, ocp.horizon, h, &controls, InjectionSet::nominal(ocp.rnet));
  ev.high =
      sim.run(ocp.rho0_high, ocp.horizon, h, &controls, InjectionSet::upper(ocp.rnet));
  box_margins(ev.low, ev.high, ocp.rho_min, ocp.rho_max, ev.margin_lower,
              ev.margin_upper);

  const auto& ob = ocp.objective;
  double J = 0.0;
  if (ob.cost != ObjectiveSpec::Cost::DensityTracking)
    J += actuation_cost(sched, ob.actuation_weight, ocp.horizon);
  if (ob.cost != ObjectiveSpec::Cost::ActuationPower) {
    const Trajectory& on = ob.mode == ObjectiveSpec::Mode::Nominal ? ev.nominal
                           : ob.sign == ObjectiveSpec::Sign::Increasing ? ev.high
                                                                        : ev.low;
    J += tracking_cost(on, ob.tracking_weight, ob.rho_ref);
  }
  ev.objective = J;
  return ev;
}

SolveReport solve_robust(const RobustOcp& ocp) {
  ocp.validate();
  const std::size_t nx = ocp.actuator_count() * static_cast<std::size_t>(ocp.intervals);
  PenaltyProblem problem(ocp);

  std::vector<double> x(nx, std::clamp(1.0, ocp.alpha_lo, ocp.alpha_hi));
  const auto clamp_to_box = [&](double v) {
    return std::clamp(v, ocp.alpha_lo, ocp.alpha_hi);
  };

  SolveReport rep;

  bool have_best = false;
  double best_J = kInf;
  std::vector<double> best_x;
  const auto consider = [&](const std::vector<double>& z, const PointEval& e) {
    if (e.feasible() && e.J < best_J) {
      best_J = e.J;
      best_x = z;
      have_best = true;
    }
  };

  PointEval cur = problem.eval(x);
  if (!cur.ok)
    throw SimulationError("the initial unit schedule is not simulatable", 0.0, "");
  consider(x, cur);

  std::string termination = "max-iterations";
  int iters = 0;

  if (nx > 0) {
    double mu = ocp.optimizer.penalty;
    const double fd = ocp.optimizer.fd_step;
    std::vector<double> g(nx), xt(nx);

    // Descend target(x) with projected forward-difference gradient steps;
    // returns why it stopped. The target captures mu.
    const auto descend = [&](auto target, int iter_budget, const char* tag) {
      double s = 0.25;
      while (iter_budget-- > 0 && iters < ocp.optimizer.max_iters) {
        ++iters;
        cur = problem.eval(x);
        consider(x, cur);
        if (!cur.ok) {
          termination = std::string(tag) + "-abort";
          return;
        }
        const double p0 = target(cur);

        for (std::size_t i = 0; i < nx; ++i) {
          double di = fd;
          if (x[i] + di > ocp.alpha_hi) di = -fd;
          xt = x;
          xt[i] += di;
          const PointEval ei = problem.eval(xt);
          consider(xt, ei);
          g[i] = ei.ok ? (target(ei) - p0) / di : 0.0;
        }
        // projected gradient: components pushing against an active bound move nothing
        double gn = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
          if (x[i] <= ocp.alpha_lo && g[i] > 0.0) g[i] = 0.0;
          if (x[i] >= ocp.alpha_hi && g[i] < 0.0) g[i] = 0.0;
          gn = std::max(gn, std::fabs(g[i]));
        }
        if (gn < ocp.optimizer.tol) {
          termination = std::string(tag) + "-gradient";
          return;
        }

        bool moved = false;
        while (s >= 1e-12) {
          bool same = true;
          for (std::size_t i = 0; i < nx; ++i) {
            xt[i] = clamp_to_box(x[i] - s * g[i]);
            same = same && xt[i] == x[i];
          }
          if (same) break;
          const PointEval et = problem.eval(xt);
          consider(xt, et);
          if (et.ok && target(et) < p0 - 1e-14 * std::fabs(p0)) {
            x = xt;
            cur = et;
            s = std::min(s * 2.0, 4.0);
            moved = true;
            break;
          }
          s *= 0.5;
        }
        if (!moved) {
          termination = std::string(tag) + "-step-collapse";
          return;
        }
      }
      termination = "max-iterations";
    };

    for (int outer = 0; outer < 8; ++outer) {
      descend([&](const PointEval& e) { return e.J + mu * e.V; },
              ocp.optimizer.max_iters, "penalty");
      cur = problem.eval(x);
      consider(x, cur);
      if (cur.ok && cur.V == 0.0) break;
      if (iters >= ocp.optimizer.max_iters) break;
      mu *= 10.0;
    }

    // Violation-only push when the penalty phase ended outside the box.
    if (!have_best && cur.ok && cur.V > 0.0) {
      descend([](const PointEval& e) { return e.V; }, 60, "push");
      cur = problem.eval(x);
      consider(x, cur);
    }
  }

  if (have_best) {
    x = best_x;
    cur = problem.eval(x);
    rep.feasible = true;
  } else {
    rep.feasible = false;
    termination = "infeasible";
  }

  rep.schedule = problem.schedule(x);
  rep.objective = cur.J;
  rep.margin_lower = cur.margin_lower;
  rep.margin_upper = cur.margin_upper;
  rep.iterations = iters;
  rep.evaluations = problem.evaluations;
  rep.termination = termination;
  return rep;
}

}  // namespace flownet
