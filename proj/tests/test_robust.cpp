#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "flownet/errors.hpp"
#include "flownet/robust.hpp"
#include "support/support.hpp"

using namespace flownet;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Single linear pipe a -> b with a steady transfer of 0.2 from a to b, an
// injection band of +-dq at both ends, and a compressor at the b end. The
// density floor applies at the inlet node only.
RobustOcp compression_problem(double dq, double rho_min_at_a) {
  Network net;
  net.horizon = 5.0;
  net.nodes.push_back({"a", {}, false});
  net.nodes.push_back({"b", {}, false});
  NetworkEdge e;
  e.id = "p";
  e.from = "a";
  e.to = "b";
  e.length = 1.0;
  e.model = DissipationModel::linear(1.0);
  net.edges.push_back(e);
  auto band = [&](double nominal) {
    InjectionSpec s;
    s.nominal = TimeProfile::constant(nominal);
    s.lower = TimeProfile::constant(nominal - dq);
    s.upper = TimeProfile::constant(nominal + dq);
    return s;
  };
  net.nodes[0].has_injection = true;
  net.nodes[0].injection = band(0.2);
  net.nodes[1].has_injection = true;
  net.nodes[1].injection = band(-0.2);
  net.actuators.push_back({"p", Side::Head, TimeProfile::constant(1.0)});

  RobustOcp ocp = RobustOcp::build(std::move(net), 2.0, 5.0, 1,
                                   /*rho_min=*/-kInf, /*rho_max=*/4.0,
                                   /*alpha_lo=*/0.5, /*alpha_hi=*/2.5, /*rho0=*/1.0);
  ocp.step = 0.05;
  ocp.rho_min[0] = rho_min_at_a;
  return ocp;
}

// Smallest constant ratio whose low-envelope trajectory clears the floor.
double bisect_constant_ratio(const RobustOcp& ocp) {
  auto feasible = [&](double alpha) {
    auto sched =
        ControlSchedule::uniform(ocp.actuator_count(), ocp.intervals, ocp.horizon, alpha);
    auto ev = evaluate_robust(ocp, sched);
    return ev.feasible();
  };
  double lo = ocp.alpha_lo, hi = ocp.alpha_hi;
  REQUIRE(feasible(hi));
  if (feasible(lo)) return lo;
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

TEST_CASE("schedule lookup is right-continuous and held at the ends") {
  ControlSchedule s;
  s.horizon = 4.0;
  s.intervals = 2;
  s.values = {{1.2, 0.8}};
  CHECK(s.value(0, 0.0) == 1.2);
  CHECK(s.value(0, 1.999) == 1.2);
  CHECK(s.value(0, 2.0) == 0.8);
  CHECK(s.value(0, 3.7) == 0.8);
  CHECK(s.value(0, 4.0) == 0.8);
  CHECK(s.value(0, 99.0) == 0.8);
  CHECK(s.value(0, -1.0) == 1.2);
  auto u = ControlSchedule::uniform(3, 4, 10.0, 1.1);
  CHECK(u.values.size() == 3);
  CHECK(u.values[0].size() == 4);
  CHECK(u.value(2, 9.9) == 1.1);
}

TEST_CASE("objective variants validate their mode combinations") {
  ObjectiveSpec o;
  o.cost = ObjectiveSpec::Cost::ActuationPower;
  o.mode = ObjectiveSpec::Mode::MinMax;
  CHECK_NOTHROW(o.validate());
  o.cost = ObjectiveSpec::Cost::DensityTracking;
  CHECK_THROWS_AS(o.validate(), ValidationError);
  o.cost = ObjectiveSpec::Cost::WeightedSum;
  CHECK_THROWS_AS(o.validate(), ValidationError);
  o.mode = ObjectiveSpec::Mode::Nominal;
  CHECK_NOTHROW(o.validate());
}

TEST_CASE("problem validation rejects inverted bounds and bad settings") {
  auto ocp = compression_problem(0.02, 0.95);
  CHECK_NOTHROW(ocp.validate());
  auto bad = ocp;
  bad.rho_min[1] = 5.0;  // above rho_max = 4
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ocp;
  bad.intervals = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ocp;
  bad.rho0_low[0] = 2.0;  // above the nominal initial state
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ocp;
  bad.optimizer.fd_step = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ocp;
  bad.alpha_lo = 3.0;  // empty ratio box
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("evaluation rejects schedules outside the problem shape or box") {
  auto ocp = compression_problem(0.02, 0.95);
  auto sched = ControlSchedule::uniform(2, 1, ocp.horizon, 1.0);
  CHECK_THROWS_AS(evaluate_robust(ocp, sched), ValidationError);  // two actuators
  sched = ControlSchedule::uniform(1, 3, ocp.horizon, 1.0);
  CHECK_THROWS_AS(evaluate_robust(ocp, sched), ValidationError);  // wrong intervals
  sched = ControlSchedule::uniform(1, 1, ocp.horizon, 3.0);
  CHECK_THROWS_AS(evaluate_robust(ocp, sched), ValidationError);  // above alpha_hi
  sched = ControlSchedule::uniform(1, 1, 2.0, 1.0);
  CHECK_THROWS_AS(evaluate_robust(ocp, sched), ValidationError);  // horizon mismatch
}

TEST_CASE("collapsed envelopes make all three trajectories identical") {
  auto ocp = compression_problem(0.0, -kInf);
  auto sched = ControlSchedule::uniform(1, 1, ocp.horizon, 1.3);
  auto ev = evaluate_robust(ocp, sched);
  REQUIRE(ev.low.samples() == ev.high.samples());
  for (std::size_t s = 0; s < ev.low.samples(); ++s) {
    for (std::size_t j = 0; j < ev.low.node_count; ++j) {
      CHECK(ev.low.state(s)[j] == ev.nominal.state(s)[j]);
      CHECK(ev.high.state(s)[j] == ev.nominal.state(s)[j]);
    }
  }
  CHECK(ev.feasible());
}

TEST_CASE("envelope trajectories bracket the nominal one") {
  auto ocp = compression_problem(0.03, -kInf);
  auto sched = ControlSchedule::uniform(1, 1, ocp.horizon, 1.2);
  auto ev = evaluate_robust(ocp, sched);
  for (std::size_t s = 0; s < ev.low.samples(); ++s) {
    for (std::size_t j = 0; j < ev.low.node_count; ++j) {
      CHECK(ev.low.state(s)[j] <= ev.nominal.state(s)[j] + 1e-9);
      CHECK(ev.nominal.state(s)[j] <= ev.high.state(s)[j] + 1e-9);
    }
  }
}

TEST_CASE("actuation power cost is the exact interval sum") {
  auto ocp = compression_problem(0.0, -kInf);
  ocp.intervals = 4;
  ocp.objective.actuation_weight = 0.7;
  ControlSchedule sched;
  sched.horizon = ocp.horizon;
  sched.intervals = 4;
  sched.values = {{1.0, 1.2, 0.9, 1.5}};
  auto ev = evaluate_robust(ocp, sched);
  double width = ocp.horizon / 4.0;
  double expect = 0.0;
  for (double v : sched.values[0]) expect += width * 0.7 * (v - 1.0) * (v - 1.0);
  CHECK(ev.objective == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("tracking cost on a constant trajectory matches the closed form") {
  // no injections, unit schedule: the state stays at rho0 everywhere
  Network net;
  net.horizon = 3.0;
  net.nodes.push_back({"a", {}, false});
  net.nodes.push_back({"b", {}, false});
  NetworkEdge e;
  e.id = "p";
  e.from = "a";
  e.to = "b";
  e.length = 1.0;
  e.model = DissipationModel::linear(1.0);
  net.edges.push_back(e);
  net.actuators.push_back({"p", Side::Tail, TimeProfile::constant(1.0)});
  auto ocp = RobustOcp::build(std::move(net), 2.0, 3.0, 1, -kInf, kInf, 0.5, 2.0, 1.3);
  ocp.step = 0.1;
  ocp.objective.cost = ObjectiveSpec::Cost::DensityTracking;
  ocp.objective.rho_ref = 1.0;
  ocp.objective.tracking_weight = 2.0;
  auto sched = ControlSchedule::uniform(1, 1, 3.0, 1.0);
  auto ev = evaluate_robust(ocp, sched);
  // 2 nodes * (0.3)^2 * weight * horizon
  CHECK(ev.objective == doctest::Approx(2.0 * 0.09 * 2.0 * 3.0).epsilon(1e-12));

  ocp.objective.cost = ObjectiveSpec::Cost::WeightedSum;
  ocp.objective.actuation_weight = 0.5;
  auto sched2 = ControlSchedule::uniform(1, 1, 3.0, 1.2);
  auto ev2 = evaluate_robust(ocp, sched2);
  CHECK(ev2.objective > 0.5 * 3.0 * 0.04 - 1e-12);  // actuation part present
}

TEST_CASE("minmax substitution evaluates the worst-case envelope") {
  auto ocp = compression_problem(0.03, -kInf);
  ocp.objective.cost = ObjectiveSpec::Cost::ActuationPower;
  ocp.objective.mode = ObjectiveSpec::Mode::MinMax;
  ocp.objective.sign = ObjectiveSpec::Sign::Increasing;
  auto sched = ControlSchedule::uniform(1, 1, ocp.horizon, 1.1);
  // actuation power ignores the state, so the value must agree with nominal
  auto minmax = evaluate_robust(ocp, sched);
  ocp.objective.mode = ObjectiveSpec::Mode::Nominal;
  auto nominal = evaluate_robust(ocp, sched);
  CHECK(minmax.objective == nominal.objective);
}

TEST_CASE("trivially feasible problem returns the identity schedule") {
  auto ocp = compression_problem(0.02, -kInf);  // wide box, nothing active
  auto rep = solve_robust(ocp);
  CHECK(rep.feasible);
  CHECK(rep.objective < 1e-6);
  for (double v : rep.schedule.values[0]) CHECK(std::fabs(v - 1.0) < 1e-3);
  CHECK(rep.margin_lower >= 0.0);
  CHECK(rep.margin_upper >= 0.0);
}

TEST_CASE("compression floor matches the single-parameter bisection oracle") {
  auto ocp = compression_problem(0.02, 0.95);
  double oracle = bisect_constant_ratio(ocp);
  // the floor really bites: identity is infeasible, the oracle is interior
  CHECK(oracle > 1.01);
  CHECK(oracle < 2.4);
  auto rep = solve_robust(ocp);
  CHECK(rep.feasible);
  CHECK(rep.margin_lower >= 0.0);
  CHECK(rep.margin_upper >= 0.0);
  REQUIRE(rep.schedule.values.size() == 1);
  double got = rep.schedule.values[0][0];
  CHECK(std::fabs(got - oracle) / oracle < 0.02);
}

TEST_CASE("interior injection profiles stay inside the solved envelopes") {
  auto ocp = compression_problem(0.02, 0.95);
  auto rep = solve_robust(ocp);
  REQUIRE(rep.feasible);
  auto ev = evaluate_robust(ocp, rep.schedule);
  ScheduleControls controls(rep.schedule);
  Simulator sim(ocp.rnet);
  Rng rng(97);
  for (int k = 0; k < 10; ++k) {
    std::vector<TimeProfile> qs;
    for (const auto& node : ocp.network.nodes) {
      if (!node.has_injection) {
        qs.push_back(TimeProfile::constant(0.0));
        continue;
      }
      qs.push_back(testsup::interior_profile(rng, *node.injection.lower,
                                             *node.injection.upper, 0.0, ocp.horizon));
    }
    auto inj = InjectionSet::from_base_profiles(ocp.rnet, qs);
    auto traj =
        sim.run(ocp.rho0_nominal, ocp.horizon, ocp.effective_step(), &controls, inj);
    REQUIRE(traj.samples() == ev.low.samples());
    for (std::size_t s = 0; s < traj.samples(); ++s) {
      for (std::size_t j = 0; j < traj.node_count; ++j) {
        CHECK(traj.state(s)[j] >= ev.low.state(s)[j] - 1e-9);
        CHECK(traj.state(s)[j] <= ev.high.state(s)[j] + 1e-9);
        CHECK(traj.state(s)[j] >= ocp.rho_min[j] - 1e-9);
        CHECK(traj.state(s)[j] <= ocp.rho_max[j] + 1e-9);
      }
    }
  }
}

TEST_CASE("widening the injection band can only push the objective up") {
  auto narrow = compression_problem(0.01, 0.95);
  auto wide = compression_problem(0.04, 0.95);
  auto rn = solve_robust(narrow);
  auto rw = solve_robust(wide);
  REQUIRE(rn.feasible);
  REQUIRE(rw.feasible);
  CHECK(rw.objective >= rn.objective - 1e-10);
}

TEST_CASE("the solver is deterministic run to run") {
  auto ocp = compression_problem(0.02, 0.95);
  auto a = solve_robust(ocp);
  auto b = solve_robust(ocp);
  REQUIRE(a.schedule.values.size() == b.schedule.values.size());
  for (std::size_t i = 0; i < a.schedule.values.size(); ++i)
    for (std::size_t k = 0; k < a.schedule.values[i].size(); ++k)
      CHECK(a.schedule.values[i][k] == b.schedule.values[i][k]);
  CHECK(a.objective == b.objective);
  CHECK(a.evaluations == b.evaluations);
  CHECK(a.termination == b.termination);
}

TEST_CASE("an impossible floor reports infeasible with the best attempt") {
  // the floor sits above the reachable band no matter the compression
  auto ocp = compression_problem(0.02, 3.5);
  auto rep = solve_robust(ocp);
  CHECK_FALSE(rep.feasible);
  CHECK(rep.termination == "infeasible");
  CHECK(rep.margin_lower < 0.0);
  // the best attempt is still a valid in-box schedule
  for (double v : rep.schedule.values[0]) {
    CHECK(v >= ocp.alpha_lo - 1e-12);
    CHECK(v <= ocp.alpha_hi + 1e-12);
  }
}

TEST_CASE("schedules override feedback actuators during evaluation") {
  Network net;
  net.horizon = 2.0;
  net.nodes.push_back({"a", {}, false});
  net.nodes.push_back({"b", {}, false});
  NetworkEdge e;
  e.id = "p";
  e.from = "a";
  e.to = "b";
  e.length = 1.0;
  e.model = DissipationModel::linear(1.0);
  net.edges.push_back(e);
  net.actuators.push_back({"p", Side::Tail, FeedbackPolicy::power_law(1.0, 0.5)});
  auto ocp = RobustOcp::build(std::move(net), 2.0, 2.0, 2, -kInf, kInf, 0.5, 2.0, 1.0);
  ocp.step = 0.05;
  auto sched = ControlSchedule::uniform(1, 2, 2.0, 1.1);
  auto ev = evaluate_robust(ocp, sched);
  CHECK(ev.feasible());
  CHECK(std::isfinite(ev.objective));
}
