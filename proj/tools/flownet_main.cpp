// Command-line front end: refine / simulate / verify / optimize.
//
// Exit codes: 0 ok, 2 unreadable or malformed input, 3 constraint violation,
// 4 simulation abort, 5 verification check failed (report still written),
// 6 no feasible schedule found (best attempt still written).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "flownet/errors.hpp"
#include "flownet/io.hpp"
#include "flownet/monotonicity.hpp"
#include "flownet/network.hpp"
#include "flownet/refine.hpp"
#include "flownet/rng.hpp"
#include "flownet/robust.hpp"
#include "flownet/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace flownet;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitValidation = 3;
constexpr int kExitSimAbort = 4;
constexpr int kExitVerifyFailed = 5;
constexpr int kExitInfeasible = 6;

struct Options {
  std::uint64_t seed = 2026;
  std::string out = "out";
  bool quiet = false;
};

void info(const Options& o, const std::string& line) {
  if (!o.quiet) std::cout << line << "\n";
}

void ensure_out(const Options& o) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw InputError("cannot create output directory '" + o.out + "': " + ec.message());
}

std::string out_path(const Options& o, const std::string& name) {
  return (fs::path(o.out) / name).string();
}

// Margins can be infinite when a box side is absent; JSON has no inf.
ordered_json finite_or_label(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "+inf" : "-inf";
}

int cmd_refine(const Options& o, const std::string& net_path, double epsilon) {
  Network net = io::load_network(net_path);
  RefinedNetwork rnet = refine_network(net, epsilon);
  ensure_out(o);
  io::write_json(io::refined_to_json(rnet), out_path(o, "refined.json"));

  ordered_json inputs{{"network", net_path}};
  ordered_json settings{{"epsilon", epsilon}};
  io::write_json(io::run_manifest("refine", inputs, settings, o.seed),
                 out_path(o, "manifest.json"));
  info(o, "refined " + std::to_string(net.nodes.size()) + " -> " +
              std::to_string(rnet.node_count()) + " nodes, " +
              std::to_string(net.edges.size()) + " -> " +
              std::to_string(rnet.edge_count()) + " edges; wrote " +
              out_path(o, "refined.json"));
  return 0;
}

int cmd_simulate(const Options& o, const std::string& net_path, double epsilon,
                 double t_end_opt, double step, double rho0) {
  Network net = io::load_network(net_path);
  RefinedNetwork rnet = refine_network(net, epsilon);
  double t_end = t_end_opt > 0.0 ? t_end_opt : net.horizon;

  std::vector<std::string> no_injection;
  for (const auto& node : net.nodes)
    if (!node.has_injection) no_injection.push_back(node.id);

  ensure_out(o);
  ordered_json inputs{{"network", net_path}};
  ordered_json settings{{"epsilon", epsilon}, {"t_end", t_end}, {"step", step},
                        {"rho0", rho0}};
  io::write_json(io::run_manifest("simulate", inputs, settings, o.seed),
                 out_path(o, "manifest.json"));

  Simulator sim(rnet);
  InjectionSet inj = InjectionSet::nominal(rnet);
  std::vector<double> r0(rnet.node_count(), rho0);

  ordered_json report;
  report["command"] = "simulate";
  report["network"] = net_path;
  report["epsilon"] = epsilon;
  report["kernels"] = sim.kernel_name();
  report["nodes_without_injection"] = no_injection;

  try {
    Trajectory traj = sim.run(r0, t_end, step, nullptr, inj);
    io::write_trajectory_csv(traj, rnet.node_ids, out_path(o, "trajectory.csv"));
    report["status"] = "ok";
    report["t_end"] = t_end;
    report["step"] = traj.step;
    report["samples"] = traj.samples();
    report["max_neighbor_rel_diff"] = traj.max_rel_diff();
    report["notes"] = ordered_json::array(
        {"neighbor relative density difference is a resolution diagnostic, reported "
         "but not enforced",
         "nodes without an injection profile inject nothing (q = 0)"});
    io::write_json(report, out_path(o, "report.json"));
    info(o, "simulated " + std::to_string(traj.samples() - 1) + " steps of " +
                io::format_double(traj.step) + " s; wrote " +
                out_path(o, "trajectory.csv"));
    return 0;
  } catch (const SimulationError& e) {
    report["status"] = "aborted";
    report["error"] = e.what();
    report["time"] = e.time();
    report["node"] = e.node();
    io::write_json(report, out_path(o, "report.json"));
    std::cerr << "error: " << e.what() << "\n";
    return kExitSimAbort;
  }
}

// One conservative integrator step from a Gershgorin bound on the state
// Jacobian at the top of the sampling box (the stiffest corner for both
// models near uniform density).
double pick_trial_step(Simulator& sim, double rho_hi, double alpha_hi, double t_end) {
  std::size_t n = sim.size();
  std::vector<double> rho(n, rho_hi);
  ConstantControls cc(std::vector<double>(sim.actuator_count(), alpha_hi));
  std::vector<double> jac;
  sim.state_jacobian(0.0, rho.data(), &cc, jac);
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::fabs(jac[i * n + j]);
    bound = std::max(bound, s);
  }
  double step = t_end / 50.0;
  if (bound > 0.0) step = std::min(step, 1.0 / bound);
  return std::max(step, t_end / 200000.0);
}

// Injection amplitude that cannot drain the shallowest node over the trial
// horizon, so random envelope draws stay clear of the positivity abort.
double trial_injection_scale(const RefinedNetwork& rnet, double rho_lo,
                             double alpha_lo, double t_end) {
  std::vector<double> feed(rnet.node_count(), 0.0);
  for (const auto& e : rnet.edges) {
    feed[e.from] += 0.5 * e.length;
    feed[e.to] += 0.5 * e.length;
  }
  double mn = std::numeric_limits<double>::infinity();
  for (double f : feed) mn = std::min(mn, f);
  double a = 0.2 * mn * std::min(1.0, alpha_lo) * rho_lo / t_end;
  return std::min(a, 0.5);
}

int cmd_verify(const Options& o, const std::string& net_path, double epsilon,
               int samples, int trials, double rho_lo, double rho_hi, double alpha_lo,
               double alpha_hi) {
  // Permissive load: broken model parameters are a finding, not an input error.
  Network net = io::load_network(net_path, /*check_models=*/false);
  RefinedNetwork rnet = refine_network(net, epsilon);
  ensure_out(o);

  bool all_ok = true;

  // Model parameter checks, per edge.
  ordered_json model_edges = ordered_json::array();
  bool models_ok = true;
  for (const auto& e : net.edges) {
    ordered_json entry{{"id", e.id}};
    try {
      e.model.validate();
      entry["ok"] = true;
    } catch (const ValidationError& ex) {
      entry["ok"] = false;
      entry["error"] = ex.what();
      models_ok = false;
    }
    model_edges.push_back(entry);
  }
  all_ok = all_ok && models_ok;

  // Jacobian sign sampling over the declared boxes.
  MonotoneSampling ms;
  ms.samples = samples;
  ms.rho_lo = rho_lo;
  ms.rho_hi = rho_hi;
  ms.alpha_lo = alpha_lo;
  ms.alpha_hi = alpha_hi;
  ms.seed = o.seed;
  ordered_json jac;
  jac["samples"] = samples;
  jac["boxes"] = ordered_json{{"rho", {rho_lo, rho_hi}},
                              {"alpha", {alpha_lo, alpha_hi}},
                              {"time", {0.0, net.horizon}}};
  try {
    MonotoneSummary summary = check_monotone_conditions(rnet, ms);
    jac["ok"] = summary.ok();
    jac["metzler_ok"] = summary.metzler_ok;
    jac["nonneg_ok"] = summary.nonneg_ok;
    jac["min_offdiagonal"] = summary.min_offdiagonal;
    jac["min_injection_entry"] = summary.min_injection_entry;
    jac["max_abs_nonadjacent"] = summary.max_abs_nonadjacent;
    if (summary.worst_sample >= 0) {
      jac["worst"] = ordered_json{{"sample", summary.worst_sample},
                                  {"time", summary.worst_time},
                                  {"row", summary.worst_row_id},
                                  {"col", summary.worst_col_id}};
    }
    all_ok = all_ok && summary.ok();
  } catch (const std::exception& ex) {
    jac["ok"] = false;
    jac["error"] = ex.what();
    all_ok = false;
  }

  // Feedback policy slope margins over the density box.
  ordered_json fb_checked = ordered_json::array();
  bool fb_ok = true;
  for (const auto& a : net.actuators) {
    if (!a.is_feedback()) continue;
    ordered_json entry{{"edge", a.edge}, {"side", side_label(a.side)}};
    try {
      FeedbackCheck fc = check_feedback_policy(a.policy(), rho_lo, rho_hi);
      entry["ok"] = fc.ok;
      entry["min_margin"] = fc.min_margin;
      entry["argmin"] = fc.argmin;
      fb_ok = fb_ok && fc.ok;
    } catch (const std::exception& ex) {
      entry["ok"] = false;
      entry["error"] = ex.what();
      fb_ok = false;
    }
    fb_checked.push_back(entry);
  }
  all_ok = all_ok && fb_ok;

  // Order-propagation Monte-Carlo: ordered injection envelopes and initial
  // states, shared random constant controls, componentwise comparison.
  ordered_json order;
  double t_tr = std::min(net.horizon, 5.0);
  int failed_trials = 0, aborted_trials = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  ordered_json first_violation;
  double step_tr = 0.0;
  std::string order_error;
  try {
    Simulator sim(rnet);
    step_tr = pick_trial_step(sim, rho_hi, alpha_hi, t_tr);
    double amp = trial_injection_scale(rnet, rho_lo, alpha_lo, t_tr);
    Rng rng(o.seed + 1);
    std::size_t n = rnet.node_count();
    std::vector<double> ts{0.0, 0.25 * t_tr, 0.5 * t_tr, 0.75 * t_tr, t_tr};
    for (int tr = 0; tr < trials; ++tr) {
      std::vector<TimeProfile> q_lo_base, q_hi_base;
      for (std::size_t b = 0; b < net.nodes.size(); ++b) {
        std::vector<std::array<double, 2>> lo_pts, hi_pts;
        for (double t : ts) lo_pts.push_back({t, uniform(rng, -amp, amp)});
        for (std::size_t k = 0; k < ts.size(); ++k)
          hi_pts.push_back({ts[k], lo_pts[k][1] + uniform(rng, 0.0, amp)});
        q_lo_base.push_back(TimeProfile::from_points(lo_pts));
        q_hi_base.push_back(TimeProfile::from_points(hi_pts));
      }
      std::vector<double> r_lo(n), r_hi(n);
      for (std::size_t j = 0; j < n; ++j) {
        double a = uniform(rng, rho_lo, rho_hi);
        double b = uniform(rng, rho_lo, rho_hi);
        r_lo[j] = std::min(a, b);
        r_hi[j] = std::max(a, b);
      }
      std::vector<double> alphas(net.actuators.size());
      for (double& a : alphas) a = uniform(rng, alpha_lo, alpha_hi);
      ConstantControls cc(alphas);
      InjectionSet q_lo = InjectionSet::from_base_profiles(rnet, q_lo_base);
      InjectionSet q_hi = InjectionSet::from_base_profiles(rnet, q_hi_base);
      try {
        OrderTestResult res =
            verify_order_propagation(rnet, r_lo, r_hi, q_lo, q_hi, &cc, t_tr, step_tr);
        min_margin = std::min(min_margin, res.margin);
        if (!res.holds) {
          ++failed_trials;
          if (first_violation.is_null() && res.first_violation) {
            first_violation = ordered_json{{"trial", tr},
                                           {"time", res.first_violation->time},
                                           {"node", res.first_violation->node},
                                           {"rho_low", res.first_violation->rho_low},
                                           {"rho_high", res.first_violation->rho_high}};
          }
        }
      } catch (const SimulationError&) {
        ++aborted_trials;
      }
    }
  } catch (const std::exception& ex) {
    order_error = ex.what();
  }
  bool order_ok =
      order_error.empty() && failed_trials == 0 && aborted_trials == 0 && trials > 0;
  order["ok"] = order_ok;
  order["trials"] = trials;
  order["t_end"] = t_tr;
  order["step"] = step_tr;
  order["tol"] = 1e-9;
  order["failed_trials"] = failed_trials;
  order["aborted_trials"] = aborted_trials;
  order["min_margin"] = finite_or_label(min_margin);
  if (!first_violation.is_null()) order["first_violation"] = first_violation;
  if (!order_error.empty()) order["error"] = order_error;
  all_ok = all_ok && order_ok;

  ordered_json report;
  report["command"] = "verify";
  report["network"] = net_path;
  report["epsilon"] = epsilon;
  report["seed"] = o.seed;
  report["passed"] = all_ok;
  report["model_parameters"] = ordered_json{{"ok", models_ok}, {"edges", model_edges}};
  report["jacobian_signs"] = jac;
  report["feedback_policies"] = ordered_json{{"ok", fb_ok}, {"checked", fb_checked}};
  report["order_propagation"] = order;
  report["notes"] = ordered_json::array(
      {"sign conditions are sampled over the declared boxes; ratio-profile corner "
       "points carry zero measure in time and are exercised through their one-sided "
       "rates"});
  io::write_json(report, out_path(o, "report.json"));

  ordered_json inputs{{"network", net_path}};
  ordered_json settings{{"epsilon", epsilon},  {"samples", samples},
                        {"trials", trials},    {"rho_lo", rho_lo},
                        {"rho_hi", rho_hi},    {"alpha_lo", alpha_lo},
                        {"alpha_hi", alpha_hi}};
  io::write_json(io::run_manifest("verify", inputs, settings, o.seed),
                 out_path(o, "manifest.json"));

  info(o, std::string("model parameters: ") + (models_ok ? "ok" : "FAILED"));
  info(o, std::string("jacobian signs: ") + (jac["ok"].get<bool>() ? "ok" : "FAILED"));
  info(o, std::string("feedback policies: ") + (fb_ok ? "ok" : "FAILED"));
  info(o, std::string("order propagation: ") + (order_ok ? "ok" : "FAILED"));
  info(o, std::string("verification ") + (all_ok ? "passed" : "FAILED") + "; wrote " +
              out_path(o, "report.json"));
  return all_ok ? 0 : kExitVerifyFailed;
}

// Worst box violation per side, located by node and time.
ordered_json violation_entries(const RobustOcp& ocp, const RobustEvaluation& ev) {
  ordered_json out = ordered_json::array();
  struct Worst {
    double margin = std::numeric_limits<double>::infinity();
    std::size_t node = 0;
    double time = 0.0;
  } lo, hi;
  std::size_t n = ocp.rnet.node_count();
  for (std::size_t s = 0; s < ev.low.samples(); ++s) {
    const double* rl = ev.low.state(s);
    const double* rh = ev.high.state(s);
    for (std::size_t j = 0; j < n; ++j) {
      double ml = rl[j] - ocp.rho_min[j];
      if (ml < lo.margin) lo = {ml, j, ev.low.times[s]};
      double mh = ocp.rho_max[j] - rh[j];
      if (mh < hi.margin) hi = {mh, j, ev.high.times[s]};
    }
  }
  if (lo.margin < 0.0)
    out.push_back(ordered_json{{"bound", "rho_min"},
                               {"node", ocp.rnet.node_ids[lo.node]},
                               {"time", lo.time},
                               {"violation", -lo.margin}});
  if (hi.margin < 0.0)
    out.push_back(ordered_json{{"bound", "rho_max"},
                               {"node", ocp.rnet.node_ids[hi.node]},
                               {"time", hi.time},
                               {"violation", -hi.margin}});
  return out;
}

int cmd_optimize(const Options& o, const std::string& ocp_path) {
  io::RobustOcpSpec spec = io::load_ocp_spec(ocp_path);
  std::string base_dir = fs::path(ocp_path).parent_path().string();
  RobustOcp ocp = io::build_ocp(spec, base_dir);
  ensure_out(o);

  SolveReport rep = solve_robust(ocp);
  RobustEvaluation ev = evaluate_robust(ocp, rep.schedule);

  io::write_json(io::schedule_to_json(rep.schedule, ocp.network),
                 out_path(o, "schedule.json"));
  const auto& ids = ocp.rnet.node_ids;
  io::write_trajectory_csv(ev.low, ids, out_path(o, "envelope_low.csv"));
  io::write_trajectory_csv(ev.nominal, ids, out_path(o, "envelope_nominal.csv"));
  io::write_trajectory_csv(ev.high, ids, out_path(o, "envelope_high.csv"));

  ordered_json result;
  result["command"] = "optimize";
  result["ocp"] = ocp_path;
  result["feasible"] = rep.feasible;
  result["objective"] = ev.objective;
  result["margin_lower"] = finite_or_label(ev.margin_lower);
  result["margin_upper"] = finite_or_label(ev.margin_upper);
  result["iterations"] = rep.iterations;
  result["evaluations"] = rep.evaluations;
  result["termination"] = rep.termination;
  if (!rep.feasible) result["violations"] = violation_entries(ocp, ev);
  io::write_json(result, out_path(o, "result.json"));

  ordered_json inputs{{"ocp", ocp_path}, {"network", spec.network}};
  io::write_json(io::run_manifest("optimize", inputs, io::ocp_spec_to_json(spec), o.seed),
                 out_path(o, "manifest.json"));

  info(o, "objective " + io::format_double(ev.objective) + ", margins (" +
              io::format_double(ev.margin_lower) + ", " +
              io::format_double(ev.margin_upper) + "), " + rep.termination +
              "; wrote " + out_path(o, "result.json"));
  if (!rep.feasible) {
    std::cerr << "error: no feasible schedule found (best attempt written)\n";
    return kExitInfeasible;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"actuated dissipative flow network toolkit"};
  app.require_subcommand(1);

  Options opts;
  app.add_option("--seed", opts.seed, "random seed")->capture_default_str();
  app.add_option("--out", opts.out, "output directory")->capture_default_str();
  app.add_flag("--quiet", opts.quiet, "suppress progress output");

  auto* c_refine = app.add_subcommand("refine", "subdivide edges to a target segment length");
  std::string refine_net;
  double refine_eps = 0.0;
  c_refine->add_option("network", refine_net, "network file")->required();
  c_refine->add_option("--epsilon", refine_eps, "target segment length")->required();
  c_refine->fallthrough();

  auto* c_sim = app.add_subcommand("simulate", "integrate the nodal dynamics");
  std::string sim_net;
  double sim_eps = 0.0, sim_t_end = 0.0, sim_step = 0.01, sim_rho0 = 1.0;
  c_sim->add_option("network", sim_net, "network file")->required();
  c_sim->add_option("--epsilon", sim_eps, "target segment length")->required();
  c_sim->add_option("--t-end", sim_t_end, "end time (default: network horizon)");
  c_sim->add_option("--step", sim_step, "integrator step")->capture_default_str();
  c_sim->add_option("--rho0", sim_rho0, "uniform initial density")->capture_default_str();
  c_sim->fallthrough();

  auto* c_verify = app.add_subcommand("verify", "check monotonicity conditions");
  std::string verify_net;
  double verify_eps = 0.0;
  int verify_samples = 50, verify_trials = 20;
  double v_rho_lo = 0.5, v_rho_hi = 2.0, v_alpha_lo = 0.5, v_alpha_hi = 2.0;
  c_verify->add_option("network", verify_net, "network file")->required();
  c_verify->add_option("--epsilon", verify_eps, "target segment length")->required();
  c_verify->add_option("--samples", verify_samples, "jacobian sample count")
      ->capture_default_str();
  c_verify->add_option("--trials", verify_trials, "order-propagation trials")
      ->capture_default_str();
  c_verify->add_option("--rho-lo", v_rho_lo, "density box lower bound")
      ->capture_default_str();
  c_verify->add_option("--rho-hi", v_rho_hi, "density box upper bound")
      ->capture_default_str();
  c_verify->add_option("--alpha-lo", v_alpha_lo, "ratio box lower bound")
      ->capture_default_str();
  c_verify->add_option("--alpha-hi", v_alpha_hi, "ratio box upper bound")
      ->capture_default_str();
  c_verify->fallthrough();

  auto* c_opt = app.add_subcommand("optimize", "solve the robust control problem");
  std::string opt_ocp;
  c_opt->add_option("ocp", opt_ocp, "problem description file")->required();
  c_opt->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_refine->parsed()) return cmd_refine(opts, refine_net, refine_eps);
    if (c_sim->parsed())
      return cmd_simulate(opts, sim_net, sim_eps, sim_t_end, sim_step, sim_rho0);
    if (c_verify->parsed())
      return cmd_verify(opts, verify_net, verify_eps, verify_samples, verify_trials,
                        v_rho_lo, v_rho_hi, v_alpha_lo, v_alpha_hi);
    if (c_opt->parsed()) return cmd_optimize(opts, opt_ocp);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SimulationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSimAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
