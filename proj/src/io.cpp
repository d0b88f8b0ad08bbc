#include "flownet/io.hpp"

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flownet/errors.hpp"

namespace flownet::io {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

TimeProfile profile_from_json(const json& j) {
  std::vector<std::array<double, 2>> pts;
  try {
    pts = j.get<std::vector<std::array<double, 2>>>();
  } catch (const json::exception&) {
    throw InputError("profile must be a list of [t, value] pairs");
  }
  return TimeProfile::from_points(pts);
}

ordered_json profile_to_json(const TimeProfile& p) {
  ordered_json out = ordered_json::array();
  for (const auto& pt : p.points()) out.push_back({pt[0], pt[1]});
  return out;
}

namespace {

DissipationModel model_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  DissipationModel m;
  if (type == "linear") {
    m.kind = DissipationModel::Kind::Linear;
    m.beta = j.at("beta").get<double>();
  } else if (type == "gas_weymouth") {
    m.kind = DissipationModel::Kind::GasWeymouth;
    m.kappa = j.at("kappa").get<double>();
    if (j.contains("delta")) m.delta = j.at("delta").get<double>();
  } else {
    throw InputError("unknown dissipation model type \"" + type + "\"");
  }
  return m;
}

ordered_json model_to_json(const DissipationModel& m) {
  ordered_json j;
  if (m.kind == DissipationModel::Kind::Linear) {
    j["type"] = "linear";
    j["beta"] = m.beta;
  } else {
    j["type"] = "gas_weymouth";
    j["kappa"] = m.kappa;
    j["delta"] = m.delta;
  }
  return j;
}

FeedbackPolicy feedback_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  const json params = j.contains("params") ? j.at("params") : json::object();
  if (type == "constant") return FeedbackPolicy::constant(params.at("value").get<double>());
  if (type == "power_law")
    return FeedbackPolicy::power_law(params.at("coeff").get<double>(),
                                     params.at("exponent").get<double>());
  if (type == "tabulated")
    return FeedbackPolicy::tabulated(
        TimeProfile::from_points(params.at("points").get<std::vector<std::array<double, 2>>>()));
  throw InputError("unknown feedback type \"" + type + "\"");
}

ordered_json feedback_to_json(const FeedbackPolicy& p) {
  ordered_json j;
  switch (p.kind()) {
    case FeedbackPolicy::Kind::Constant:
      j["type"] = "constant";
      j["params"] = {{"value", p.coeff()}};
      break;
    case FeedbackPolicy::Kind::PowerLaw:
      j["type"] = "power_law";
      j["params"] = {{"coeff", p.coeff()}, {"exponent", p.exponent()}};
      break;
    case FeedbackPolicy::Kind::Tabulated:
      j["type"] = "tabulated";
      j["params"] = {{"points", profile_to_json(p.table())}};
      break;
  }
  return j;
}

}  // namespace

Network network_from_json(const json& j) {
  Network net;
  try {
    for (const json& nj : j.at("nodes")) {
      NetworkNode node;
      node.id = nj.at("id").get<std::string>();
      if (nj.contains("injection")) {
        node.has_injection = true;
        const json& inj = nj.at("injection");
        node.injection.nominal = profile_from_json(inj.at("nominal"));
        if (inj.contains("lower"))
          node.injection.lower = profile_from_json(inj.at("lower"));
        if (inj.contains("upper"))
          node.injection.upper = profile_from_json(inj.at("upper"));
      }
      net.nodes.push_back(std::move(node));
    }
    for (const json& ej : j.at("edges")) {
      NetworkEdge e;
      e.id = ej.at("id").get<std::string>();
      e.from = ej.at("from").get<std::string>();
      e.to = ej.at("to").get<std::string>();
      e.length = ej.at("length").get<double>();
      e.model = model_from_json(ej.at("model"));
      net.edges.push_back(std::move(e));
    }
    if (j.contains("actuators")) {
      for (const json& aj : j.at("actuators")) {
        Actuator a;
        a.edge = aj.at("edge").get<std::string>();
        a.side = side_from_label(aj.at("side").get<std::string>());
        const json& prof = aj.at("profile");
        if (prof.is_object())
          a.control = feedback_from_json(prof.at("feedback"));
        else
          a.control = profile_from_json(prof);
        net.actuators.push_back(std::move(a));
      }
    }
    net.horizon = j.at("horizon").get<double>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad network file: ") + e.what());
  }
  return net;
}

ordered_json network_to_json(const Network& net) {
  ordered_json j;
  j["nodes"] = ordered_json::array();
  for (const NetworkNode& n : net.nodes) {
    ordered_json nj{{"id", n.id}};
    if (n.has_injection) {
      ordered_json inj{{"nominal", profile_to_json(n.injection.nominal)}};
      if (n.injection.lower) inj["lower"] = profile_to_json(*n.injection.lower);
      if (n.injection.upper) inj["upper"] = profile_to_json(*n.injection.upper);
      nj["injection"] = std::move(inj);
    }
    j["nodes"].push_back(std::move(nj));
  }
  j["edges"] = ordered_json::array();
  for (const NetworkEdge& e : net.edges)
    j["edges"].push_back({{"id", e.id},
                          {"from", e.from},
                          {"to", e.to},
                          {"length", e.length},
                          {"model", model_to_json(e.model)}});
  j["actuators"] = ordered_json::array();
  for (const Actuator& a : net.actuators) {
    ordered_json aj{{"edge", a.edge}, {"side", side_label(a.side)}};
    if (a.is_feedback())
      aj["profile"] = ordered_json{{"feedback", feedback_to_json(a.policy())}};
    else
      aj["profile"] = profile_to_json(a.profile());
    j["actuators"].push_back(std::move(aj));
  }
  j["horizon"] = net.horizon;
  return j;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open \"" + path + "\"");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("cannot parse \"" + path + "\": " + e.what());
  }
}

void write_json(const ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write \"" + path + "\"");
  out << j.dump(2) << '\n';
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write \"" + path + "\"");
  out << text;
}

Network load_network(const std::string& path, bool check_models) {
  Network net = network_from_json(read_json(path));
  net.validate(check_models);
  return net;
}

void save_network(const Network& net, const std::string& path) {
  write_json(network_to_json(net), path);
}

ordered_json refined_to_json(const RefinedNetwork& rnet) {
  ordered_json j;
  j["epsilon"] = rnet.epsilon;
  j["nodes"] = ordered_json::array();
  for (std::size_t i = 0; i < rnet.node_count(); ++i)
    j["nodes"].push_back({{"id", rnet.node_ids[i]},
                          {"index", i},
                          {"base", rnet.node_base[i] >= 0}});
  j["edges"] = ordered_json::array();
  ordered_json parent_map = ordered_json::object();
  for (std::size_t e = 0; e < rnet.edge_count(); ++e) {
    const RefinedEdge& re = rnet.edges[e];
    const std::string id = rnet.edge_id(e);
    j["edges"].push_back({{"id", id},
                          {"index", e},
                          {"from", rnet.node_ids[re.from]},
                          {"to", rnet.node_ids[re.to]},
                          {"length", re.length},
                          {"parent", rnet.base.edges[re.parent].id}});
    parent_map[id] = rnet.base.edges[re.parent].id;
  }
  j["parent_map"] = std::move(parent_map);
  j["actuators"] = ordered_json::array();
  for (std::size_t e = 0; e < rnet.edge_count(); ++e) {
    if (rnet.tail_actuator[e] >= 0)
      j["actuators"].push_back(
          {{"edge", rnet.edge_id(e)}, {"side", "+"}, {"base_index", rnet.tail_actuator[e]}});
    if (rnet.head_actuator[e] >= 0)
      j["actuators"].push_back(
          {{"edge", rnet.edge_id(e)}, {"side", "-"}, {"base_index", rnet.head_actuator[e]}});
  }
  return j;
}

void write_trajectory_csv(const Trajectory& traj,
                          const std::vector<std::string>& node_ids,
                          const std::string& path) {
  std::ostringstream out;
  out << 't';
  for (const auto& id : node_ids) out << ',' << id;
  out << '\n';
  for (std::size_t s = 0; s < traj.samples(); ++s) {
    out << format_double(traj.times[s]);
    const double* rho = traj.state(s);
    for (std::size_t jn = 0; jn < traj.node_count; ++jn)
      out << ',' << format_double(rho[jn]);
    out << '\n';
  }
  write_text(out.str(), path);
}

namespace {

ObjectiveSpec::Cost cost_from_string(const std::string& s) {
  if (s == "actuation_power") return ObjectiveSpec::Cost::ActuationPower;
  if (s == "density_tracking") return ObjectiveSpec::Cost::DensityTracking;
  if (s == "weighted_sum") return ObjectiveSpec::Cost::WeightedSum;
  throw InputError("unknown objective type \"" + s + "\"");
}

const char* cost_to_string(ObjectiveSpec::Cost c) {
  switch (c) {
    case ObjectiveSpec::Cost::ActuationPower: return "actuation_power";
    case ObjectiveSpec::Cost::DensityTracking: return "density_tracking";
    case ObjectiveSpec::Cost::WeightedSum: return "weighted_sum";
  }
  return "";
}

}  // namespace

ObjectiveSpec objective_from_json(const json& j) {
  ObjectiveSpec o;
  try {
    o.cost = cost_from_string(j.at("type").get<std::string>());
    const json params = j.contains("params") ? j.at("params") : json::object();
    if (params.contains("mode")) {
      const std::string m = params.at("mode").get<std::string>();
      if (m == "nominal")
        o.mode = ObjectiveSpec::Mode::Nominal;
      else if (m == "minmax")
        o.mode = ObjectiveSpec::Mode::MinMax;
      else
        throw InputError("objective mode must be \"nominal\" or \"minmax\"");
    }
    if (params.contains("sign")) {
      const std::string s = params.at("sign").get<std::string>();
      if (s == "increasing")
        o.sign = ObjectiveSpec::Sign::Increasing;
      else if (s == "decreasing")
        o.sign = ObjectiveSpec::Sign::Decreasing;
      else
        throw InputError("objective sign must be \"increasing\" or \"decreasing\"");
    }
    if (params.contains("actuation_weight"))
      o.actuation_weight = params.at("actuation_weight").get<double>();
    if (params.contains("tracking_weight"))
      o.tracking_weight = params.at("tracking_weight").get<double>();
    if (params.contains("rho_ref")) o.rho_ref = params.at("rho_ref").get<double>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad objective: ") + e.what());
  }
  return o;
}

ordered_json objective_to_json(const ObjectiveSpec& o) {
  ordered_json params;
  params["mode"] = o.mode == ObjectiveSpec::Mode::Nominal ? "nominal" : "minmax";
  params["sign"] =
      o.sign == ObjectiveSpec::Sign::Increasing ? "increasing" : "decreasing";
  params["actuation_weight"] = o.actuation_weight;
  params["tracking_weight"] = o.tracking_weight;
  params["rho_ref"] = o.rho_ref;
  return ordered_json{{"type", cost_to_string(o.cost)}, {"params", std::move(params)}};
}

RobustOcpSpec ocp_spec_from_json(const json& j) {
  RobustOcpSpec spec;
  try {
    spec.network = j.at("network").get<std::string>();
    spec.horizon = j.at("horizon").get<double>();
    spec.intervals = j.at("intervals").get<int>();
    const json& b = j.at("bounds");
    spec.rho_min = b.at("rho_min").get<double>();
    spec.rho_max = b.at("rho_max").get<double>();
    spec.alpha_lo = b.at("alpha_lo").get<double>();
    spec.alpha_hi = b.at("alpha_hi").get<double>();
    spec.objective = objective_from_json(j.at("objective"));
    if (j.contains("optimizer")) {
      const json& o = j.at("optimizer");
      if (o.contains("max_iters")) spec.optimizer.max_iters = o.at("max_iters").get<int>();
      if (o.contains("tol")) spec.optimizer.tol = o.at("tol").get<double>();
      if (o.contains("penalty")) spec.optimizer.penalty = o.at("penalty").get<double>();
      if (o.contains("fd_step")) spec.optimizer.fd_step = o.at("fd_step").get<double>();
    }
    if (j.contains("epsilon")) spec.epsilon = j.at("epsilon").get<double>();
    if (j.contains("step")) spec.step = j.at("step").get<double>();
    if (j.contains("initial_density"))
      spec.initial_density = j.at("initial_density").get<double>();
    if (j.contains("initial_density_low"))
      spec.initial_density_low = j.at("initial_density_low").get<double>();
    if (j.contains("initial_density_high"))
      spec.initial_density_high = j.at("initial_density_high").get<double>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad problem file: ") + e.what());
  }
  return spec;
}

ordered_json ocp_spec_to_json(const RobustOcpSpec& spec) {
  ordered_json j;
  j["network"] = spec.network;
  j["horizon"] = spec.horizon;
  j["intervals"] = spec.intervals;
  j["bounds"] = {{"rho_min", spec.rho_min},
                 {"rho_max", spec.rho_max},
                 {"alpha_lo", spec.alpha_lo},
                 {"alpha_hi", spec.alpha_hi}};
  j["objective"] = objective_to_json(spec.objective);
  j["optimizer"] = {{"max_iters", spec.optimizer.max_iters},
                    {"tol", spec.optimizer.tol},
                    {"penalty", spec.optimizer.penalty},
                    {"fd_step", spec.optimizer.fd_step}};
  j["epsilon"] = spec.epsilon;
  j["step"] = spec.step;
  j["initial_density"] = spec.initial_density;
  if (spec.initial_density_low) j["initial_density_low"] = *spec.initial_density_low;
  if (spec.initial_density_high) j["initial_density_high"] = *spec.initial_density_high;
  return j;
}

RobustOcpSpec load_ocp_spec(const std::string& path) {
  return ocp_spec_from_json(read_json(path));
}

RobustOcp build_ocp(const RobustOcpSpec& spec, const std::string& base_dir) {
  namespace fs = std::filesystem;
  fs::path net_path(spec.network);
  if (net_path.is_relative() && !base_dir.empty()) net_path = fs::path(base_dir) / net_path;

  RobustOcp ocp = RobustOcp::build(load_network(net_path.string()), spec.epsilon,
                                   spec.horizon, spec.intervals, spec.rho_min,
                                   spec.rho_max, spec.alpha_lo, spec.alpha_hi,
                                   spec.initial_density);
  ocp.objective = spec.objective;
  ocp.optimizer = spec.optimizer;
  ocp.step = spec.step;
  const std::size_t n = ocp.rnet.node_count();
  if (spec.initial_density_low)
    ocp.rho0_low.assign(n, *spec.initial_density_low);
  if (spec.initial_density_high)
    ocp.rho0_high.assign(n, *spec.initial_density_high);
  ocp.validate();
  return ocp;
}

ordered_json schedule_to_json(const ControlSchedule& s, const Network& net) {
  ordered_json j;
  j["horizon"] = s.horizon;
  j["intervals"] = s.intervals;
  j["actuators"] = ordered_json::array();
  for (std::size_t a = 0; a < s.values.size(); ++a)
    j["actuators"].push_back({{"edge", net.actuators[a].edge},
                              {"side", side_label(net.actuators[a].side)},
                              {"values", s.values[a]}});
  return j;
}

ControlSchedule schedule_from_json(const json& j, const Network& net) {
  ControlSchedule s;
  try {
    s.horizon = j.at("horizon").get<double>();
    s.intervals = j.at("intervals").get<int>();
    const json& acts = j.at("actuators");
    if (acts.size() != net.actuators.size())
      throw InputError("schedule must list every actuator");
    for (std::size_t a = 0; a < net.actuators.size(); ++a) {
      const json& aj = acts.at(a);
      if (aj.at("edge").get<std::string>() != net.actuators[a].edge ||
          side_from_label(aj.at("side").get<std::string>()) != net.actuators[a].side)
        throw InputError("schedule actuator order does not match the network");
      s.values.push_back(aj.at("values").get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("bad schedule: ") + e.what());
  }
  return s;
}

ordered_json run_manifest(const std::string& command, const ordered_json& inputs,
                          const ordered_json& settings, std::uint64_t seed) {
  ordered_json j;
  j["tool"] = "flownet";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["inputs"] = inputs;
  j["settings"] = settings;
  j["seed"] = seed;
  return j;
}

}  // namespace flownet::io
