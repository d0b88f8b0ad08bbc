#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "flownet/network.hpp"
#include "flownet/refine.hpp"
#include "flownet/robust.hpp"
#include "flownet/simulator.hpp"

namespace flownet::io {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

TimeProfile profile_from_json(const nlohmann::json& j);
nlohmann::ordered_json profile_to_json(const TimeProfile& p);

/// Parses the network description; field errors raise InputError. Semantic
/// checks live in Network::validate, which load_network runs (model-parameter
/// checks skipped when check_models is false, so analysis commands can load
/// deliberately broken models).
Network network_from_json(const nlohmann::json& j);
nlohmann::ordered_json network_to_json(const Network& net);
Network load_network(const std::string& path, bool check_models = true);
void save_network(const Network& net, const std::string& path);

nlohmann::ordered_json refined_to_json(const RefinedNetwork& rnet);

void write_trajectory_csv(const Trajectory& traj,
                          const std::vector<std::string>& node_ids,
                          const std::string& path);

/// File-level robust-control problem description. Bounds and initial
/// densities are scalars broadcast over the refined nodes.
struct RobustOcpSpec {
  std::string network;  // path, resolved relative to the problem file
  double horizon = 0.0;
  int intervals = 1;
  double rho_min = 0.0, rho_max = 0.0;
  double alpha_lo = 0.5, alpha_hi = 2.0;
  ObjectiveSpec objective;
  OptimizerSettings optimizer;
  double epsilon = 1.0;
  double step = 0.0;  // 0 → automatic
  double initial_density = 1.0;
  std::optional<double> initial_density_low, initial_density_high;

  bool operator==(const RobustOcpSpec&) const = default;
};

ObjectiveSpec objective_from_json(const nlohmann::json& j);
nlohmann::ordered_json objective_to_json(const ObjectiveSpec& o);

RobustOcpSpec ocp_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json ocp_spec_to_json(const RobustOcpSpec& spec);
RobustOcpSpec load_ocp_spec(const std::string& path);

/// Loads the referenced network and resolves the description into a solvable
/// problem; base_dir anchors a relative network path.
RobustOcp build_ocp(const RobustOcpSpec& spec, const std::string& base_dir);

nlohmann::ordered_json schedule_to_json(const ControlSchedule& s, const Network& net);
ControlSchedule schedule_from_json(const nlohmann::json& j, const Network& net);

nlohmann::json read_json(const std::string& path);
void write_json(const nlohmann::ordered_json& j, const std::string& path);
void write_text(const std::string& text, const std::string& path);

/// Reproducibility record emitted next to every output.
nlohmann::ordered_json run_manifest(const std::string& command,
                                    const nlohmann::ordered_json& inputs,
                                    const nlohmann::ordered_json& settings,
                                    std::uint64_t seed);

}  // namespace flownet::io
