#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flownet/dissipation.hpp"
#include "flownet/feedback.hpp"
#include "flownet/time_profile.hpp"

namespace flownet {

/// Which end of an edge an actuator modifies: Tail ("+") scales the density
/// seen at the from-node end, Head ("-") the to-node end.
enum class Side { Tail, Head };

const char* side_label(Side s);          // "+" or "-"
Side side_from_label(std::string_view);  // throws InputError on anything else

/// Nodal injection with optional uncertainty envelopes.
struct InjectionSpec {
  TimeProfile nominal = TimeProfile::constant(0.0);
  std::optional<TimeProfile> lower;
  std::optional<TimeProfile> upper;

  bool operator==(const InjectionSpec&) const = default;
};

struct NetworkNode {
  std::string id;
  InjectionSpec injection;
  bool has_injection = false;  // false → q ≡ 0 (id listed in run reports)

  bool operator==(const NetworkNode&) const = default;
};

struct NetworkEdge {
  std::string id;
  std::string from;
  std::string to;
  double length = 0.0;  // meters
  DissipationModel model;

  bool operator==(const NetworkEdge&) const = default;
};

/// A compression actuator at one edge end: either an open-loop ratio profile
/// in time or a density-feedback law.
struct Actuator {
  std::string edge;
  Side side = Side::Tail;
  std::variant<TimeProfile, FeedbackPolicy> control = TimeProfile::constant(1.0);

  bool is_feedback() const { return control.index() == 1; }
  const TimeProfile& profile() const { return std::get<TimeProfile>(control); }
  const FeedbackPolicy& policy() const { return std::get<FeedbackPolicy>(control); }

  bool operator==(const Actuator&) const = default;
};

struct Network {
  std::vector<NetworkNode> nodes;
  std::vector<NetworkEdge> edges;
  std::vector<Actuator> actuators;
  double horizon = 0.0;  // seconds

  int node_index(std::string_view id) const;  // -1 when absent
  int edge_index(std::string_view id) const;

  /// Throws ValidationError naming the offending element. With
  /// check_models = false the dissipation-parameter checks are skipped so
  /// that deliberately non-monotone files can still be loaded for analysis.
  void validate(bool check_models = true) const;

  bool operator==(const Network&) const = default;
};

}  // namespace flownet
