#include "flownet/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <string>

#include "flownet/errors.hpp"

namespace flownet {

const char* side_label(Side s) { return s == Side::Tail ? "+" : "-"; }

Side side_from_label(std::string_view s) {
  if (s == "+") return Side::Tail;
  if (s == "-") return Side::Head;
  throw InputError("actuator side must be \"+\" or \"-\", got \"" + std::string(s) + "\"");
}

int Network::node_index(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  return -1;
}

int Network::edge_index(std::string_view id) const {
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].id == id) return static_cast<int>(i);
  return -1;
}

void Network::validate(bool check_models) const {
  if (nodes.empty()) throw ValidationError("network has no nodes");
  if (edges.empty()) throw ValidationError("network has no edges");
  if (!std::isfinite(horizon) || horizon <= 0.0)
    throw ValidationError("horizon must be positive and finite");

  std::set<std::string> node_ids;
  for (const auto& n : nodes) {
    if (n.id.empty()) throw ValidationError("node with empty id");
    if (!node_ids.insert(n.id).second)
      throw ValidationError("duplicate node id \"" + n.id + "\"");
  }

  std::set<std::string> edge_ids;
  for (const auto& e : edges) {
    if (e.id.empty()) throw ValidationError("edge with empty id");
    if (!edge_ids.insert(e.id).second)
      throw ValidationError("duplicate edge id \"" + e.id + "\"");
    if (node_index(e.from) < 0)
      throw ValidationError("edge \"" + e.id + "\": unknown node \"" + e.from + "\"");
    if (node_index(e.to) < 0)
      throw ValidationError("edge \"" + e.id + "\": unknown node \"" + e.to + "\"");
    if (e.from == e.to)
      throw ValidationError("edge \"" + e.id + "\": self-loops are not allowed");
    if (!std::isfinite(e.length) || e.length <= 0.0)
      throw ValidationError("edge \"" + e.id + "\": length must be positive");
    if (check_models) {
      try {
        e.model.validate();
      } catch (const ValidationError& err) {
        throw ValidationError("edge \"" + e.id + "\": " + err.what());
      }
    }
  }

  // connectivity, ignoring orientation
  {
    std::vector<std::vector<int>> adj(nodes.size());
    for (const auto& e : edges) {
      const int a = node_index(e.from), b = node_index(e.to);
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::vector<char> seen(nodes.size(), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          frontier.push(w);
        }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (!seen[i])
        throw ValidationError("network is not connected: node \"" + nodes[i].id +
                              "\" is unreachable");
  }

  std::set<std::pair<std::string, Side>> placements;
  for (const auto& a : actuators) {
    if (edge_index(a.edge) < 0)
      throw ValidationError("actuator references unknown edge \"" + a.edge + "\"");
    if (!placements.insert({a.edge, a.side}).second)
      throw ValidationError("duplicate actuator on edge \"" + a.edge + "\" side " +
                            side_label(a.side));
    if (!a.is_feedback()) {
      if (a.profile().min_on(0.0, horizon) <= 0.0)
        throw ValidationError("actuator on edge \"" + a.edge + "\" side " +
                              side_label(a.side) +
                              ": ratio profile must stay strictly positive");
    }
  }

  for (const auto& n : nodes) {
    if (!n.has_injection) continue;
    const auto& inj = n.injection;
    if (inj.lower) {
      for (double t : merged_breakpoints(*inj.lower, inj.nominal, 0.0, horizon))
        if (inj.lower->value(t) > inj.nominal.value(t))
          throw ValidationError("node \"" + n.id +
                                "\": lower injection exceeds nominal at t=" +
                                std::to_string(t));
    }
    if (inj.upper) {
      for (double t : merged_breakpoints(inj.nominal, *inj.upper, 0.0, horizon))
        if (inj.nominal.value(t) > inj.upper->value(t))
          throw ValidationError("node \"" + n.id +
                                "\": nominal injection exceeds upper at t=" +
                                std::to_string(t));
    }
  }
}

}  // namespace flownet
