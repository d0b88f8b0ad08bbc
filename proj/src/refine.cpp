#include "flownet/refine.hpp"

#include <cmath>

#include "flownet/errors.hpp"

namespace flownet {

int segment_count(double length, double epsilon) {
  return static_cast<int>(std::floor(length / epsilon)) + 1;
}

std::string RefinedNetwork::edge_id(std::size_t refined_edge) const {
  const RefinedEdge& e = edges[refined_edge];
  return base.edges[e.parent].id + "#" + std::to_string(e.segment);
}

RefinedNetwork refine_network(const Network& net, double epsilon) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0)
    throw ValidationError("epsilon must be positive");

  RefinedNetwork r;
  r.base = net;
  r.epsilon = epsilon;

  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    r.node_ids.push_back(net.nodes[i].id);
    r.node_base.push_back(static_cast<int>(i));
  }

  for (std::size_t ei = 0; ei < net.edges.size(); ++ei) {
    const NetworkEdge& e = net.edges[ei];
    const int n = segment_count(e.length, epsilon);
    const double seg_len = e.length / n;

    int tail_act = -1, head_act = -1;
    for (std::size_t ai = 0; ai < net.actuators.size(); ++ai) {
      if (net.actuators[ai].edge != e.id) continue;
      (net.actuators[ai].side == Side::Tail ? tail_act : head_act) =
          static_cast<int>(ai);
    }

    int prev = net.node_index(e.from);
    for (int k = 0; k < n; ++k) {
      int next;
      if (k + 1 == n) {
        next = net.node_index(e.to);
      } else {
        next = static_cast<int>(r.node_ids.size());
        r.node_ids.push_back(e.id + "#" + std::to_string(k + 1));
        r.node_base.push_back(-1);
      }
      r.edges.push_back({prev, next, seg_len, static_cast<int>(ei), k});
      r.tail_actuator.push_back(k == 0 ? tail_act : -1);
      r.head_actuator.push_back(k + 1 == n ? head_act : -1);
      prev = next;
    }
  }

  return r;
}

}  // namespace flownet
