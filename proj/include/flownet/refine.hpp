#pragma once

#include <string>
#include <vector>

#include "flownet/network.hpp"

namespace flownet {

struct RefinedEdge {
  int from = 0;        // refined node index
  int to = 0;
  double length = 0.0; // segment length
  int parent = 0;      // base edge index
  int segment = 0;     // position along the parent edge, 0-based
};

/// Spatial refinement of a Network: every base edge of length L is split
/// into n = floor(L/eps)+1 equal segments, which keeps each segment length
/// inside (eps*L/(eps+L), eps). Base nodes come first and keep their ids;
/// interior nodes are named "<edge id>#<k>" for the k-th subdivision point.
/// Actuators stay attached to the outermost segment of their parent edge.
struct RefinedNetwork {
  Network base;
  double epsilon = 0.0;

  std::vector<std::string> node_ids;
  std::vector<int> node_base;  // base node index, or -1 for interior nodes
  std::vector<RefinedEdge> edges;

  // Per refined edge: index into base.actuators, or -1 for a ratio-1 end.
  std::vector<int> tail_actuator;
  std::vector<int> head_actuator;

  std::size_t node_count() const { return node_ids.size(); }
  std::size_t edge_count() const { return edges.size(); }

  /// "<parent id>#<segment>"
  std::string edge_id(std::size_t refined_edge) const;
};

RefinedNetwork refine_network(const Network& net, double epsilon);

/// Number of equal segments the refinement rule assigns to a length-L edge.
int segment_count(double length, double epsilon);

}  // namespace flownet
