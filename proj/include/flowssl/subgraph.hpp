#pragma once

#include "flowssl/weights.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace flowssl {

struct FlowEdge {
  NodeId from = 0;
  NodeId to = 0;
  double flow = 0.0;  // positive after reorientation

  friend bool operator==(const FlowEdge&, const FlowEdge&) = default;
};

struct FlowSource {
  NodeId node = 0;
  double weight = 0.0;

  friend bool operator==(const FlowSource&, const FlowSource&) = default;
};

enum class NodeRole { source, interior, sink };

// Support of an optimal flow, oriented so every flow is positive.
struct FlowSubgraph {
  NodeId sink = 0;
  double lambda = 0.0;
  std::vector<FlowEdge> edges;      // in incidence column order
  std::vector<FlowSource> sources;  // labeled nodes with positive out-flow
  std::vector<NodeId> topo_order;

  std::vector<NodeId> nodes() const;  // ascending ids
  NodeRole role(NodeId node) const;
  std::optional<double> source_weight(NodeId node) const;

  friend bool operator==(const FlowSubgraph&, const FlowSubgraph&) = default;
};

constexpr double kDefaultSupportEps = 1e-8;

// Keeps edges with |z_e| > eps, flipping those with negative flow. Source
// weights come from weights_from_flow. The result is checked with
// verify_dag and carries its topological order.
FlowSubgraph extract_support(const FlowSolution& solution,
                             const IncidenceSystem& system,
                             double eps = kDefaultSupportEps);

// Kahn's algorithm, always releasing the smallest ready node id first.
// Throws SolverError naming a cycle if one exists.
std::vector<NodeId> verify_dag(const FlowSubgraph& subgraph);

// in-flow minus out-flow per node of the subgraph.
std::map<NodeId, double> flow_imbalance(const FlowSubgraph& subgraph);

struct DotOptions {
  std::string graph_name = "flow";
  // Optional display text per node id; defaults to the id.
  std::map<NodeId, std::string> node_labels;
};

// Graphviz digraph, top-to-bottom. Edge labels are flows in percent, rounded
// half-up to integers. Sources are outlined blue and the sink red.
std::string export_dot(const FlowSubgraph& subgraph, const DotOptions& options = {});

// {"sink", "lambda", "nodes": [{"id", "role", "weight"?}],
//  "edges": [{"from", "to", "flow"}], "topo_order"}
std::string export_json(const FlowSubgraph& subgraph);
FlowSubgraph subgraph_from_json(const std::string& text);

std::string_view to_string(NodeRole role);

}  // namespace flowssl
