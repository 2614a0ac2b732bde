#include "json_support.hpp"

#include <cmath>

namespace flowssl::detail {

using nlohmann::json;

// Only strictly positive weights are listed; absent label nodes carry zero.
json weights_json(const WeightVector& weights, const std::vector<NodeId>& label_nodes) {
  json out = json::array();
  for (Eigen::Index i = 0; i < weights.weights.size(); ++i) {
    if (weights.weights[i] > 0.0) {
      out.push_back({{"label_node", label_nodes[static_cast<std::size_t>(i)]},
                     {"w", weights.weights[i]}});
    }
  }
  return out;
}

json subgraph_json(const FlowSubgraph& subgraph) {
  json nodes = json::array();
  for (NodeId v : subgraph.topo_order) {
    json node = {{"id", v}, {"role", to_string(subgraph.role(v))}};
    if (auto w = subgraph.source_weight(v)) node["weight"] = *w;
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const FlowEdge& e : subgraph.edges) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"flow", e.flow}});
  }
  return {{"sink", subgraph.sink},
          {"lambda", subgraph.lambda},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)},
          {"topo_order", subgraph.topo_order}};
}

json report_json(const PredictionReport& report) {
  json nodes = json::array();
  for (const NodePrediction& p : report.nodes) {
    json node = {{"id", p.node},
                 {"value", std::isfinite(p.value) ? json(p.value) : json(nullptr)},
                 {"entropy", p.entropy},
                 {"weights", weights_json(p.weights, report.label_nodes)},
                 {"converged", p.converged && p.error.empty()},
                 {"iterations", p.iterations}};
    if (!p.error.empty()) node["error"] = p.error;
    nodes.push_back(std::move(node));
  }
  return {{"lambda", report.lambda}, {"nodes", std::move(nodes)}};
}

}  // namespace flowssl::detail
