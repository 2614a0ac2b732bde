#include "flowssl/subgraph.hpp"

#include "flowssl/error.hpp"
#include "json_support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

namespace flowssl {

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::source: return "source";
    case NodeRole::interior: return "interior";
    case NodeRole::sink: return "sink";
  }
  return "interior";
}

std::vector<NodeId> FlowSubgraph::nodes() const {
  std::set<NodeId> set{sink};
  for (const FlowEdge& e : edges) {
    set.insert(e.from);
    set.insert(e.to);
  }
  return {set.begin(), set.end()};
}

NodeRole FlowSubgraph::role(NodeId node) const {
  if (node == sink) return NodeRole::sink;
  return source_weight(node) ? NodeRole::source : NodeRole::interior;
}

std::optional<double> FlowSubgraph::source_weight(NodeId node) const {
  for (const FlowSource& s : sources) {
    if (s.node == node) return s.weight;
  }
  return std::nullopt;
}

FlowSubgraph extract_support(const FlowSolution& solution,
                             const IncidenceSystem& system, double eps) {
  if (!(eps > 0.0)) throw DataError("support threshold must be positive");
  const WeightVector weights = weights_from_flow(solution, system);

  FlowSubgraph g;
  g.sink = solution.sink;
  g.lambda = solution.lambda;
  for (std::size_t e = 0; e < system.edge_count(); ++e) {
    const double flow = solution.z[static_cast<Eigen::Index>(e)];
    if (std::abs(flow) <= eps) continue;
    const Edge& oriented = system.orientation()[e];
    if (flow > 0.0) {
      g.edges.push_back({oriented.tail, oriented.head, flow});
    } else {
      g.edges.push_back({oriented.head, oriented.tail, -flow});
    }
  }
  const auto& labeled = system.labeled_nodes();
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    const double w = weights.weights[static_cast<Eigen::Index>(i)];
    if (w > 0.0) g.sources.push_back({labeled[i], w});
  }
  std::sort(g.sources.begin(), g.sources.end(),
            [](const FlowSource& a, const FlowSource& b) { return a.node < b.node; });
  g.topo_order = verify_dag(g);
  return g;
}

namespace {

// Some cycle inside `remaining` (nodes Kahn could not release), as a node path.
std::vector<NodeId> find_cycle(const std::map<NodeId, std::vector<NodeId>>& out,
                               const std::set<NodeId>& remaining) {
  std::map<NodeId, int> state;  // 1 = on stack, 2 = done
  std::vector<NodeId> stack;
  std::vector<NodeId> cycle;
  std::function<bool(NodeId)> dfs = [&](NodeId v) {
    state[v] = 1;
    stack.push_back(v);
    if (auto it = out.find(v); it != out.end()) {
      for (NodeId w : it->second) {
        if (!remaining.count(w)) continue;
        if (state[w] == 1) {
          auto start = std::find(stack.begin(), stack.end(), w);
          cycle.assign(start, stack.end());
          cycle.push_back(w);
          return true;
        }
        if (state[w] == 0 && dfs(w)) return true;
      }
    }
    stack.pop_back();
    state[v] = 2;
    return false;
  };
  for (NodeId v : remaining) {
    if (state[v] == 0 && dfs(v)) break;
  }
  return cycle;
}

}  // namespace

std::vector<NodeId> verify_dag(const FlowSubgraph& subgraph) {
  std::map<NodeId, std::vector<NodeId>> out;
  std::map<NodeId, std::size_t> indegree;
  for (NodeId v : subgraph.nodes()) indegree[v] = 0;
  for (const FlowEdge& e : subgraph.edges) {
    out[e.from].push_back(e.to);
    ++indegree[e.to];
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (auto [v, deg] : indegree) {
    if (deg == 0) ready.push(v);
  }
  std::vector<NodeId> order;
  order.reserve(indegree.size());
  while (!ready.empty()) {
    const NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (NodeId w : out[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  if (order.size() != indegree.size()) {
    std::set<NodeId> remaining;
    for (auto [v, deg] : indegree) {
      if (deg > 0) remaining.insert(v);
    }
    std::ostringstream msg;
    msg << "flow subgraph for sink " << subgraph.sink << " at lambda "
        << subgraph.lambda << " has a cycle:";
    for (NodeId v : find_cycle(out, remaining)) msg << ' ' << v;
    throw SolverError(msg.str());
  }
  return order;
}

std::map<NodeId, double> flow_imbalance(const FlowSubgraph& subgraph) {
  std::map<NodeId, double> balance;
  for (NodeId v : subgraph.nodes()) balance[v] = 0.0;
  for (const FlowEdge& e : subgraph.edges) {
    balance[e.to] += e.flow;
    balance[e.from] -= e.flow;
  }
  return balance;
}

std::string export_dot(const FlowSubgraph& subgraph, const DotOptions& options) {
  auto quoted = [](const std::string& text) {
    std::string out = "\"";
    for (char c : text) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  std::ostringstream out;
  out << "digraph " << quoted(options.graph_name) << " {\n";
  out << "  rankdir=TB;\n";
  out << "  node [shape=circle];\n";
  const auto order =
      subgraph.topo_order.empty() ? subgraph.nodes() : subgraph.topo_order;
  for (NodeId v : order) {
    const auto label = options.node_labels.find(v);
    out << "  " << v << " [label="
        << quoted(label == options.node_labels.end() ? std::to_string(v)
                                                      : label->second);
    switch (subgraph.role(v)) {
      case NodeRole::source: out << ", color=blue, penwidth=2"; break;
      case NodeRole::sink: out << ", color=red, penwidth=2"; break;
      case NodeRole::interior: break;
    }
    out << "];\n";
  }
  for (const FlowEdge& e : subgraph.edges) {
    const auto percent = static_cast<long long>(std::floor(100.0 * e.flow + 0.5));
    out << "  " << e.from << " -> " << e.to << " [label=\"" << percent << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_json(const FlowSubgraph& subgraph) {
  return detail::subgraph_json(subgraph).dump(1) + "\n";
}

FlowSubgraph subgraph_from_json(const std::string& text) {
  using nlohmann::json;
  try {
    const json doc = json::parse(text);
    FlowSubgraph g;
    g.sink = doc.at("sink").get<NodeId>();
    g.lambda = doc.at("lambda").get<double>();
    for (const json& e : doc.at("edges")) {
      g.edges.push_back({e.at("from").get<NodeId>(), e.at("to").get<NodeId>(),
                         e.at("flow").get<double>()});
    }
    for (const json& node : doc.at("nodes")) {
      if (node.at("role").get<std::string>() == "source") {
        g.sources.push_back({node.at("id").get<NodeId>(), node.at("weight").get<double>()});
      }
    }
    std::sort(g.sources.begin(), g.sources.end(),
              [](const FlowSource& a, const FlowSource& b) { return a.node < b.node; });
    g.topo_order = doc.at("topo_order").get<std::vector<NodeId>>();
    return g;
  } catch (const json::exception& err) {
    throw DataError(std::string("malformed subgraph JSON: ") + err.what());
  }
}

}  // namespace flowssl
