#include "flowssl/oracles.hpp"

#include "flowssl/error.hpp"

#include <Eigen/LU>

#include <cmath>
#include <functional>
#include <limits>
#include <queue>

namespace flowssl {

Eigen::MatrixXd objective_laplacian(const Laplacian& laplacian) {
  const Eigen::MatrixXd dense(laplacian.matrix);
  Eigen::MatrixXd sym = 0.5 * (dense + dense.transpose());
  sym.diagonal().setZero();
  sym.diagonal() = -sym.rowwise().sum();
  return sym;
}

namespace {

void check_labels(const std::vector<Label>& labels, Eigen::Index n) {
  if (labels.empty()) throw DataError("at least one labeled node is required");
  for (const Label& label : labels) {
    if (static_cast<Eigen::Index>(label.node) >= n) {
      throw DataError("label references unknown node " + std::to_string(label.node));
    }
  }
}

}  // namespace

LinearSystemSolve hf_solve(const Laplacian& laplacian, const std::vector<Label>& labels) {
  const Eigen::MatrixXd l = objective_laplacian(laplacian);
  const Eigen::Index n = l.rows();
  check_labels(labels, n);

  std::vector<bool> labeled(static_cast<std::size_t>(n), false);
  for (const Label& label : labels) labeled[label.node] = true;
  LinearSystemSolve out;
  for (Eigen::Index v = 0; v < n; ++v) {
    if (!labeled[static_cast<std::size_t>(v)]) out.unlabeled.push_back(static_cast<NodeId>(v));
  }
  const auto nu = static_cast<Eigen::Index>(out.unlabeled.size());
  out.l_uu.resize(nu, nu);
  out.rhs = Eigen::VectorXd::Zero(nu);
  for (Eigen::Index r = 0; r < nu; ++r) {
    const auto row = static_cast<Eigen::Index>(out.unlabeled[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < nu; ++c) {
      out.l_uu(r, c) = l(row, static_cast<Eigen::Index>(out.unlabeled[static_cast<std::size_t>(c)]));
    }
    for (const Label& label : labels) {
      out.rhs[r] -= l(row, static_cast<Eigen::Index>(label.node)) * label.value;
    }
  }
  if (nu == 0) {
    out.solution.resize(0);
    return out;
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(out.l_uu);
  if (!lu.isInvertible()) {
    throw SolverError("singular L_uu: an unlabeled component has no labeled node");
  }
  out.solution = lu.solve(out.rhs);
  out.residual = (out.l_uu * out.solution - out.rhs).cwiseAbs().maxCoeff();
  return out;
}

Eigen::VectorXd lr_solve(const Laplacian& laplacian, const std::vector<Label>& labels,
                         double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DataError("mu must be positive");
  const Eigen::MatrixXd l = objective_laplacian(laplacian);
  check_labels(labels, l.rows());
  Eigen::MatrixXd system = 2.0 * l;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(l.rows());
  for (const Label& label : labels) {
    const auto i = static_cast<Eigen::Index>(label.node);
    system(i, i) += 1.0 / mu;
    rhs[i] += label.value / mu;
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) {
    throw SolverError("singular LR system: a component has no labeled node");
  }
  return lu.solve(rhs);
}

std::vector<double> labeled_distances(const Graph& graph, NodeId sink) {
  if (sink >= graph.node_count()) {
    throw DataError("unknown node " + std::to_string(sink));
  }
  // Search backwards from the sink: an edge tail -> head is walked head to tail.
  std::vector<std::vector<std::pair<NodeId, double>>> reverse(graph.node_count());
  for (const Edge& e : graph.edges()) {
    reverse[e.head].emplace_back(e.tail, e.cost);
    if (!graph.directed()) reverse[e.tail].emplace_back(e.head, e.cost);
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(graph.node_count(), kInf);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[sink] = 0.0;
  queue.emplace(0.0, sink);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (const auto& [w, cost] : reverse[v]) {
      if (d + cost < dist[w]) {
        dist[w] = d + cost;
        queue.emplace(dist[w], w);
      }
    }
  }
  std::vector<double> out;
  out.reserve(graph.labeled_count());
  for (const Label& label : graph.labels()) out.push_back(dist[label.node]);
  return out;
}

NearestLabel nearest_labeled(const Graph& graph, NodeId sink) {
  const auto dist = labeled_distances(graph, sink);
  const auto& labels = graph.labels();
  bool found = false;
  NearestLabel best;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(dist[i])) continue;
    if (!found || dist[i] < best.distance ||
        (dist[i] == best.distance && labels[i].node < best.node)) {
      best = {labels[i].node, dist[i]};
      found = true;
    }
  }
  if (!found) {
    throw SolverError("node " + std::to_string(sink) +
                      " is unreachable from every labeled node");
  }
  return best;
}

}  // namespace flowssl
