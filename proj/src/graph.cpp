#include "flowssl/graph.hpp"

#include "flowssl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>

namespace flowssl {

namespace {

std::string edge_name(const Edge& e) {
  return "(" + std::to_string(e.tail) + ", " + std::to_string(e.head) + ")";
}

}  // namespace

Graph::Graph(std::size_t node_count, std::vector<Edge> edges,
             std::vector<Label> labels, bool directed)
    : node_count_(node_count),
      edges_(std::move(edges)),
      labels_(std::move(labels)),
      directed_(directed),
      slot_of_node_(node_count, -1) {
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Edge& e : edges_) {
    if (e.tail >= node_count_ || e.head >= node_count_) {
      throw DataError("edge " + edge_name(e) + " references a node outside 0.." +
                      std::to_string(node_count_ == 0 ? 0 : node_count_ - 1));
    }
    if (e.tail == e.head) {
      throw DataError("self-loop at node " + std::to_string(e.tail));
    }
    if (!(e.cost > 0.0) || !std::isfinite(e.cost)) {
      throw DataError("edge " + edge_name(e) + " has non-positive cost " +
                      std::to_string(e.cost));
    }
    const std::pair<NodeId, NodeId> key =
        directed_ ? std::make_pair(e.tail, e.head)
                  : std::make_pair(std::min(e.tail, e.head), std::max(e.tail, e.head));
    if (!seen.insert(key).second) {
      throw DataError("duplicate edge " + edge_name(e));
    }
  }
  for (std::size_t slot = 0; slot < labels_.size(); ++slot) {
    const Label& label = labels_[slot];
    if (label.node >= node_count_) {
      throw DataError("label references unknown node " +
                      std::to_string(label.node));
    }
    if (!std::isfinite(label.value)) {
      throw DataError("label of node " + std::to_string(label.node) +
                      " is not finite");
    }
    if (slot_of_node_[label.node] != -1) {
      throw DataError("node " + std::to_string(label.node) +
                      " is labeled twice");
    }
    slot_of_node_[label.node] = static_cast<std::ptrdiff_t>(slot);
  }
}

bool Graph::is_labeled(NodeId node) const {
  return node < node_count_ && slot_of_node_[node] >= 0;
}

std::optional<std::size_t> Graph::label_slot(NodeId node) const {
  if (!is_labeled(node)) return std::nullopt;
  return static_cast<std::size_t>(slot_of_node_[node]);
}

std::vector<double> Graph::label_values() const {
  std::vector<double> values;
  values.reserve(labels_.size());
  for (const Label& label : labels_) values.push_back(label.value);
  return values;
}

std::vector<NodeId> Graph::unlabeled_nodes() const {
  std::vector<NodeId> nodes;
  nodes.reserve(unlabeled_count());
  for (NodeId v = 0; v < node_count_; ++v) {
    if (slot_of_node_[v] < 0) nodes.push_back(v);
  }
  return nodes;
}

Graph Graph::with_costs(std::span<const double> costs) const {
  if (costs.size() != edges_.size()) {
    throw DataError("cost vector has " + std::to_string(costs.size()) +
                    " entries for " + std::to_string(edges_.size()) + " edges");
  }
  std::vector<Edge> edges = edges_;
  for (std::size_t e = 0; e < edges.size(); ++e) edges[e].cost = costs[e];
  return Graph(node_count_, std::move(edges), labels_, directed_);
}

Graph Graph::with_labels(std::vector<Label> labels) const {
  return Graph(node_count_, edges_, std::move(labels), directed_);
}

Canonicalized canonicalize(const Graph& graph) {
  const std::size_t n = graph.node_count();
  std::vector<NodeId> old_to_new(n);
  NodeId next = 0;
  for (const Label& label : graph.labels()) old_to_new[label.node] = next++;
  for (NodeId v : graph.unlabeled_nodes()) old_to_new[v] = next++;

  std::vector<Edge> edges;
  edges.reserve(graph.edge_count());
  for (const Edge& e : graph.edges()) {
    edges.push_back({old_to_new[e.tail], old_to_new[e.head], e.cost});
  }
  std::vector<Label> labels;
  labels.reserve(graph.labeled_count());
  for (const Label& label : graph.labels()) {
    labels.push_back({old_to_new[label.node], label.value});
  }
  return {Graph(n, std::move(edges), std::move(labels), graph.directed()),
          std::move(old_to_new)};
}

// ---------------------------------------------------------------------------
// kNN construction

double rbf_similarity(double squared_distance, double sigma) {
  const double s = std::exp(-squared_distance / (2.0 * sigma * sigma));
  // Far-apart pairs underflow; keep the cost 1/s finite.
  return std::max(s, std::numeric_limits<double>::min());
}

namespace {

// Row-wise neighbor lists sorted by (distance, index), excluding self.
std::vector<std::vector<std::pair<double, std::size_t>>> sorted_neighbors(
    const Eigen::MatrixXd& points) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::vector<std::pair<double, std::size_t>>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = neighbors[i];
    row.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double sq = (points.row(static_cast<Eigen::Index>(i)) -
                         points.row(static_cast<Eigen::Index>(j)))
                            .squaredNorm();
      row.emplace_back(sq, j);
    }
    std::sort(row.begin(), row.end());
  }
  return neighbors;
}

double sigma_from_neighbors(
    const std::vector<std::vector<std::pair<double, std::size_t>>>& neighbors,
    std::size_t k, const SigmaRule& rule) {
  if (rule.fixed) {
    if (!(*rule.fixed > 0.0)) throw DataError("fixed sigma must be positive");
    return *rule.fixed;
  }
  const std::size_t available = neighbors.empty() ? 0 : neighbors[0].size();
  std::size_t rank = rule.neighbor_rank;
  if (rank > available) rank = (k + 1) / 2;
  rank = std::clamp<std::size_t>(rank, 1, available);
  double total = 0.0;
  for (const auto& row : neighbors) total += std::sqrt(row[rank - 1].first);
  const double sigma =
      rule.scale * total / static_cast<double>(neighbors.size());
  if (!(sigma > 0.0)) {
    throw DataError("RBF bandwidth is zero: all points coincide with their " +
                    std::to_string(rank) + "-th neighbor");
  }
  return sigma;
}

void check_knn_args(std::size_t n, std::size_t k) {
  if (k == 0) throw DataError("k must be positive");
  if (k >= n) {
    throw DataError("k = " + std::to_string(k) + " needs at least " +
                    std::to_string(k + 1) + " points, got " +
                    std::to_string(n));
  }
}

}  // namespace

double rbf_sigma(const Eigen::MatrixXd& points, std::size_t k,
                 const SigmaRule& rule) {
  check_knn_args(static_cast<std::size_t>(points.rows()), k);
  return sigma_from_neighbors(sorted_neighbors(points), k, rule);
}

Graph build_knn_graph(const Eigen::MatrixXd& points, std::size_t k,
                      const SigmaRule& rule) {
  const auto n = static_cast<std::size_t>(points.rows());
  check_knn_args(n, k);
  const auto neighbors = sorted_neighbors(points);
  const double sigma = sigma_from_neighbors(neighbors, k, rule);

  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < k; ++r) {
      pairs.insert(std::minmax(i, neighbors[i][r].second));
    }
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    const double sq = (points.row(static_cast<Eigen::Index>(i)) -
                       points.row(static_cast<Eigen::Index>(j)))
                          .squaredNorm();
    edges.push_back({i, j, 1.0 / rbf_similarity(sq, sigma)});
  }
  return Graph(n, std::move(edges), {}, false);
}

Graph build_knn_graph(const std::vector<std::vector<double>>& points,
                      std::size_t k, const SigmaRule& rule) {
  if (points.empty()) throw DataError("point cloud is empty");
  const std::size_t dim = points.front().size();
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(points.size()),
                         static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim) {
      throw DataError("point " + std::to_string(i) + " has dimension " +
                      std::to_string(points[i].size()) + ", expected " +
                      std::to_string(dim));
    }
    for (std::size_t c = 0; c < dim; ++c) {
      matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          points[i][c];
    }
  }
  return build_knn_graph(matrix, k, rule);
}

// ---------------------------------------------------------------------------
// Laplacians

std::string_view to_string(Normalization normalization) {
  switch (normalization) {
    case Normalization::unnormalized: return "unnorm";
    case Normalization::symmetric: return "sym";
    case Normalization::markov: return "markov";
  }
  return "unknown";
}

Normalization parse_normalization(std::string_view text) {
  if (text == "unnorm" || text == "unnormalized") return Normalization::unnormalized;
  if (text == "sym" || text == "symmetric") return Normalization::symmetric;
  if (text == "markov") return Normalization::markov;
  throw DataError("unknown normalization '" + std::string(text) +
                  "' (expected unnorm, sym or markov)");
}

Laplacian laplacian(const Graph& graph, Normalization normalization) {
  if (graph.directed()) {
    throw DataError("Laplacian requires an undirected graph");
  }
  const std::size_t n = graph.node_count();
  std::vector<double> degree(n, 0.0);
  for (const Edge& e : graph.edges()) {
    degree[e.tail] += 1.0 / e.cost;
    degree[e.head] += 1.0 / e.cost;
  }
  for (NodeId v = 0; v < n; ++v) {
    if (degree[v] == 0.0) {
      throw DataError("node " + std::to_string(v) + " is isolated");
    }
  }

  auto scale = [&](NodeId i, NodeId j) {
    switch (normalization) {
      case Normalization::unnormalized: return 1.0;
      case Normalization::symmetric: return 1.0 / std::sqrt(degree[i] * degree[j]);
      case Normalization::markov: return 1.0 / degree[i];
    }
    return 1.0;
  };

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n + 2 * graph.edge_count());
  for (NodeId v = 0; v < n; ++v) {
    const double diag =
        normalization == Normalization::unnormalized ? degree[v] : 1.0;
    triplets.emplace_back(v, v, diag);
  }
  for (const Edge& e : graph.edges()) {
    const double w = 1.0 / e.cost;
    triplets.emplace_back(e.tail, e.head, -w * scale(e.tail, e.head));
    triplets.emplace_back(e.head, e.tail, -w * scale(e.head, e.tail));
  }
  Laplacian result{SparseMatrix(static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(n)),
                   normalization};
  result.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return result;
}

std::vector<double> costs_from_laplacian(const Laplacian& laplacian,
                                         const Graph& graph) {
  std::vector<double> costs;
  costs.reserve(graph.edge_count());
  for (const Edge& e : graph.edges()) {
    const auto i = static_cast<Eigen::Index>(e.tail);
    const auto j = static_cast<Eigen::Index>(e.head);
    const double sum = laplacian.matrix.coeff(i, j) + laplacian.matrix.coeff(j, i);
    if (!(sum < 0.0)) {
      throw DataError("L_ij + L_ji = " + std::to_string(sum) + " on edge " +
                      edge_name(e) + " is not negative");
    }
    costs.push_back(-2.0 / sum);
  }
  return costs;
}

// ---------------------------------------------------------------------------
// Incidence matrices

IncidenceSystem::IncidenceSystem(const Graph& graph)
    : node_count_(graph.node_count()),
      directed_(graph.directed()),
      unlabeled_row_(graph.node_count(), -1) {
  const std::size_t m = graph.edge_count();
  for (const Label& label : graph.labels()) labeled_nodes_.push_back(label.node);
  unlabeled_nodes_ = graph.unlabeled_nodes();
  const std::vector<double> values = graph.label_values();
  label_values_ = Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  for (std::size_t r = 0; r < unlabeled_nodes_.size(); ++r) {
    unlabeled_row_[unlabeled_nodes_[r]] = static_cast<std::ptrdiff_t>(r);
  }

  costs_.resize(static_cast<Eigen::Index>(m));
  orientation_.reserve(m);
  std::vector<Eigen::Triplet<double>> labeled_triplets;
  std::vector<Eigen::Triplet<double>> unlabeled_triplets;
  auto place = [&](NodeId node, std::size_t column, double sign) {
    if (auto slot = graph.label_slot(node)) {
      labeled_triplets.emplace_back(*slot, column, sign);
    } else {
      unlabeled_triplets.emplace_back(unlabeled_row_[node], column, sign);
    }
  };
  for (std::size_t e = 0; e < m; ++e) {
    Edge oriented = graph.edges()[e];
    if (!directed_ && oriented.tail > oriented.head) {
      std::swap(oriented.tail, oriented.head);
    }
    orientation_.push_back(oriented);
    costs_[static_cast<Eigen::Index>(e)] = oriented.cost;
    place(oriented.tail, e, +1.0);
    place(oriented.head, e, -1.0);
  }
  labeled_.resize(static_cast<Eigen::Index>(labeled_nodes_.size()),
                  static_cast<Eigen::Index>(m));
  labeled_.setFromTriplets(labeled_triplets.begin(), labeled_triplets.end());
  unlabeled_.resize(static_cast<Eigen::Index>(unlabeled_nodes_.size()),
                    static_cast<Eigen::Index>(m));
  unlabeled_.setFromTriplets(unlabeled_triplets.begin(),
                             unlabeled_triplets.end());
}

std::optional<std::size_t> IncidenceSystem::unlabeled_row(NodeId node) const {
  if (node >= node_count_ || unlabeled_row_[node] < 0) return std::nullopt;
  return static_cast<std::size_t>(unlabeled_row_[node]);
}

SparseMatrix IncidenceSystem::stacked() const {
  const Eigen::Index nl = labeled_.rows();
  SparseMatrix result(static_cast<Eigen::Index>(node_count_), labeled_.cols());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(labeled_.nonZeros() + unlabeled_.nonZeros()));
  for (Eigen::Index c = 0; c < labeled_.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(labeled_, c); it; ++it) {
      triplets.emplace_back(it.row(), it.col(), it.value());
    }
    for (SparseMatrix::InnerIterator it(unlabeled_, c); it; ++it) {
      triplets.emplace_back(nl + it.row(), it.col(), it.value());
    }
  }
  result.setFromTriplets(triplets.begin(), triplets.end());
  return result;
}

// ---------------------------------------------------------------------------
// Transforms

Graph add_anchor_nodes(const Graph& graph, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw DataError("anchor strength mu must be positive, got " +
                    std::to_string(mu));
  }
  if (graph.labeled_count() == 0) {
    throw DataError("anchor transform needs at least one labeled node");
  }
  const std::size_t n = graph.node_count();
  std::vector<Edge> edges = graph.edges();
  std::vector<Label> anchors;
  anchors.reserve(graph.labeled_count());
  for (std::size_t slot = 0; slot < graph.labeled_count(); ++slot) {
    const Label& label = graph.labels()[slot];
    const NodeId anchor = n + slot;
    // similarity 1/(2 mu)
    edges.push_back({label.node, anchor, 2.0 * mu});
    anchors.push_back({anchor, label.value});
  }
  return Graph(n + graph.labeled_count(), std::move(edges), std::move(anchors),
               graph.directed());
}

Graph to_directed(const Graph& graph, const EdgeMultiplier& multiplier) {
  if (graph.directed()) throw DataError("graph is already directed");
  std::vector<Edge> edges;
  edges.reserve(2 * graph.edge_count());
  auto scaled = [&](Edge e) {
    if (multiplier) {
      const double factor = multiplier(e);
      if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw DataError("edge multiplier for " + edge_name(e) +
                        " is not positive: " + std::to_string(factor));
      }
      e.cost *= factor;
    }
    return e;
  };
  for (const Edge& e : graph.edges()) {
    edges.push_back(scaled(e));
    edges.push_back(scaled({e.head, e.tail, e.cost}));
  }
  return Graph(graph.node_count(), std::move(edges), graph.labels(), true);
}

}  // namespace flowssl
