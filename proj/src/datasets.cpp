#include "flowssl/datasets.hpp"

#include "flowssl/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace flowssl {

GaussianMixture two_gaussian_mixture(std::size_t points_per_class, std::size_t dim,
                                     double shift, std::size_t labels_per_class,
                                     std::uint64_t seed) {
  if (dim == 0 || points_per_class == 0) throw DataError("empty mixture");
  if (labels_per_class > points_per_class) {
    throw DataError("more labels than points per class");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GaussianMixture mix;
  const std::size_t n = 2 * points_per_class;
  mix.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  mix.classes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double cls = i < points_per_class ? -1.0 : 1.0;
    mix.classes[i] = cls;
    for (std::size_t c = 0; c < dim; ++c) {
      mix.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = normal(rng);
    }
    mix.points(static_cast<Eigen::Index>(i), 0) += cls * shift;
  }
  for (std::size_t cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> rows(points_per_class);
    std::iota(rows.begin(), rows.end(), cls * points_per_class);
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t i = 0; i < labels_per_class; ++i) {
      mix.labeled.push_back({rows[i], mix.classes[rows[i]]});
    }
  }
  return mix;
}

Graph learning_graph(const Eigen::MatrixXd& points, std::size_t k,
                     Normalization normalization, std::vector<Label> labels) {
  const Graph knn = build_knn_graph(points, k);
  const Graph costed = knn.with_costs(costs_from_laplacian(laplacian(knn, normalization), knn));
  return costed.with_labels(std::move(labels));
}

Graph random_connected_graph(std::size_t nodes, std::size_t extra_edges,
                             std::size_t labeled, double cost_min, double cost_max,
                             std::uint64_t seed) {
  if (nodes < 2 || labeled == 0 || labeled >= nodes) {
    throw DataError("random graph needs 2+ nodes and 1..n-1 labels");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cost(cost_min, cost_max);
  std::uniform_real_distribution<double> value(-1.0, 1.0);

  std::vector<NodeId> perm(nodes);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  std::set<std::pair<NodeId, NodeId>> used;
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < nodes; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    const NodeId a = perm[i];
    const NodeId b = perm[pick(rng)];
    used.insert(std::minmax(a, b));
    edges.push_back({a, b, cost(rng)});
  }
  const std::size_t max_edges = nodes * (nodes - 1) / 2;
  std::uniform_int_distribution<NodeId> any(0, nodes - 1);
  while (edges.size() < std::min(max_edges, nodes - 1 + extra_edges)) {
    const NodeId a = any(rng);
    const NodeId b = any(rng);
    if (a == b || !used.insert(std::minmax(a, b)).second) continue;
    edges.push_back({a, b, cost(rng)});
  }
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Label> labels;
  for (std::size_t i = 0; i < labeled; ++i) labels.push_back({perm[i], value(rng)});
  return Graph(nodes, std::move(edges), std::move(labels), false);
}

}  // namespace flowssl
