#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace flowssl {

using NodeId = std::size_t;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct Edge {
  NodeId tail = 0;
  NodeId head = 0;
  double cost = 1.0;  // dissimilarity d_e; the similarity is 1 / cost

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Label {
  NodeId node = 0;
  double value = 0.0;

  friend bool operator==(const Label&, const Label&) = default;
};

// Weighted graph with a labeled/unlabeled node partition.
//
// Node ids are 0..n-1 and stay stable through every transform in this
// library. The canonical "labeled first" ordering needed for the incidence
// blocks lives in IncidenceSystem, which orders its rows as the labeled
// nodes in label-list order followed by the unlabeled nodes in id order.
class Graph {
 public:
  Graph() = default;

  // Throws DataError when an invariant is violated: non-positive or
  // non-finite cost, out-of-range id, self-loop, duplicate edge (unordered
  // pair when undirected, ordered pair when directed), duplicate labeled
  // node, or non-finite label value.
  Graph(std::size_t node_count, std::vector<Edge> edges,
        std::vector<Label> labels, bool directed = false);

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t labeled_count() const { return labels_.size(); }
  std::size_t unlabeled_count() const { return node_count_ - labels_.size(); }
  bool directed() const { return directed_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Label>& labels() const { return labels_; }

  bool is_labeled(NodeId node) const;
  // Position of `node` in the label list.
  std::optional<std::size_t> label_slot(NodeId node) const;
  std::vector<double> label_values() const;
  std::vector<NodeId> unlabeled_nodes() const;

  // Same topology and labels with per-edge costs replaced.
  Graph with_costs(std::span<const double> costs) const;
  Graph with_labels(std::vector<Label> labels) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.node_count_ == b.node_count_ && a.directed_ == b.directed_ &&
           a.edges_ == b.edges_ && a.labels_ == b.labels_;
  }

 private:
  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<Label> labels_;
  bool directed_ = false;
  std::vector<std::ptrdiff_t> slot_of_node_;
};

// Renumbers nodes so labeled nodes occupy 0..n_l-1 in label-list order and
// unlabeled nodes follow in increasing id order. `old_to_new[i]` is the new
// id of old node i.
struct Canonicalized {
  Graph graph;
  std::vector<NodeId> old_to_new;
};
Canonicalized canonicalize(const Graph& graph);

// ---------------------------------------------------------------------------
// kNN construction

// Bandwidth rule for the Gaussian RBF exp(-dist^2 / (2 sigma^2)).
// By default sigma is a third of the mean distance from a point to its
// 10th nearest neighbor; when a point has fewer than 10 neighbors the rank
// falls back to ceil(k/2).
struct SigmaRule {
  std::size_t neighbor_rank = 10;
  double scale = 1.0 / 3.0;
  std::optional<double> fixed;  // bypasses the data-driven rule
};

double rbf_similarity(double squared_distance, double sigma);

double rbf_sigma(const Eigen::MatrixXd& points, std::size_t k,
                 const SigmaRule& rule = {});

// Symmetrized (union) k-nearest-neighbor graph over the rows of `points`,
// with edge cost 1 / similarity. Neighbor ties are broken by smaller index.
// The returned graph carries no labels.
Graph build_knn_graph(const Eigen::MatrixXd& points, std::size_t k,
                      const SigmaRule& rule = {});
Graph build_knn_graph(const std::vector<std::vector<double>>& points,
                      std::size_t k, const SigmaRule& rule = {});

// ---------------------------------------------------------------------------
// Laplacians

enum class Normalization { unnormalized, symmetric, markov };

std::string_view to_string(Normalization normalization);
// Accepts "unnorm", "sym", "markov" and the long enum names.
Normalization parse_normalization(std::string_view text);

struct Laplacian {
  SparseMatrix matrix;  // n x n, row-major semantics (row i = node i)
  Normalization normalization = Normalization::unnormalized;
};

// Laplacian of the similarity matrix W with W_ij = 1 / cost_ij.
// Throws DataError for directed graphs and for isolated nodes.
Laplacian laplacian(const Graph& graph, Normalization normalization);

// Per-edge costs d_ij = -2 / (L_ij + L_ji), in graph edge order.
// Throws DataError if L_ij + L_ji >= 0 on any edge.
std::vector<double> costs_from_laplacian(const Laplacian& laplacian,
                                         const Graph& graph);

// ---------------------------------------------------------------------------
// Incidence matrices

// Signed incidence matrix split into labeled and unlabeled row blocks.
// Column e has +1 at the tail row and -1 at the head row. Undirected edges
// are oriented from the smaller to the larger node id; directed edges keep
// their stored direction.
class IncidenceSystem {
 public:
  explicit IncidenceSystem(const Graph& graph);

  const SparseMatrix& labeled_block() const { return labeled_; }
  const SparseMatrix& unlabeled_block() const { return unlabeled_; }
  const Eigen::VectorXd& costs() const { return costs_; }
  const std::vector<Edge>& orientation() const { return orientation_; }
  bool directed() const { return directed_; }

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return orientation_.size(); }
  std::size_t labeled_count() const { return labeled_nodes_.size(); }
  std::size_t unlabeled_count() const { return unlabeled_nodes_.size(); }

  const std::vector<NodeId>& labeled_nodes() const { return labeled_nodes_; }
  const std::vector<NodeId>& unlabeled_nodes() const { return unlabeled_nodes_; }
  const Eigen::VectorXd& label_values() const { return label_values_; }

  // Row of `node` inside the unlabeled block, if it is unlabeled.
  std::optional<std::size_t> unlabeled_row(NodeId node) const;

  // Stacked [A_l; A_u] with rows in canonical order.
  SparseMatrix stacked() const;

 private:
  std::size_t node_count_ = 0;
  bool directed_ = false;
  SparseMatrix labeled_;
  SparseMatrix unlabeled_;
  Eigen::VectorXd costs_;
  std::vector<Edge> orientation_;
  std::vector<NodeId> labeled_nodes_;
  std::vector<NodeId> unlabeled_nodes_;
  Eigen::VectorXd label_values_;
  std::vector<std::ptrdiff_t> unlabeled_row_;
};

// ---------------------------------------------------------------------------
// Transforms

// Soft-label transform: each labeled node i gets an anchor node (id n + slot)
// joined to i by an edge of similarity 1 / (2 mu), i.e. cost 2 mu. Anchors
// carry the labels; the original labeled nodes become unlabeled.
Graph add_anchor_nodes(const Graph& graph, double mu);

// Multiplier applied to a directed copy of an edge (tail -> head, base cost).
using EdgeMultiplier = std::function<double(const Edge&)>;

// Doubles every undirected edge {i, j} into i->j and j->i, at positions 2e
// and 2e+1, with cost d * multiplier(direction). Throws DataError when the
// graph is already directed or a multiplier is not positive and finite.
Graph to_directed(const Graph& graph, const EdgeMultiplier& multiplier = {});

}  // namespace flowssl
