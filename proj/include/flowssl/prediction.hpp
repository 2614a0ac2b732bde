#pragma once

#include "flowssl/subgraph.hpp"
#include "flowssl/weights.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace flowssl {

// Default lambda grid for model selection and explanation.
inline const std::vector<double> kDefaultLambdaGrid = {0.0, 0.025, 0.05, 0.1, 0.2};

struct SolveOptions {
  AdmmOptions admm;
  // Use the closed-form KKT solve for lambda = 0 on undirected graphs.
  bool exact_at_zero = true;
  // Worker threads for batch solves; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

// Owns a graph, its incidence system and the lazily built factorizations,
// and dispatches per-sink solves to the right solver. Safe to share across
// threads once constructed.
class FlowEngine {
 public:
  explicit FlowEngine(Graph graph, SolveOptions options = {});
  FlowEngine(const FlowEngine&) = delete;
  FlowEngine& operator=(const FlowEngine&) = delete;

  const Graph& graph() const { return graph_; }
  const IncidenceSystem& system() const { return *system_; }
  const SolveOptions& options() const { return options_; }

  // Throws on invalid input and on solver errors (disconnected graph,
  // infeasible directed problem). Unconverged ADMM runs come back flagged.
  FlowSolution solve(NodeId sink, double lambda) const;

  const CholeskyCache& admm_cache() const;
  const CholeskyCache& exact_cache() const;

 private:
  Graph graph_;
  SolveOptions options_;
  std::unique_ptr<IncidenceSystem> system_;
  mutable std::once_flag admm_once_;
  mutable std::once_flag exact_once_;
  mutable std::unique_ptr<CholeskyCache> admm_cache_;
  mutable std::unique_ptr<CholeskyCache> exact_cache_;
};

struct NodePrediction {
  NodeId node = 0;
  double value = 0.0;  // NaN when the solve failed
  WeightVector weights;
  double entropy = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string error;  // empty on success
};

struct PredictionReport {
  double lambda = 0.0;
  std::vector<NodeId> label_nodes;  // label-list order, indexes weights
  std::vector<NodePrediction> nodes;  // one per unlabeled node, ascending id

  std::size_t failures() const;
};

// Solves every unlabeled node with one shared factorization. Per-node
// failures are recorded in the report instead of aborting the batch.
PredictionReport predict_all(const FlowEngine& engine, double lambda);
PredictionReport predict_all(const Graph& graph, double lambda,
                             const SolveOptions& options = {});

struct PathEntry {
  double lambda = 0.0;
  FlowSolution solution;
  WeightVector weights;
  FlowSubgraph subgraph;
};

// One solve per lambda (ascending) with the shared factorization; each
// entry carries its support subgraph at threshold `eps`.
std::vector<PathEntry> regularization_path(const FlowEngine& engine, NodeId sink,
                                           const std::vector<double>& lambdas,
                                           double eps = kDefaultSupportEps);
std::vector<PathEntry> regularization_path(const Graph& graph, NodeId sink,
                                           const std::vector<double>& lambdas,
                                           const SolveOptions& options = {},
                                           double eps = kDefaultSupportEps);

// Sign rule for +-1 labels: f >= 0 maps to +1.
int classify(double value);

// Fraction of `truth` entries whose node is misclassified by `report`.
// Nodes absent from the report, or with failed solves, count as errors.
double misclassification_rate(const PredictionReport& report,
                              const std::vector<Label>& truth);

std::string report_to_json(const PredictionReport& report);

}  // namespace flowssl
