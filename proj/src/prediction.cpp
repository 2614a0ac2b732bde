#include "flowssl/prediction.hpp"

#include "flowssl/error.hpp"
#include "json_support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace flowssl {

// ---------------------------------------------------------------------------
// Weights

WeightVector weights_from_flow(const FlowSolution& solution,
                               const IncidenceSystem& system) {
  if (!solution.converged) {
    throw SolverError("cannot read weights from an unconverged solve: " +
                      solution.diagnostics());
  }
  Eigen::VectorXd w = system.labeled_block() * solution.z;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] < -1e-8) {
      throw SolverError("negative weight " + std::to_string(w[i]) +
                        " on labeled node " +
                        std::to_string(system.labeled_nodes()[static_cast<std::size_t>(i)]) +
                        ": " + solution.diagnostics());
    }
    if (w[i] < 0.0) w[i] = 0.0;
  }
  const double total = w.sum();
  if (!(total > 0.0)) {
    throw SolverError("weights sum to zero: " + solution.diagnostics());
  }
  return {solution.sink, solution.lambda, w / total};
}

double predict(const WeightVector& weights, std::span<const double> labels) {
  return predict(weights, Eigen::Map<const Eigen::VectorXd>(
                              labels.data(), static_cast<Eigen::Index>(labels.size())));
}

double predict(const WeightVector& weights, const Eigen::VectorXd& labels) {
  if (labels.size() != weights.weights.size()) {
    throw DataError("weight/label length mismatch");
  }
  return weights.weights.dot(labels);
}

double weight_entropy(const WeightVector& weights) {
  double h = 0.0;
  for (double w : weights.weights) {
    if (w > 0.0) h -= w * std::log(w);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Engine

FlowEngine::FlowEngine(Graph graph, SolveOptions options)
    : graph_(std::move(graph)),
      options_(options),
      system_(std::make_unique<IncidenceSystem>(graph_)) {
  options_.admm.validate();
}

const CholeskyCache& FlowEngine::admm_cache() const {
  std::call_once(admm_once_, [this] {
    admm_cache_ = std::make_unique<CholeskyCache>(factorize(*system_, options_.admm.rho));
  });
  return *admm_cache_;
}

const CholeskyCache& FlowEngine::exact_cache() const {
  std::call_once(exact_once_, [this] {
    exact_cache_ = std::make_unique<CholeskyCache>(factorize_exact(*system_));
  });
  return *exact_cache_;
}

FlowSolution FlowEngine::solve(NodeId sink, double lambda) const {
  const FlowProblem problem(*system_, sink, lambda);
  if (problem.directed()) {
    return admm_solve_directed(problem, admm_cache(), options_.admm);
  }
  if (lambda == 0.0 && options_.exact_at_zero) {
    return solve_exact_lambda0(problem, exact_cache());
  }
  return admm_solve(problem, admm_cache(), options_.admm);
}

// ---------------------------------------------------------------------------
// Batch prediction

std::size_t PredictionReport::failures() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const NodePrediction& p) { return !p.error.empty(); }));
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

}  // namespace

PredictionReport predict_all(const FlowEngine& engine, double lambda) {
  if (!(lambda >= 0.0)) throw DataError("lambda must be non-negative");
  const IncidenceSystem& system = engine.system();
  PredictionReport report;
  report.lambda = lambda;
  report.label_nodes = system.labeled_nodes();
  const auto& sinks = system.unlabeled_nodes();
  report.nodes.resize(sinks.size());
  if (sinks.empty()) return report;

  // Build the shared factorization up front so a disconnected graph fails
  // the whole batch once instead of once per node.
  if (system.directed() || lambda > 0.0 || !engine.options().exact_at_zero) {
    engine.admm_cache();
  } else {
    engine.exact_cache();
  }

  parallel_for(sinks.size(), engine.options().threads, [&](std::size_t i) {
    NodePrediction& out = report.nodes[i];
    out.node = sinks[i];
    out.value = std::numeric_limits<double>::quiet_NaN();
    try {
      const FlowSolution solution = engine.solve(sinks[i], lambda);
      out.iterations = solution.iterations;
      out.converged = solution.converged;
      out.weights = weights_from_flow(solution, system);
      out.value = predict(out.weights, system.label_values());
      out.entropy = weight_entropy(out.weights);
    } catch (const std::exception& err) {
      out.error = err.what();
    }
  });
  return report;
}

PredictionReport predict_all(const Graph& graph, double lambda,
                             const SolveOptions& options) {
  const FlowEngine engine(graph, options);
  return predict_all(engine, lambda);
}

std::vector<PathEntry> regularization_path(const FlowEngine& engine, NodeId sink,
                                           const std::vector<double>& lambdas,
                                           double eps) {
  if (!std::is_sorted(lambdas.begin(), lambdas.end())) {
    throw DataError("lambda grid must be sorted ascending");
  }
  std::vector<PathEntry> path;
  path.reserve(lambdas.size());
  for (double lambda : lambdas) {
    PathEntry entry;
    entry.lambda = lambda;
    entry.solution = engine.solve(sink, lambda);
    entry.weights = weights_from_flow(entry.solution, engine.system());
    entry.subgraph = extract_support(entry.solution, engine.system(), eps);
    path.push_back(std::move(entry));
  }
  return path;
}

std::vector<PathEntry> regularization_path(const Graph& graph, NodeId sink,
                                           const std::vector<double>& lambdas,
                                           const SolveOptions& options, double eps) {
  const FlowEngine engine(graph, options);
  return regularization_path(engine, sink, lambdas, eps);
}

// ---------------------------------------------------------------------------
// Evaluation

int classify(double value) { return value >= 0.0 ? 1 : -1; }

double misclassification_rate(const PredictionReport& report,
                              const std::vector<Label>& truth) {
  if (truth.empty()) throw DataError("no ground-truth labels to score against");
  std::size_t wrong = 0;
  for (const Label& t : truth) {
    const auto it = std::lower_bound(
        report.nodes.begin(), report.nodes.end(), t.node,
        [](const NodePrediction& p, NodeId node) { return p.node < node; });
    if (it == report.nodes.end() || it->node != t.node || !it->error.empty() ||
        classify(it->value) != classify(t.value)) {
      ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

std::string report_to_json(const PredictionReport& report) {
  return detail::report_json(report).dump(1) + "\n";
}

}  // namespace flowssl
