#include "flowssl/flow_solver.hpp"

#include "flowssl/error.hpp"

#include <cmath>
#include <deque>
#include <sstream>

namespace flowssl {

namespace {

// Nodes reachable from the labeled set; `follow_direction` restricts moves
// to tail -> head.
std::vector<bool> reachable_from_labels(const IncidenceSystem& system,
                                        bool follow_direction) {
  const std::size_t n = system.node_count();
  std::vector<std::vector<NodeId>> adjacency(n);
  for (const Edge& e : system.orientation()) {
    adjacency[e.tail].push_back(e.head);
    if (!follow_direction) adjacency[e.head].push_back(e.tail);
  }
  std::vector<bool> seen(n, false);
  std::deque<NodeId> queue;
  for (NodeId v : system.labeled_nodes()) {
    seen[v] = true;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (NodeId w : adjacency[v]) {
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

double max_abs(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

// ---------------------------------------------------------------------------

FlowProblem::FlowProblem(const IncidenceSystem& system, NodeId sink, double lambda)
    : system_(&system), sink_(sink), sink_row_(0), lambda_(lambda) {
  const auto row = system.unlabeled_row(sink);
  if (!row) {
    throw DataError("sink " + std::to_string(sink) +
                    (sink < system.node_count() ? " is a labeled node"
                                                : " is not a node"));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DataError("lambda must be a finite non-negative number");
  }
  sink_row_ = *row;
}

Eigen::VectorXd FlowProblem::demand() const {
  Eigen::VectorXd b =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system_->unlabeled_count()));
  b[static_cast<Eigen::Index>(sink_row_)] = -1.0;
  return b;
}

double FlowProblem::objective(const Eigen::VectorXd& flow) const {
  const Eigen::VectorXd& d = system_->costs();
  return 0.5 * (d.array() * (flow.array().square() + lambda_ * flow.array().abs()))
                   .sum();
}

void AdmmOptions::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DataError("rho must be positive");
  if (!(tol > 0.0)) throw DataError("tol must be positive");
  if (max_iter < 1) throw DataError("max_iter must be at least 1");
}

// ---------------------------------------------------------------------------

CholeskyCache::CholeskyCache(const IncidenceSystem& system, double rho)
    : system_(&system), rho_(rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw DataError("rho must be non-negative");
  }
  const auto seen = reachable_from_labels(system, false);
  for (NodeId v : system.unlabeled_nodes()) {
    if (!seen[v]) {
      throw DisconnectedError("unlabeled component disconnected from labels (node " +
                              std::to_string(v) + ")");
    }
  }
  scaling_ = (system.costs().array() + rho).inverse().matrix();
  const SparseMatrix& au = system.unlabeled_block();
  const SparseMatrix scaled = au * scaling_.asDiagonal();
  normal_ = SparseMatrix(scaled * au.transpose());
  auto factor = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>();
  factor->compute(normal_);
  if (factor->info() != Eigen::Success) {
    throw DisconnectedError(
        "A_u M A_u^T is not positive definite: unlabeled component "
        "disconnected from labels");
  }
  factor_ = std::move(factor);
}

Eigen::VectorXd CholeskyCache::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != normal_.rows()) {
    throw DataError("right-hand side has " + std::to_string(rhs.size()) +
                    " entries, expected " + std::to_string(normal_.rows()));
  }
  return factor_->solve(rhs);
}

CholeskyCache factorize(const IncidenceSystem& system, double rho) {
  if (!(rho > 0.0)) throw DataError("rho must be positive");
  return CholeskyCache(system, rho);
}

CholeskyCache factorize_exact(const IncidenceSystem& system) {
  return CholeskyCache(system, 0.0);
}

std::string FlowSolution::diagnostics() const {
  std::ostringstream out;
  out << "sink " << sink << ", lambda " << lambda << ": "
      << (converged ? "converged" : "not converged") << " after " << iterations
      << " iterations (max|x-z| = " << split_residual
      << ", max|dz| = " << change_residual
      << ", max|A_u z - b| = " << primal_residual << ")";
  return out.str();
}

// ---------------------------------------------------------------------------

FlowSolution solve_exact_lambda0(const FlowProblem& problem) {
  return solve_exact_lambda0(problem, factorize_exact(problem.system()));
}

FlowSolution solve_exact_lambda0(const FlowProblem& problem,
                                 const CholeskyCache& exact_cache) {
  if (problem.directed()) {
    throw DataError("closed-form solve applies to undirected problems only");
  }
  if (problem.lambda() != 0.0) {
    throw DataError("closed-form solve requires lambda = 0");
  }
  if (exact_cache.rho() != 0.0 || &exact_cache.system() != &problem.system()) {
    throw DataError("closed-form solve needs the rho = 0 factorization of the same system");
  }
  const SparseMatrix& au = problem.system().unlabeled_block();
  const Eigen::VectorXd b = problem.demand();
  const Eigen::VectorXd y = exact_cache.solve(b);
  FlowSolution solution;
  solution.sink = problem.sink();
  solution.lambda = 0.0;
  solution.x = exact_cache.scaling().asDiagonal() * (au.transpose() * y);
  solution.z = solution.x;
  solution.u = Eigen::VectorXd::Zero(solution.x.size());
  solution.converged = true;
  solution.objective = problem.objective(solution.z);
  solution.primal_residual = max_abs(au * solution.z - b);
  return solution;
}

Eigen::VectorXd admm_step_x(const CholeskyCache& cache, const Eigen::VectorXd& z,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& demand) {
  const SparseMatrix& au = cache.system().unlabeled_block();
  if (z.size() != au.cols() || u.size() != au.cols() || demand.size() != au.rows()) {
    throw DataError("admm_step_x: dimension mismatch");
  }
  const Eigen::VectorXd& m = cache.scaling();
  const Eigen::VectorXd pulled = cache.rho() * m.cwiseProduct(z - u);
  const Eigen::VectorXd y = cache.solve(au * pulled - demand);
  return pulled - m.cwiseProduct(au.transpose() * y);
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (b - a).cwiseMax(0.0) - (-b - a).cwiseMax(0.0);
}

Eigen::VectorXd shrink_thresholds(const Eigen::VectorXd& costs, double lambda,
                                  double rho) {
  return costs * (lambda / (2.0 * rho));
}

namespace {

enum class Shrink { two_sided, nonnegative };

FlowSolution run_admm(const FlowProblem& problem, const CholeskyCache& cache,
                      const AdmmOptions& opts, Shrink shrink) {
  opts.validate();
  if (&cache.system() != &problem.system() || cache.rho() != opts.rho) {
    throw DataError("factorization does not match the problem's system and rho");
  }
  const auto m = static_cast<Eigen::Index>(problem.system().edge_count());
  const Eigen::VectorXd b = problem.demand();
  const Eigen::VectorXd threshold =
      shrink_thresholds(problem.system().costs(), problem.lambda(), opts.rho);

  FlowSolution s;
  s.sink = problem.sink();
  s.lambda = problem.lambda();
  s.z = Eigen::VectorXd::Zero(m);
  s.u = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd z_next(m);
  for (int k = 1; k <= opts.max_iter; ++k) {
    s.x = admm_step_x(cache, s.z, s.u, b);
    const Eigen::VectorXd v = s.x + s.u;
    if (shrink == Shrink::two_sided) {
      z_next = soft_threshold(threshold, v);
    } else {
      z_next = (v - threshold).cwiseMax(0.0);
    }
    s.u += s.x - z_next;
    s.split_residual = max_abs(s.x - z_next);
    s.change_residual = max_abs(z_next - s.z);
    s.z.swap(z_next);
    s.iterations = k;
    if (s.split_residual < opts.tol && s.change_residual < opts.tol) {
      s.converged = true;
      break;
    }
  }
  s.objective = problem.objective(s.z);
  s.primal_residual = max_abs(problem.system().unlabeled_block() * s.z - b);
  return s;
}

}  // namespace

FlowSolution admm_solve(const FlowProblem& problem, const CholeskyCache& cache,
                        const AdmmOptions& opts) {
  if (problem.directed()) {
    throw DataError("admm_solve expects an undirected problem; use admm_solve_directed");
  }
  return run_admm(problem, cache, opts, Shrink::two_sided);
}

FlowSolution admm_solve_directed(const FlowProblem& problem,
                                 const CholeskyCache& cache,
                                 const AdmmOptions& opts) {
  if (!problem.directed()) {
    throw DataError("admm_solve_directed expects a directed problem");
  }
  if (!reachable_from_labels(problem.system(), true)[problem.sink()]) {
    throw InfeasibleError("sink " + std::to_string(problem.sink()) +
                          " is unreachable from every labeled node along edge "
                          "directions");
  }
  FlowSolution s = run_admm(problem, cache, opts, Shrink::nonnegative);
  if (!s.converged && s.primal_residual >= 0.5) {
    throw InfeasibleError("directed flow problem looks infeasible: " + s.diagnostics());
  }
  return s;
}

}  // namespace flowssl
