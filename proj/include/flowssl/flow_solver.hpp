#pragma once

#include "flowssl/graph.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <string>

namespace flowssl {

// Per-sink flow problem
//
//   minimize  1/2 sum_e d_e (x_e^2 + lambda |x_e|)   subject to  A_u x = b_p
//
// where b_p is zero except for -1 at the sink's row (unit in-flow). On a
// directed system the absolute value becomes x_e together with x >= 0.
class FlowProblem {
 public:
  // Throws DataError if `sink` is not an unlabeled node of `system` or
  // `lambda` is negative or not finite. `system` must outlive the problem.
  FlowProblem(const IncidenceSystem& system, NodeId sink, double lambda);

  const IncidenceSystem& system() const { return *system_; }
  NodeId sink() const { return sink_; }
  std::size_t sink_row() const { return sink_row_; }
  double lambda() const { return lambda_; }
  bool directed() const { return system_->directed(); }

  Eigen::VectorXd demand() const;  // b_p

  // 1/2 sum_e d_e (x_e^2 + lambda |x_e|)
  double objective(const Eigen::VectorXd& flow) const;

 private:
  const IncidenceSystem* system_;
  NodeId sink_;
  std::size_t sink_row_;
  double lambda_;
};

struct AdmmOptions {
  double rho = 1.0;
  double tol = 1e-6;
  int max_iter = 10000;

  void validate() const;  // throws DataError
};

// Cholesky factorization of A_u M A_u^T with M = diag(1 / (rho + d)).
// Only b_p differs between sinks, so one factorization serves every
// unlabeled node and every iteration. With rho = 0 this is A_u D^-1 A_u^T,
// the reduced Laplacian used by the closed-form lambda = 0 solve.
//
// Immutable after construction; concurrent solve() calls are safe.
class CholeskyCache {
 public:
  CholeskyCache(const IncidenceSystem& system, double rho);

  const IncidenceSystem& system() const { return *system_; }
  double rho() const { return rho_; }
  const Eigen::VectorXd& scaling() const { return scaling_; }  // diag(M)
  const SparseMatrix& normal_matrix() const { return normal_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  const IncidenceSystem* system_;
  double rho_;
  Eigen::VectorXd scaling_;
  SparseMatrix normal_;
  std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> factor_;
};

// Throws DisconnectedError when some unlabeled node has no path to a
// labeled node, and DataError when rho <= 0.
CholeskyCache factorize(const IncidenceSystem& system, double rho);
// The rho = 0 factorization used by solve_exact_lambda0.
CholeskyCache factorize_exact(const IncidenceSystem& system);

struct FlowSolution {
  NodeId sink = 0;
  double lambda = 0.0;
  Eigen::VectorXd x;  // last x-iterate, satisfies A_u x = b_p
  Eigen::VectorXd z;  // thresholded iterate, used for weights and support
  Eigen::VectorXd u;  // scaled dual
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;         // evaluated at z
  double primal_residual = 0.0;   // max |A_u z - b_p|
  double split_residual = 0.0;    // max |x - z| at the last iteration
  double change_residual = 0.0;   // max |z^{k+1} - z^k| at the last iteration

  std::string diagnostics() const;
};

// Closed-form KKT solution x = D^-1 A_u^T (A_u D^-1 A_u^T)^-1 b_p.
// Requires an undirected problem; lambda must be 0.
FlowSolution solve_exact_lambda0(const FlowProblem& problem);
FlowSolution solve_exact_lambda0(const FlowProblem& problem,
                                 const CholeskyCache& exact_cache);

// One equality-constrained x-update:
//   solve A_u M A_u^T y = rho A_u M (z - u) - b_p,
//   x = rho M (z - u) - M A_u^T y.
Eigen::VectorXd admm_step_x(const CholeskyCache& cache, const Eigen::VectorXd& z,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& demand);

// Componentwise (b - a)_+ - (-b - a)_+.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Per-edge shrink amounts d_e * lambda / (2 rho) for the z-update.
Eigen::VectorXd shrink_thresholds(const Eigen::VectorXd& costs, double lambda,
                                  double rho);

// ADMM on the undirected problem, from z = u = 0. Stops when both
// max |x - z| and max |z^{k+1} - z^k| fall below tol. Hitting max_iter
// returns the last iterate with converged = false.
FlowSolution admm_solve(const FlowProblem& problem, const CholeskyCache& cache,
                        const AdmmOptions& opts = {});

// ADMM on the directed problem (x >= 0) with the one-sided shrink
// z = max(x + u - d lambda / (2 rho), 0). Throws InfeasibleError when the
// sink is unreachable from every labeled node along edge directions, or
// when the primal residual never drops below 0.5.
FlowSolution admm_solve_directed(const FlowProblem& problem,
                                 const CholeskyCache& cache,
                                 const AdmmOptions& opts = {});

// Test oracle for small problems (m up to ~50). Maximizes the smooth
// Lagrange dual
//   q(nu) = b^T nu - sum_e phi_e((A_u^T nu)_e)
// by damped Newton ascent with dense linear algebra, then reads the primal
// flow off the dual. Shares no code with the ADMM path.
FlowSolution brute_force_oracle(const FlowProblem& problem);

}  // namespace flowssl
