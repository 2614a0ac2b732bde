#include "flowssl/error.hpp"
#include "flowssl/flow_solver.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace flowssl {

namespace {

// Dual view of the flow problem with dense matrices. For a multiplier nu the
// Lagrangian minimizer is edge-separable:
//   undirected: x_e = S_a(g_e) / d_e,       a = lambda d_e / 2
//   directed:   x_e = max(g_e - a, 0) / d_e
// with g = A_u^T nu, and the dual is q(nu) = b^T nu - sum_e d_e x_e^2 / 2.
struct DualProblem {
  Eigen::MatrixXd a;   // A_u, dense
  Eigen::VectorXd b;
  Eigen::VectorXd d;
  Eigen::VectorXd offset;
  bool directed;

  Eigen::VectorXd flow(const Eigen::VectorXd& nu) const {
    const Eigen::VectorXd g = a.transpose() * nu;
    Eigen::VectorXd x(g.size());
    for (Eigen::Index e = 0; e < g.size(); ++e) {
      double shrunk = 0.0;
      if (g[e] > offset[e]) {
        shrunk = g[e] - offset[e];
      } else if (!directed && g[e] < -offset[e]) {
        shrunk = g[e] + offset[e];
      }
      x[e] = shrunk / d[e];
    }
    return x;
  }

  double value(const Eigen::VectorXd& nu) const {
    const Eigen::VectorXd x = flow(nu);
    return b.dot(nu) - 0.5 * (d.array() * x.array().square()).sum();
  }
};

}  // namespace

FlowSolution brute_force_oracle(const FlowProblem& problem) {
  const IncidenceSystem& system = problem.system();
  DualProblem dual{Eigen::MatrixXd(system.unlabeled_block()), problem.demand(),
                   system.costs(), system.costs() * (problem.lambda() / 2.0),
                   problem.directed()};
  const Eigen::Index rows = dual.a.rows();
  const double scale = 1.0 + (dual.a.cwiseAbs2() * dual.d.cwiseInverse()).maxCoeff();

  Eigen::VectorXd nu = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd x = dual.flow(nu);
  Eigen::VectorXd grad = dual.b - dual.a * x;
  double q = dual.value(nu);
  constexpr int kMaxIter = 2000;
  constexpr double kGradTol = 1e-13;
  int iter = 0;
  for (; iter < kMaxIter && grad.cwiseAbs().maxCoeff() > kGradTol; ++iter) {
    Eigen::VectorXd curvature(x.size());
    const Eigen::VectorXd g = dual.a.transpose() * nu;
    for (Eigen::Index e = 0; e < g.size(); ++e) {
      const bool active = g[e] > dual.offset[e] ||
                          (!dual.directed && g[e] < -dual.offset[e]);
      curvature[e] = active ? 1.0 / dual.d[e] : 0.0;
    }
    // Levenberg-style damping that fades as the gradient vanishes.
    const double damping =
        scale * std::clamp(grad.norm(), 1e-12, 1.0);
    Eigen::MatrixXd hessian = dual.a * curvature.asDiagonal() * dual.a.transpose();
    hessian.diagonal().array() += damping;
    const Eigen::VectorXd step = hessian.ldlt().solve(grad);
    const double slope = grad.dot(step);

    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 80; ++halving, t *= 0.5) {
      const Eigen::VectorXd trial = nu + t * step;
      const double q_trial = dual.value(trial);
      if (q_trial >= q + 1e-4 * t * slope) {
        nu = trial;
        q = q_trial;
        accepted = true;
        break;
      }
    }
    x = dual.flow(nu);
    grad = dual.b - dual.a * x;
    if (!accepted) break;
  }

  FlowSolution solution;
  solution.sink = problem.sink();
  solution.lambda = problem.lambda();
  solution.x = x;
  solution.z = x;
  solution.u = Eigen::VectorXd::Zero(x.size());
  solution.iterations = iter;
  solution.primal_residual = grad.cwiseAbs().maxCoeff();
  solution.converged = solution.primal_residual < 1e-10;
  solution.objective = problem.objective(x);
  if (solution.primal_residual > 0.5) {
    throw InfeasibleError("oracle: flow problem is infeasible (" +
                          solution.diagnostics() + ")");
  }
  return solution;
}

}  // namespace flowssl
