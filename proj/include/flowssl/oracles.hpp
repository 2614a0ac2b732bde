#pragma once

#include "flowssl/graph.hpp"

#include <vector>

namespace flowssl {

// Closed-form baselines used to cross-check the flow solver. They run on
// dense matrices and never touch the incidence/Cholesky path.
//
// Both quadratic methods minimize the edge objective
//   sum over ordered pairs (i, j) of -L_ij (f_i - f_j)^2,
// which only sees the symmetrized off-diagonal (L_ij + L_ji) / 2. For a
// normalized Laplacian the solves therefore use the unnormalized Laplacian
// of those symmetrized weights; for L = Deg - W this is L itself.

// Dense Laplacian with symmetrized off-diagonals and zero row sums.
Eigen::MatrixXd objective_laplacian(const Laplacian& laplacian);

struct LinearSystemSolve {
  std::vector<NodeId> unlabeled;  // ascending ids, indexes the vectors below
  Eigen::MatrixXd l_uu;
  Eigen::VectorXd rhs;       // -L_ul f_l
  Eigen::VectorXd solution;  // f_u
  double residual = 0.0;     // max |L_uu f_u + L_ul f_l|
};

// Harmonic extension f_u = -L_uu^-1 L_ul f_l. Throws SolverError when
// L_uu is singular.
LinearSystemSolve hf_solve(const Laplacian& laplacian, const std::vector<Label>& labels);

// Minimizer over all nodes of
//   mu^-1 sum_labeled (f_i - f(i))^2 + sum over ordered pairs -L_ij (f_i - f_j)^2,
// i.e. the solution of (2 L + mu^-1 P) f = mu^-1 P y.
Eigen::VectorXd lr_solve(const Laplacian& laplacian, const std::vector<Label>& labels,
                         double mu);

struct NearestLabel {
  NodeId node = 0;
  double distance = 0.0;
};

// Dijkstra over edge costs along edge directions (both ways when
// undirected): the labeled node closest to `sink`. Equal distances go to the
// smaller node id. Throws SolverError when no labeled node reaches `sink`.
NearestLabel nearest_labeled(const Graph& graph, NodeId sink);

// Shortest-path distance from every labeled node to `sink`, in label-list
// order; unreachable entries are +infinity.
std::vector<double> labeled_distances(const Graph& graph, NodeId sink);

}  // namespace flowssl
