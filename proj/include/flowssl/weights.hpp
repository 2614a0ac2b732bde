#pragma once

#include "flowssl/flow_solver.hpp"

#include <span>

namespace flowssl {

// Prediction weights w(p) = A_l z: the out-flow drawn from each labeled
// node, in label-list order. Nonnegative and summing to one.
struct WeightVector {
  NodeId sink = 0;
  double lambda = 0.0;
  Eigen::VectorXd weights;
};

// Entries in [-1e-8, 0) are clamped to zero and the vector is renormalized
// to sum 1. Throws SolverError for unconverged solutions or larger
// negative weights.
WeightVector weights_from_flow(const FlowSolution& solution,
                               const IncidenceSystem& system);

// f(p) = sum_i w_i(p) f(i)
double predict(const WeightVector& weights, std::span<const double> labels);
double predict(const WeightVector& weights, const Eigen::VectorXd& labels);

// -sum_i w_i log w_i (natural log, 0 log 0 = 0).
double weight_entropy(const WeightVector& weights);

}  // namespace flowssl
