#pragma once

#include "flowssl/graph.hpp"

#include <cstdint>
#include <vector>

namespace flowssl {

// Two unit-covariance Gaussians in `dim` dimensions, shifted by -shift and
// +shift along the first axis; the first half of the rows belongs to the
// left (-1) class. `labels_per_class` points of each class are chosen at
// random as labeled.
struct GaussianMixture {
  Eigen::MatrixXd points;
  std::vector<double> classes;  // -1 or +1 per row
  std::vector<Label> labeled;   // class -1 picks first, then class +1
};

GaussianMixture two_gaussian_mixture(std::size_t points_per_class, std::size_t dim,
                                     double shift, std::size_t labels_per_class,
                                     std::uint64_t seed);

// Graph with the flow costs used for learning: kNN graph, Laplacian of the
// given normalization, then d_ij = -2 / (L_ij + L_ji).
Graph learning_graph(const Eigen::MatrixXd& points, std::size_t k,
                     Normalization normalization, std::vector<Label> labels);

// Connected undirected graph: a random spanning tree plus `extra_edges`
// random chords, costs uniform in [cost_min, cost_max], and a random set of
// `labeled` nodes labeled with values uniform in [-1, 1].
Graph random_connected_graph(std::size_t nodes, std::size_t extra_edges,
                             std::size_t labeled, double cost_min, double cost_max,
                             std::uint64_t seed);

}  // namespace flowssl
