#pragma once

#include "flowssl/datasets.hpp"
#include "flowssl/graph.hpp"

#include <cmath>
#include <functional>

namespace flowssl::testing {

// Path 0 - 1 - 2, unit costs, ends labeled -1 / +1.
inline Graph g1() {
  return Graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}, {{0, -1.0}, {2, 1.0}});
}

// Path 0 - 1 - 2 - 3, unit costs, ends labeled -1 / +1.
inline Graph g2() {
  return Graph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}, {{0, -1.0}, {3, 1.0}});
}

inline Graph random_graph(std::uint64_t seed, std::size_t nodes = 20,
                          std::size_t extra = 20, std::size_t labeled = 4) {
  return random_connected_graph(nodes, extra, labeled, 0.1, 10.0, seed);
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Golden-section minimization of a unimodal function on [lo, hi]. Test-side
// oracle for one-dimensional slices of the flow objective.
inline double golden_minimize(const std::function<double(double)>& f, double lo,
                              double hi, int iterations = 200) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  for (int i = 0; i < iterations; ++i) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - ratio * (b - a);
    d = a + ratio * (b - a);
  }
  return 0.5 * (a + b);
}

// G2 with sink 1: conservation forces x = (1 + t, t, t); this is the
// objective along that line.
inline double g2_objective(double t, double lambda) {
  return 0.5 * ((1 + t) * (1 + t) + 2 * t * t +
                lambda * (std::abs(1 + t) + 2 * std::abs(t)));
}

}  // namespace flowssl::testing
