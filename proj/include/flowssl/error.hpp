#pragma once

#include <stdexcept>
#include <string>

namespace flowssl {

// Malformed input: bad files, violated graph invariants, bad arguments.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: singular systems, infeasible flows, unconverged solves.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Some unlabeled node has no path to any labeled node, so the reduced
// incidence product is singular.
class DisconnectedError : public SolverError {
 public:
  using SolverError::SolverError;
};

// Directed problem whose sink cannot be reached along edge directions.
class InfeasibleError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace flowssl
