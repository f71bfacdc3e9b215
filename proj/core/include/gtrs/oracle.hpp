#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "gtrs/problem.hpp"

namespace gtrs::oracle {

struct OracleConfig {
  double radius = 8.0;          ///< grid box half-width
  int resolution = 0;           ///< points per axis; 0 = auto from dimension
  int refinement_rounds = 60;   ///< exact line-minimization sweeps
  double equality_band = 0.05;  ///< |h| acceptance band for the grid stage
  std::uint64_t seed = 12345;
};

/// Grid + exact-line-search minimizer used to validate the solver at desk
/// scale. Never claims global optimality: compare one-sidedly.
struct OracleResult {
  double value;
  Eigen::VectorXd argmin;
  std::string coverage;       ///< grid/refinement summary
  double steepest_found;      ///< best value seen on eigen-direction rays
};

/// Exhaustive grid over [-r, r]^n filtered by the constraint, then repeated
/// exact one-dimensional minimizations along coordinate, gradient, eigen and
/// random directions from the best grid points (both f and h restricted to a
/// line are quadratics, so each step is solved in closed form). Throws
/// InvalidInput when n > 8.
OracleResult brute_force_min(const GtrsProblem& p, const OracleConfig& cfg = {});

}  // namespace gtrs::oracle
