#pragma once

#include <cstdint>

namespace gtrs {

/// Numerical knobs shared by the whole solver stack. Defaults are tuned for
/// double precision and dense problems up to a few hundred variables.
struct Options {
  double tol_sym = 1e-10;      ///< relative symmetry check on inputs
  double tol_eig = 1e-10;      ///< eigen/pinv truncation, relative
  double tol_rank = 1e-10;     ///< numerical rank cutoff, relative
  double tol_cluster = 1e-7;   ///< eigenvalue clustering width
  double tol_dual = 1e-10;     ///< relative tolerance on the dual multiplier
  double tol_feas = 1e-8;      ///< feasibility slack accepted on recovered points
  double tol_zero = 1e-9;      ///< "coefficient is zero" decisions
  double cond_warn = 1e10;     ///< condition estimate that triggers a warning
  double eps = 1e-6;           ///< budget for epsilon-solutions of unattained problems
  int dual_max_iter = 200;     ///< iteration cap for the 1-D dual maximization
  double dual_expand_cap = 1e12;  ///< bracket expansion cap before declaring anomaly
  std::uint64_t seed = 0x5eed5eedULL;  ///< seed for randomized probes
  bool squaring_for_linear_equality = false;  ///< alternate route for A=0 equality constraints
};

}  // namespace gtrs
