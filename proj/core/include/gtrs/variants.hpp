#pragma once

#include "gtrs/config.hpp"
#include "gtrs/problem.hpp"

namespace gtrs::variants {

/// Equality-constrained solve. A = 0 constraints are reduced by null-space
/// substitution of the linear equality (optionally cross-validated by the
/// squaring route, see Options), degenerate constraints by the same
/// reduction as the inequality preprocessor; everything else runs the shared
/// pipeline with a free-sign multiplier.
Solution solve_eq(const GtrsProblem& p, const Options& opt = {});

/// Interval-constrained solve: interior stationary-point candidate first,
/// then the two one-sided duals. Throws InvalidInput when c1 > c2.
Solution solve_interval(const GtrsProblem& p, const Options& opt = {});

/// The assumption screen shared by the variants: feasibility, two-side
/// Slater, A = 0, degeneracy. Exact tests via inertia plus range residuals.
AssumptionReport check_assumptions(const GtrsProblem& p, const Options& opt = {});

}  // namespace gtrs::variants
