#pragma once

#include "gtrs/config.hpp"
#include "gtrs/problem.hpp"
#include "gtrs/reformulate.hpp"

namespace gtrs {

/// Entry point: dispatches on the constraint kind.
Solution solve(const GtrsProblem& p, const Options& opt = {});

/// Inequality-constrained pipeline:
/// preprocess -> canonicalize -> shift -> screen -> dual -> recover.
Solution solve_inequality(const GtrsProblem& p, const Options& opt = {});

/// Classification-only run: canonical structure, boundedness screen and case
/// tags, no dual solve. `classification.unbounded` is conclusive only for
/// structural reasons; PossiblyBounded problems still need the dual.
struct ClassifyOutput {
  Classification classification;
  std::vector<BlockSummary> blocks;
  std::vector<std::string> warnings;
};
ClassifyOutput classify_problem(const GtrsProblem& p, const Options& opt = {});

/// Canonical-coordinate conic form of the problem, for export. Throws
/// NumericalFailure when the structural screen already proves the objective
/// unbounded (there is no conic form to emit then).
reformulate::SocpProblem conic_form(const GtrsProblem& p, const Options& opt = {});

}  // namespace gtrs
