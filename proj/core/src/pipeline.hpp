#pragma once

// Internal pipeline stages shared by the inequality solver and the
// constraint-kind variants. Not installed.

#include <optional>
#include <string>
#include <vector>

#include "gtrs/canonical.hpp"
#include "gtrs/classify.hpp"
#include "gtrs/config.hpp"
#include "gtrs/problem.hpp"
#include "gtrs/reformulate.hpp"

namespace gtrs::detail {

struct StructuralStage {
  bool unbounded = false;
  Classification classification;
  std::vector<BlockSummary> blocks;
  std::vector<std::string> warnings;
  std::optional<canonical::CanonicalForm> cf;
  std::optional<reformulate::CanonicalProblem> cp;
};

/// Canonicalize, shift the pair linear terms, tag every coupled block and
/// collect all structural unboundedness reasons. Assumes the caller already
/// established feasibility and the matching Slater condition.
StructuralStage run_structural(const GtrsProblem& p, ConstraintKind kind,
                               const Options& opt);

/// Dual solve + recovery for the single-constraint kinds (inequality and
/// equality).
Solution run_conic_pipeline(const GtrsProblem& p, ConstraintKind kind,
                            StructuralStage&& st, AssumptionReport assumptions,
                            const Options& opt);

std::vector<BlockSummary> summarize_blocks(const canonical::CanonicalForm& cf);

Solution unbounded_solution(StructuralStage&& st, AssumptionReport assumptions);

}  // namespace gtrs::detail
