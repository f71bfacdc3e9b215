#pragma once

#include <Eigen/Core>
#include <optional>

#include "gtrs/config.hpp"
#include "gtrs/problem.hpp"

namespace gtrs::slemma {

/// Does h(x) <= 0 (or = 0, or c1 <= h <= c2) imply f(x) >= 0, where
/// f(x) = 1/2 x^T D x + e^T x + v?
struct SLemmaQuery {
  Eigen::MatrixXd D;
  Eigen::VectorXd e;
  double v = 0.0;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double c = 0.0;
  double c1 = 0.0, c2 = 0.0;
  ConstraintKind kind = ConstraintKind::Inequality;
};

struct SLemmaVerdict {
  bool holds = false;
  std::optional<double> multiplier;   ///< mu >= 0 (free sign for equality)
  std::optional<Eigen::VectorXd> witness;  ///< feasible x with f(x) < 0
  double min_value = 0.0;  ///< v(min f over the constraint set)
};

/// Decides the implication by the value test v(min f) >= 0, computed with the
/// matching solver entry point; certificates come from the dual multiplier or
/// from the recovered (possibly epsilon-) minimizer. Throws NotApplicable
/// when the corresponding Slater-type assumption fails.
SLemmaVerdict s_lemma(const SLemmaQuery& q, const Options& opt = {});

}  // namespace gtrs::slemma
