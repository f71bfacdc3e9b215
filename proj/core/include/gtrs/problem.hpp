#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtrs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimensions, symmetry, empty intervals, unknown kinds.
struct InvalidInput : Error {
  using Error::Error;
};

/// A numerical consistency check failed (recovery mismatch, stalled
/// reduction, inconsistent rank decisions).
struct NumericalFailure : Error {
  using Error::Error;
};

/// A module's applicability assumption does not hold for the given data.
struct NotApplicable : Error {
  using Error::Error;
};

enum class ConstraintKind { Inequality, Equality, Interval };

std::string to_string(ConstraintKind kind);

/// Quadratic program data: minimize 1/2 x^T D x + e^T x subject to one
/// quadratic constraint 1/2 x^T A x + b^T x {<=,=} -constant ... concretely
///   inequality:  1/2 x^T A x + b^T x + c <= 0
///   equality:    1/2 x^T A x + b^T x + c  = 0
///   interval:    c1 <= 1/2 x^T A x + b^T x <= c2
struct GtrsProblem {
  Eigen::MatrixXd D;  ///< objective matrix
  Eigen::VectorXd e;  ///< objective linear term
  Eigen::MatrixXd A;  ///< constraint matrix
  Eigen::VectorXd b;  ///< constraint linear term
  double c = 0.0;     ///< constraint constant (inequality / equality)
  double c1 = 0.0;    ///< interval lower bound
  double c2 = 0.0;    ///< interval upper bound
  ConstraintKind kind = ConstraintKind::Inequality;

  int dim() const { return static_cast<int>(D.rows()); }
  double objective(const Eigen::VectorXd& x) const;
  /// Value of 1/2 x^T A x + b^T x + c (the interval kind has c = 0).
  double constraint(const Eigen::VectorXd& x) const;
  bool feasible(const Eigen::VectorXd& x, double tol) const;

  /// Throws InvalidInput unless dimensions agree and both matrices are
  /// symmetric within tol_sym (relative). Symmetrizes in place when the
  /// asymmetry is within tolerance; reports via `warnings` if non-null.
  void validate(double tol_sym, std::vector<std::string>* warnings = nullptr);
};

enum class SolveStatus {
  Optimal,
  Unbounded,
  Infeasible,
  FiniteUnattained,
  ReducedUnconstrained,
};

std::string to_string(SolveStatus status);

/// Summary of one canonical block, for certificates and reports.
struct BlockSummary {
  std::string type;  ///< "scalar", "coupled", "zero"
  int size = 1;
  double alpha = 0.0;  ///< scalar blocks: constraint-side coefficient (+1/0/-1)
  double delta = 0.0;  ///< scalar blocks: objective-side coefficient
  double tau = 0.0;    ///< coupled blocks: sign
  double kappa = 0.0;  ///< coupled blocks: eigenvalue
};

struct Classification {
  bool unbounded = false;
  std::vector<std::string> reasons;    ///< e.g. "ComplexPair", "UnequalZetas"
  std::vector<std::string> case_tags;  ///< per coupled block: "Case1"/"Case3"/"Deferred"
};

struct AssumptionReport {
  bool feasible = true;
  bool two_side_slater = false;
  bool a_is_zero = false;
  bool degenerate_equality = false;
  std::string action;  ///< "none", "null_space_reduction", "squaring"
};

struct SolveCertificate {
  double nu = 0.0;                 ///< optimal multiplier (single-constraint duals)
  double nu_lo = 0.0, nu_hi = 0.0; ///< interval duals: multipliers of the two sides
  bool has_nu = false;
  double dual_domain_lo = 0.0, dual_domain_hi = 0.0;
  std::vector<int> dual_active;  ///< scalar rows with vanishing dual denominator
  std::vector<BlockSummary> blocks;
  Classification classification;
  AssumptionReport assumptions;
  std::vector<std::string> warnings;
  int dual_iterations = 0;
};

struct Solution {
  SolveStatus status = SolveStatus::Optimal;
  double value = 0.0;    ///< +inf for Infeasible, -inf for Unbounded
  Eigen::VectorXd x;     ///< optimizer when attained; empty otherwise
  /// Defined for FiniteUnattained: maps eps > 0 to a feasible point whose
  /// objective is within eps of `value`.
  std::function<Eigen::VectorXd(double)> epsilon_solution;
  SolveCertificate certificate;

  bool has_point() const { return x.size() > 0; }
};

/// Paper-style sign convention used across the module boundaries:
/// sign(0) = +1.
inline double signum(double x) { return x >= 0.0 ? 1.0 : -1.0; }

}  // namespace gtrs
