#pragma once

#include <Eigen/Core>
#include <optional>
#include <variant>
#include <vector>

#include "gtrs/canonical.hpp"
#include "gtrs/config.hpp"
#include "gtrs/problem.hpp"

namespace gtrs::reformulate {

/// Inequality preprocessing verdicts.
struct Proceed {};
struct Infeasible {
  double gap = 0.0;  ///< c - 1/2 b^T A^+ b > 0
};
/// The constraint collapses to an affine subspace; the problem restates as an
/// unconstrained quadratic over the null-space coordinates.
struct ReducedUnconstrained {
  Eigen::MatrixXd D_red;
  Eigen::VectorXd e_red;
  double constant = 0.0;     ///< objective value at the base point
  Eigen::VectorXd base;      ///< x0: feasible base point
  Eigen::MatrixXd basis;     ///< V: x = x0 + V y
};
using PreprocessResult = std::variant<Proceed, Infeasible, ReducedUnconstrained>;

/// Slater screen for the inequality kind: infeasible / boundary-degenerate /
/// proceed, per the semidefinite structure of the constraint.
PreprocessResult preprocess(const GtrsProblem& p, const Options& opt = {});

/// Minimize 1/2 y^T D y + e^T y + constant over all y. Returns the optimum
/// and a minimizer, or nullopt when unbounded below.
struct UnconstrainedOpt {
  double value;
  Eigen::VectorXd y;
};
std::optional<UnconstrainedOpt> minimize_unconstrained(
    const Eigen::MatrixXd& D, const Eigen::VectorXd& e, double constant,
    const Options& opt = {});

/// Coefficients of the separated problem over canonical coordinates:
/// scalar coordinates i = 1..l with objective delta_i/2 x_i^2 + e_i x_i and
/// constraint alpha_i/2 x_i^2 + b_i x_i; coupled pairs j with objective
/// zeta_j u_j v_j + 1/2 v_j^2 + e_even_j v_j and constraint u_j v_j, after
/// the constraint-side linear term on every pair was shifted away.
struct CanonicalProblem {
  int l = 0;  ///< number of scalar blocks
  std::vector<double> alpha, delta, b, e;       ///< scalar arrays, length l
  std::vector<double> zeta, e_even, e_odd, tau; ///< coupled arrays
  std::vector<double> b_zero, e_zero;           ///< zero-pair coordinates
  double c = 0.0;          ///< constraint constant after shifts
  double c0 = 0.0;         ///< -sum 1/2 e_even^2
  double obj_offset = 0.0; ///< accumulated objective constant from shifts

  struct BackMap {
    Eigen::MatrixXd S;                       ///< canonical -> original coordinates
    std::vector<std::array<double, 2>> pair_shift;  ///< subtract from (u,v) per pair
    int zero_count = 0;
  } back_map;

  int pairs() const { return static_cast<int>(zeta.size()); }
  int dim() const { return l + 2 * pairs() + back_map.zero_count; }
  /// Canonical coordinate vector from parts, in block order.
  Eigen::VectorXd assemble(const Eigen::VectorXd& x_scalar,
                           const std::vector<double>& u,
                           const std::vector<double>& v,
                           const Eigen::VectorXd& x_zero) const;
  double recompute_c0() const;
};

/// Builds the canonical-coordinate problem from a canonical form and the
/// transformed linear terms e_hat = S^T e, b_hat = S^T b, eliminating the
/// constraint-side linear term on every coupled pair and accounting the
/// constants exactly.
CanonicalProblem shift_cross_b(const canonical::CanonicalForm& cf,
                               const Eigen::VectorXd& e_hat,
                               const Eigen::VectorXd& b_hat, double c,
                               const Options& opt = {});

/// The conic view: minimize delta^T y + e^T x + zeta^T z + c0 subject to
/// alpha^T y + b^T x + 1^T z + c <= 0 (or = 0, or in [c1, c2]) and rotated
/// cone rows 1/2 x_i^2 <= y_i. Zero pairs are dropped from the variable set.
struct SocpProblem {
  int l = 0;
  std::vector<double> alpha, delta, b, e;
  std::vector<double> zeta;
  double c = 0.0;
  double c1 = 0.0, c2 = 0.0;
  double c0 = 0.0;
  double obj_offset = 0.0;
  ConstraintKind kind = ConstraintKind::Inequality;

  int pairs() const { return static_cast<int>(zeta.size()); }
  double objective(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& z) const;
  double constraint_lhs(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z) const;  ///< without constant
};

/// Copies the coefficient arrays into the conic form. Throws NumericalFailure
/// when a coupled block still carries an odd linear coefficient beyond
/// tolerance (that situation signals an unbounded problem upstream).
SocpProblem build_socp(const CanonicalProblem& cp, ConstraintKind kind,
                       const Options& opt = {});

/// A point of the conic problem with bookkeeping for the free linear (zero
/// pair) coordinates.
struct PrimalPoint {
  Eigen::VectorXd x, y;       ///< length l
  std::vector<double> z;      ///< per coupled pair
  Eigen::VectorXd x_zero;     ///< zero-pair coordinates
  double objective = 0.0;
  double constraint_value = 0.0;  ///< constraint lhs + c
};

struct RecoveredPoint {
  Eigen::VectorXd x;   ///< original coordinates
  bool attained = true;
  std::vector<int> unattained_blocks;
};

/// Maps a conic-problem point back to the original coordinates: cone-slack
/// coordinates are lifted to 1/2 x_i^2 = y_i with a sign search that keeps
/// the single linear constraint satisfied, coupled pairs are reconstructed
/// from their cross terms (escaping blocks use magnitude sqrt(1/(2 eps'))),
/// and everything is pushed through the back map.
RecoveredPoint recover_x(const PrimalPoint& point, const CanonicalProblem& cp,
                         ConstraintKind kind, double eps,
                         const Options& opt = {});

}  // namespace gtrs::reformulate
