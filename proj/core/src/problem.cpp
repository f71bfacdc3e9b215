#include "gtrs/problem.hpp"

#include <cmath>

namespace gtrs {

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::Inequality: return "ineq";
    case ConstraintKind::Equality: return "eq";
    case ConstraintKind::Interval: return "interval";
  }
  return "?";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::FiniteUnattained: return "finite_unattained";
    case SolveStatus::ReducedUnconstrained: return "reduced_unconstrained";
  }
  return "?";
}

double GtrsProblem::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(D * x) + e.dot(x);
}

double GtrsProblem::constraint(const Eigen::VectorXd& x) const {
  double quad = 0.5 * x.dot(A * x) + b.dot(x);
  return kind == ConstraintKind::Interval ? quad : quad + c;
}

bool GtrsProblem::feasible(const Eigen::VectorXd& x, double tol) const {
  double h = constraint(x);
  double scale = 1.0 + std::abs(c) + std::abs(c1) + std::abs(c2);
  switch (kind) {
    case ConstraintKind::Inequality: return h <= tol * scale;
    case ConstraintKind::Equality: return std::abs(h) <= tol * scale;
    case ConstraintKind::Interval:
      return h >= c1 - tol * scale && h <= c2 + tol * scale;
  }
  return false;
}

namespace {

void check_symmetric(Eigen::MatrixXd& M, const char* name, double tol,
                     std::vector<std::string>* warnings) {
  if (M.rows() != M.cols()) {
    throw InvalidInput(std::string(name) + " must be square");
  }
  double scale = std::max(1.0, M.norm());
  double asym = (M - M.transpose()).norm();
  if (asym > tol * scale) {
    // Mild asymmetry is symmetrized with a warning; gross asymmetry is an
    // input error.
    if (asym > 1e-6 * scale) {
      throw InvalidInput(std::string(name) + " is not symmetric (|M - M^T| = " +
                         std::to_string(asym) + ")");
    }
    if (warnings) {
      warnings->push_back(std::string(name) + " symmetrized, asymmetry " +
                          std::to_string(asym));
    }
  }
  M = ((M + M.transpose()) * 0.5).eval();
}

}  // namespace

void GtrsProblem::validate(double tol_sym, std::vector<std::string>* warnings) {
  check_symmetric(D, "D", tol_sym, warnings);
  check_symmetric(A, "A", tol_sym, warnings);
  if (A.rows() != D.rows()) {
    throw InvalidInput("A and D must have the same dimension");
  }
  if (e.size() != D.rows() || b.size() != D.rows()) {
    throw InvalidInput("linear terms must match the matrix dimension");
  }
  if (kind == ConstraintKind::Interval && c1 > c2) {
    throw InvalidInput("empty interval: c1 > c2");
  }
}

}  // namespace gtrs
