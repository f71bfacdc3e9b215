#include "gtrs/variants.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gtrs/classify.hpp"
#include "gtrs/dual.hpp"
#include "gtrs/linalg.hpp"
#include "gtrs/reformulate.hpp"
#include "gtrs/solver.hpp"
#include "pipeline.hpp"

namespace gtrs::variants {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConstraintShape {
  bool psd = false, nsd = false;
  bool b_in_range = false;
  double stat = 0.0;  ///< c - 1/2 b^T A^+ b where defined
};

ConstraintShape analyze_constraint(const GtrsProblem& p, const Options& opt) {
  ConstraintShape cs;
  auto ed = linalg::sym_eig(p.A, opt);
  double scale = std::max(1.0, ed.eigenvalues.cwiseAbs().maxCoeff());
  cs.psd = ed.eigenvalues.minCoeff() >= -opt.tol_eig * scale;
  cs.nsd = ed.eigenvalues.maxCoeff() <= opt.tol_eig * scale;
  cs.b_in_range = linalg::in_range(p.A, p.b, opt.tol_eig);
  if (cs.b_in_range) {
    MatrixXd pinv = linalg::pseudoinverse(p.A, opt);
    cs.stat = p.c - 0.5 * p.b.dot(pinv * p.b);
  }
  return cs;
}

/// Minimize f over the affine manifold {x : A (x + A^+ b) = 0} (the
/// degenerate feasible set shared by the boundary cases).
Solution solve_on_null_manifold(const GtrsProblem& p, AssumptionReport ar,
                                const Options& opt) {
  MatrixXd pinv = linalg::pseudoinverse(p.A, opt);
  VectorXd base = -pinv * p.b;
  MatrixXd basis = linalg::null_space_basis(p.A, opt.tol_rank);
  MatrixXd D_red = basis.transpose() * p.D * basis;
  VectorXd e_red = basis.transpose() * (p.D * base + p.e);
  auto m = reformulate::minimize_unconstrained(D_red, e_red,
                                               p.objective(base), opt);
  Solution sol;
  ar.degenerate_equality = true;
  ar.action = "null_space_reduction";
  sol.certificate.assumptions = ar;
  if (!m) {
    sol.status = SolveStatus::Unbounded;
    sol.value = -kInf;
    sol.certificate.classification.unbounded = true;
    sol.certificate.classification.reasons.push_back(
        "objective unbounded on the boundary set");
    return sol;
  }
  sol.status = SolveStatus::ReducedUnconstrained;
  sol.value = m->value;
  sol.x = base + basis * m->y;
  return sol;
}

/// Minimize f over the hyperplane b^T x + c = 0 (A = 0 constraints).
Solution solve_on_hyperplane(const GtrsProblem& p, AssumptionReport ar,
                             const Options& opt) {
  VectorXd base = -(p.c / p.b.squaredNorm()) * p.b;
  MatrixXd basis = linalg::null_space_basis(p.b.transpose(), opt.tol_rank);
  MatrixXd D_red = basis.transpose() * p.D * basis;
  VectorXd e_red = basis.transpose() * (p.D * base + p.e);
  auto m = reformulate::minimize_unconstrained(D_red, e_red,
                                               p.objective(base), opt);
  Solution sol;
  ar.a_is_zero = true;
  ar.action = "null_space_reduction";
  sol.certificate.assumptions = ar;
  if (!m) {
    sol.status = SolveStatus::Unbounded;
    sol.value = -kInf;
    sol.certificate.classification.unbounded = true;
    sol.certificate.classification.reasons.push_back(
        "objective unbounded on the constraint hyperplane");
    return sol;
  }
  sol.status = SolveStatus::ReducedUnconstrained;
  sol.value = m->value;
  sol.x = base + basis * m->y;
  return sol;
}

Solution infeasible_solution(AssumptionReport ar) {
  Solution sol;
  sol.status = SolveStatus::Infeasible;
  sol.value = kInf;
  ar.feasible = false;
  sol.certificate.assumptions = ar;
  return sol;
}

void resolve_deferred_tags(Classification& cls, const std::vector<int>& unatt) {
  for (size_t j = 0; j < cls.case_tags.size(); ++j) {
    if (cls.case_tags[j] == "Deferred") {
      bool bad = std::find(unatt.begin(), unatt.end(), static_cast<int>(j)) !=
                 unatt.end();
      cls.case_tags[j] = bad ? "Case2" : "Case1";
    }
  }
}

}  // namespace

AssumptionReport check_assumptions(const GtrsProblem& p, const Options& opt) {
  AssumptionReport ar;
  ar.action = "none";
  ar.a_is_zero = p.A.norm() <= opt.tol_zero * std::max(1.0, p.D.norm());
  ConstraintShape cs = analyze_constraint(p, opt);
  double tol = opt.tol_zero * (1.0 + std::abs(p.c));
  bool semidef = (cs.psd || cs.nsd) && cs.b_in_range;
  if (semidef) {
    if (cs.psd) {
      ar.feasible = p.kind == ConstraintKind::Inequality
                        ? cs.stat <= tol
                        : cs.stat <= tol;  // 0 reachable iff min h <= 0
      ar.two_side_slater = cs.stat < -tol && !ar.a_is_zero;
    } else {
      ar.feasible = cs.stat >= -tol;  // max h >= 0
      ar.two_side_slater = cs.stat > tol;
    }
    ar.degenerate_equality = std::abs(cs.stat) <= tol;
  } else {
    ar.feasible = true;
    ar.two_side_slater = !ar.a_is_zero;
  }
  return ar;
}

Solution solve_eq(const GtrsProblem& p_in, const Options& opt) {
  GtrsProblem p = p_in;
  std::vector<std::string> warnings;
  p.validate(opt.tol_sym, &warnings);
  p.kind = ConstraintKind::Equality;

  AssumptionReport ar = check_assumptions(p, opt);

  if (ar.a_is_zero) {
    if (p.b.norm() <= opt.tol_zero) {
      if (std::abs(p.c) > opt.tol_zero) return infeasible_solution(ar);
      // vacuous constraint: plain unconstrained minimization
      auto m = reformulate::minimize_unconstrained(p.D, p.e, 0.0, opt);
      Solution sol;
      ar.action = "null_space_reduction";
      sol.certificate.assumptions = ar;
      if (!m) {
        sol.status = SolveStatus::Unbounded;
        sol.value = -kInf;
        return sol;
      }
      sol.status = SolveStatus::ReducedUnconstrained;
      sol.value = m->value;
      sol.x = m->y;
      return sol;
    }
    if (opt.squaring_for_linear_equality) {
      // (b^T x + c)^2 <= 0 re-enters the inequality pipeline with a rank-one
      // constraint matrix; kept for cross-validation.
      GtrsProblem sq = p;
      sq.kind = ConstraintKind::Inequality;
      sq.A = 2.0 * p.b * p.b.transpose();
      sq.b = 2.0 * p.c * p.b;
      sq.c = p.c * p.c;
      Solution sol = solve_inequality(sq, opt);
      sol.certificate.assumptions.a_is_zero = true;
      sol.certificate.assumptions.action = "squaring";
      return sol;
    }
    return solve_on_hyperplane(p, ar, opt);
  }

  if (!ar.feasible) return infeasible_solution(ar);
  if (ar.degenerate_equality) return solve_on_null_manifold(p, ar, opt);

  detail::StructuralStage st =
      detail::run_structural(p, ConstraintKind::Equality, opt);
  st.warnings.insert(st.warnings.begin(), warnings.begin(), warnings.end());
  return detail::run_conic_pipeline(p, ConstraintKind::Equality, std::move(st),
                                    ar, opt);
}

Solution solve_interval(const GtrsProblem& p_in, const Options& opt) {
  GtrsProblem p = p_in;
  std::vector<std::string> warnings;
  p.validate(opt.tol_sym, &warnings);
  p.kind = ConstraintKind::Interval;
  p.c = 0.0;

  double bound_tol = opt.tol_zero * (1.0 + std::abs(p.c1) + std::abs(p.c2));
  if (p.c2 - p.c1 <= bound_tol) {
    GtrsProblem eq = p;
    eq.kind = ConstraintKind::Equality;
    eq.c = -p.c1;
    Solution sol = solve_eq(eq, opt);
    return sol;
  }

  AssumptionReport ar;
  ar.action = "none";
  ar.a_is_zero = p.A.norm() <= opt.tol_zero * std::max(1.0, p.D.norm());

  // Interior candidate: the unique local minimum away from the boundary.
  {
    auto ed = linalg::sym_eig(p.D, opt);
    double scale = std::max(1.0, ed.eigenvalues.cwiseAbs().maxCoeff());
    if (ed.eigenvalues.minCoeff() >= -opt.tol_eig * scale &&
        linalg::in_range(p.D, p.e, opt.tol_eig)) {
      VectorXd xhat = -linalg::pseudoinverse(p.D, opt) * p.e;
      double hval = 0.5 * xhat.dot(p.A * xhat) + p.b.dot(xhat);
      if (hval > p.c1 + bound_tol && hval < p.c2 - bound_tol) {
        Solution sol;
        sol.status = SolveStatus::Optimal;
        sol.value = p.objective(xhat);
        sol.x = xhat;
        sol.certificate.assumptions = ar;
        sol.certificate.warnings = warnings;
        sol.certificate.warnings.push_back(
            "optimum at the interior stationary point");
        return sol;
      }
    }
  }

  if (ar.a_is_zero) {
    if (p.b.norm() <= opt.tol_zero) {
      if (p.c1 > bound_tol || p.c2 < -bound_tol) return infeasible_solution(ar);
      auto m = reformulate::minimize_unconstrained(p.D, p.e, 0.0, opt);
      Solution sol;
      sol.certificate.assumptions = ar;
      if (!m) {
        sol.status = SolveStatus::Unbounded;
        sol.value = -kInf;
        return sol;
      }
      sol.status = SolveStatus::ReducedUnconstrained;
      sol.value = m->value;
      sol.x = m->y;
      return sol;
    }
    // slab between two hyperplanes: optimum on one of them
    GtrsProblem ep = p;
    ep.kind = ConstraintKind::Equality;
    ep.c = -p.c1;
    Solution lo = solve_eq(ep, opt);
    ep.c = -p.c2;
    Solution hi = solve_eq(ep, opt);
    const Solution& best = lo.value <= hi.value ? lo : hi;
    Solution sol = best;
    sol.certificate.assumptions.a_is_zero = true;
    return sol;
  }

  ConstraintShape cs = analyze_constraint(p, opt);
  if ((cs.psd || cs.nsd) && cs.b_in_range) {
    double stat = cs.stat;  // h value at the constraint's stationary point
    if (cs.psd) {
      if (stat > p.c2 + bound_tol) return infeasible_solution(ar);
      if (stat >= p.c1 - bound_tol) {
        // the lower bound never binds: plain one-sided problem
        GtrsProblem q = p;
        q.kind = ConstraintKind::Inequality;
        q.c = -p.c2;
        Solution sol = solve_inequality(q, opt);
        sol.certificate.warnings.push_back("lower interval bound is vacuous");
        return sol;
      }
    } else {
      if (stat < p.c1 - bound_tol) return infeasible_solution(ar);
      if (stat <= p.c2 + bound_tol) {
        GtrsProblem q = p;
        q.kind = ConstraintKind::Inequality;
        q.A = -p.A;
        q.b = -p.b;
        q.c = p.c1;
        Solution sol = solve_inequality(q, opt);
        sol.certificate.warnings.push_back("upper interval bound is vacuous");
        return sol;
      }
    }
  }

  ar.two_side_slater = true;
  detail::StructuralStage st =
      detail::run_structural(p, ConstraintKind::Interval, opt);
  st.warnings.insert(st.warnings.begin(), warnings.begin(), warnings.end());
  if (st.unbounded) {
    return detail::unbounded_solution(std::move(st), ar);
  }
  const auto& cp = *st.cp;
  dual::DualSpec base = dual::make_dual_spec(cp, ConstraintKind::Interval);
  dual::IntervalDualResult ires =
      dual::maximize_interval_dual(base, p.c1, p.c2, opt);
  if (ires.status == dual::DualStatus::EmptyDomain) {
    st.classification.unbounded = true;
    st.classification.reasons.push_back("both one-sided duals infeasible");
    return detail::unbounded_solution(std::move(st), ar);
  }
  if (ires.status == dual::DualStatus::UnboundedAbove) {
    throw NumericalFailure(
        "solve_interval: one-sided dual unbounded above after feasibility "
        "screen");
  }

  double value = ires.value + cp.obj_offset;
  bool tight = std::abs(ires.side.nu) > opt.tol_zero;
  double t_lo = tight ? 0.0 : p.c1 - p.c2;
  double t_hi = 0.0;
  reformulate::PrimalPoint pp = dual::primal_from_dual_targeted(
      ires.side_spec, cp.l, ires.side.nu, ConstraintKind::Inequality,
      cp.e_even, t_lo, t_hi, opt);
  if (!ires.hi_side) {
    for (auto& zj : pp.z) zj = -zj;  // back to the original cross-term sign
  }

  Solution sol;
  sol.value = value;
  sol.certificate.has_nu = true;
  sol.certificate.nu = ires.hi_side ? ires.nu_hi : ires.nu_lo;
  sol.certificate.nu_lo = ires.nu_lo;
  sol.certificate.nu_hi = ires.nu_hi;
  sol.certificate.dual_domain_lo = ires.side.domain_lo;
  sol.certificate.dual_domain_hi = ires.side.domain_hi;
  sol.certificate.dual_active = ires.side.active;
  sol.certificate.dual_iterations = ires.side.iterations;
  sol.certificate.blocks = std::move(st.blocks);
  sol.certificate.classification = std::move(st.classification);
  sol.certificate.assumptions = ar;
  sol.certificate.warnings = std::move(st.warnings);

  auto unatt = classify::unattained_blocks(pp.z, cp.zeta, cp.e_even,
                                           ConstraintKind::Interval, opt);
  resolve_deferred_tags(sol.certificate.classification, unatt);

  if (unatt.empty()) {
    auto rec =
        reformulate::recover_x(pp, cp, ConstraintKind::Interval, opt.eps, opt);
    double f = p.objective(rec.x);
    if (std::abs(f - value) > 1e-6 * (1.0 + std::abs(value)) ||
        !p.feasible(rec.x, 1e-7)) {
      throw NumericalFailure(
          "solve_interval: recovered point fails verification");
    }
    sol.status = SolveStatus::Optimal;
    sol.x = rec.x;
    return sol;
  }
  sol.status = SolveStatus::FiniteUnattained;
  Options gen_opt = opt;
  auto cp_copy = cp;
  sol.epsilon_solution = [pp, cp_copy, gen_opt](double eps) {
    return reformulate::recover_x(pp, cp_copy, ConstraintKind::Interval, eps,
                                  gen_opt)
        .x;
  };
  return sol;
}

}  // namespace gtrs::variants
