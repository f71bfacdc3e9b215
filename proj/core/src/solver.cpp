#include "gtrs/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gtrs/canonical.hpp"
#include "gtrs/classify.hpp"
#include "gtrs/dual.hpp"
#include "gtrs/linalg.hpp"
#include "gtrs/reformulate.hpp"
#include "gtrs/variants.hpp"
#include "pipeline.hpp"

namespace gtrs {

namespace detail {

std::vector<BlockSummary> summarize_blocks(const canonical::CanonicalForm& cf) {
  std::vector<BlockSummary> out;
  for (const auto& b : cf.blocks) {
    BlockSummary s;
    if (const auto* sb = std::get_if<canonical::ScalarBlock>(&b)) {
      s.type = "scalar";
      s.size = 1;
      s.alpha = sb->alpha;
      s.delta = sb->delta;
    } else if (const auto* cb = std::get_if<canonical::CoupledBlock>(&b)) {
      s.type = "coupled";
      s.size = 2;
      s.tau = cb->tau;
      s.kappa = cb->kappa;
    } else {
      s.type = "zero";
      s.size = 1;
    }
    out.push_back(s);
  }
  return out;
}

StructuralStage run_structural(const GtrsProblem& p, ConstraintKind kind,
                               const Options& opt) {
  StructuralStage st;
  canonical::Outcome outcome = canonical::canonicalize(p.A, p.D, opt);

  if (const auto* diag = std::get_if<canonical::EarlyDiagnostic>(&outcome)) {
    auto report = classify::screen_structure(outcome, opt);
    for (const auto& entry : report.reasons) {
      st.classification.reasons.push_back(classify::to_string(entry.reason));
    }
    st.classification.unbounded = true;
    st.unbounded = true;
    (void)diag;
    return st;
  }

  auto& cf = std::get<canonical::CanonicalForm>(outcome);
  st.warnings = cf.warnings;
  st.blocks = summarize_blocks(cf);

  Eigen::VectorXd e_hat = cf.S.transpose() * p.e;
  Eigen::VectorXd b_hat = cf.S.transpose() * p.b;
  double c = kind == ConstraintKind::Interval ? 0.0 : p.c;
  st.cp = reformulate::shift_cross_b(cf, e_hat, b_hat, c, opt);
  const auto& cp = *st.cp;

  // Coupled-block case analysis on the shifted coefficients.
  bool have_zeta = false;
  double zeta0 = 0.0;
  for (int j = 0; j < cp.pairs(); ++j) {
    auto tag = classify::analyze_coupled(cp.tau[j], cp.zeta[j], cp.e_odd[j],
                                         cp.e_even[j], kind, opt);
    st.classification.case_tags.push_back(classify::to_string(tag));
    if (tag == classify::CaseTag::Case3) {
      bool odd = std::abs(cp.e_odd[j]) > opt.tol_zero;
      st.classification.reasons.push_back(
          odd ? classify::to_string(classify::Reason::OddLinearTermNonzero)
              : classify::to_string(classify::Reason::TwoByTwoCase3));
    }
    if (!have_zeta) {
      zeta0 = cp.zeta[j];
      have_zeta = true;
    } else if (std::abs(cp.zeta[j] - zeta0) >
               opt.tol_zero * (1.0 + std::abs(zeta0))) {
      st.classification.reasons.push_back(
          classify::to_string(classify::Reason::UnequalZetas));
    }
  }
  // Zero-pair coordinates with an objective coefficient but no constraint
  // counterpart drive the objective to -inf along a free direction.
  for (size_t i = 0; i < cp.e_zero.size(); ++i) {
    if (std::abs(cp.e_zero[i]) > opt.tol_zero &&
        std::abs(cp.b_zero[i]) <= opt.tol_zero) {
      st.classification.reasons.push_back("FreeLinearObjective");
    }
  }
  st.classification.unbounded = !st.classification.reasons.empty();
  st.unbounded = st.classification.unbounded;
  st.cf = std::move(cf);
  return st;
}

Solution unbounded_solution(StructuralStage&& st, AssumptionReport assumptions) {
  Solution sol;
  sol.status = SolveStatus::Unbounded;
  sol.value = -std::numeric_limits<double>::infinity();
  sol.certificate.blocks = std::move(st.blocks);
  sol.certificate.classification = std::move(st.classification);
  sol.certificate.assumptions = std::move(assumptions);
  sol.certificate.warnings = std::move(st.warnings);
  return sol;
}

Solution run_conic_pipeline(const GtrsProblem& p, ConstraintKind kind,
                            StructuralStage&& st, AssumptionReport assumptions,
                            const Options& opt) {
  if (st.unbounded) {
    return unbounded_solution(std::move(st), std::move(assumptions));
  }
  const auto& cp = *st.cp;
  dual::DualSpec spec = dual::make_dual_spec(cp, kind);
  dual::DualResult dres = dual::maximize_dual(spec, opt);

  if (dres.status == dual::DualStatus::EmptyDomain) {
    st.classification.unbounded = true;
    if (!dres.note.empty()) st.classification.reasons.push_back(dres.note);
    Solution sol = unbounded_solution(std::move(st), std::move(assumptions));
    return sol;
  }
  if (dres.status == dual::DualStatus::UnboundedAbove) {
    throw NumericalFailure(
        "solver: dual unbounded above after the feasibility screen");
  }

  double value = dres.value + cp.obj_offset;
  reformulate::PrimalPoint pp =
      dual::primal_from_dual(spec, cp.l, dres.nu, kind, cp.e_even, opt);

  Solution sol;
  sol.value = value;
  sol.certificate.has_nu = true;
  sol.certificate.nu = dres.nu;
  sol.certificate.dual_domain_lo = dres.domain_lo;
  sol.certificate.dual_domain_hi = dres.domain_hi;
  sol.certificate.dual_active = dres.active;
  sol.certificate.dual_iterations = dres.iterations;
  sol.certificate.blocks = std::move(st.blocks);
  sol.certificate.classification = std::move(st.classification);
  sol.certificate.assumptions = std::move(assumptions);
  sol.certificate.warnings = std::move(st.warnings);

  auto unatt =
      classify::unattained_blocks(pp.z, cp.zeta, cp.e_even, kind, opt);
  // Deferred tags resolve once the optimal cross terms are known.
  for (size_t j = 0; j < sol.certificate.classification.case_tags.size(); ++j) {
    auto& tag = sol.certificate.classification.case_tags[j];
    if (tag == "Deferred") {
      bool bad = std::find(unatt.begin(), unatt.end(), static_cast<int>(j)) !=
                 unatt.end();
      tag = bad ? "Case2" : "Case1";
    }
  }

  if (unatt.empty()) {
    reformulate::RecoveredPoint rec =
        reformulate::recover_x(pp, cp, kind, opt.eps, opt);
    double f = p.objective(rec.x);
    if (std::abs(f - value) > 1e-6 * (1.0 + std::abs(value)) ||
        !p.feasible(rec.x, 1e-7)) {
      throw NumericalFailure(
          "solver: recovered point fails verification (degenerate or "
          "ill-conditioned instance)");
    }
    sol.status = SolveStatus::Optimal;
    sol.x = rec.x;
    return sol;
  }

  sol.status = SolveStatus::FiniteUnattained;
  Options gen_opt = opt;
  sol.epsilon_solution = [pp, cp, kind, gen_opt](double eps) {
    return reformulate::recover_x(pp, cp, kind, eps, gen_opt).x;
  };
  return sol;
}

}  // namespace detail

Solution solve_inequality(const GtrsProblem& p_in, const Options& opt) {
  GtrsProblem p = p_in;
  std::vector<std::string> warnings;
  p.validate(opt.tol_sym, &warnings);

  AssumptionReport assumptions;
  auto pre = reformulate::preprocess(p, opt);
  if (std::holds_alternative<reformulate::Infeasible>(pre)) {
    Solution sol;
    sol.status = SolveStatus::Infeasible;
    sol.value = std::numeric_limits<double>::infinity();
    sol.certificate.assumptions.feasible = false;
    sol.certificate.warnings = warnings;
    return sol;
  }
  if (const auto* red = std::get_if<reformulate::ReducedUnconstrained>(&pre)) {
    assumptions.degenerate_equality = true;
    assumptions.action = "null_space_reduction";
    auto opt_min = reformulate::minimize_unconstrained(red->D_red, red->e_red,
                                                       red->constant, opt);
    Solution sol;
    sol.certificate.assumptions = assumptions;
    sol.certificate.warnings = warnings;
    if (!opt_min) {
      sol.status = SolveStatus::Unbounded;
      sol.value = -std::numeric_limits<double>::infinity();
      sol.certificate.classification.unbounded = true;
      sol.certificate.classification.reasons.push_back(
          "objective unbounded on the boundary set");
      return sol;
    }
    sol.status = SolveStatus::ReducedUnconstrained;
    sol.value = opt_min->value;
    sol.x = red->base + red->basis * opt_min->y;
    return sol;
  }

  assumptions.two_side_slater = true;  // strict point exists for <= 0
  detail::StructuralStage st =
      detail::run_structural(p, ConstraintKind::Inequality, opt);
  st.warnings.insert(st.warnings.begin(), warnings.begin(), warnings.end());
  return detail::run_conic_pipeline(p, ConstraintKind::Inequality,
                                    std::move(st), assumptions, opt);
}

Solution solve(const GtrsProblem& p, const Options& opt) {
  switch (p.kind) {
    case ConstraintKind::Inequality: return solve_inequality(p, opt);
    case ConstraintKind::Equality: return variants::solve_eq(p, opt);
    case ConstraintKind::Interval: return variants::solve_interval(p, opt);
  }
  throw InvalidInput("solve: unknown constraint kind");
}

reformulate::SocpProblem conic_form(const GtrsProblem& p_in, const Options& opt) {
  GtrsProblem p = p_in;
  p.validate(opt.tol_sym);
  detail::StructuralStage st = detail::run_structural(p, p.kind, opt);
  if (st.unbounded || !st.cp) {
    throw NumericalFailure(
        "conic_form: the structural screen proves the objective unbounded");
  }
  reformulate::SocpProblem sp = reformulate::build_socp(*st.cp, p.kind, opt);
  if (p.kind == ConstraintKind::Interval) {
    sp.c1 = p.c1 - st.cp->c;
    sp.c2 = p.c2 - st.cp->c;
    sp.c = 0.0;
  }
  return sp;
}

ClassifyOutput classify_problem(const GtrsProblem& p_in, const Options& opt) {
  GtrsProblem p = p_in;
  ClassifyOutput out;
  p.validate(opt.tol_sym, &out.warnings);
  detail::StructuralStage st = detail::run_structural(p, p.kind, opt);
  out.classification = std::move(st.classification);
  out.blocks = std::move(st.blocks);
  out.warnings.insert(out.warnings.end(), st.warnings.begin(),
                      st.warnings.end());
  return out;
}

}  // namespace gtrs
