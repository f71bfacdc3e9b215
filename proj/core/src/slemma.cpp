#include "gtrs/slemma.hpp"

#include <cmath>

#include "gtrs/linalg.hpp"
#include "gtrs/oracle.hpp"
#include "gtrs/reformulate.hpp"
#include "gtrs/solver.hpp"
#include "gtrs/variants.hpp"

namespace gtrs::slemma {

namespace {

void check_applicable(const GtrsProblem& p, const Options& opt) {
  switch (p.kind) {
    case ConstraintKind::Inequality: {
      auto pre = reformulate::preprocess(p, opt);
      if (std::holds_alternative<reformulate::Infeasible>(pre)) {
        throw NotApplicable("s_lemma: constraint set is empty");
      }
      if (std::holds_alternative<reformulate::ReducedUnconstrained>(pre)) {
        throw NotApplicable(
            "s_lemma: no strictly feasible point (Slater condition fails)");
      }
      return;
    }
    case ConstraintKind::Equality: {
      auto ar = variants::check_assumptions(p, opt);
      if (ar.a_is_zero) throw NotApplicable("s_lemma: A = 0 is out of scope");
      if (!ar.feasible) throw NotApplicable("s_lemma: constraint set is empty");
      if (!ar.two_side_slater) {
        throw NotApplicable("s_lemma: two-side Slater condition fails");
      }
      return;
    }
    case ConstraintKind::Interval: {
      if (p.A.norm() <= opt.tol_zero * std::max(1.0, p.D.norm())) {
        throw NotApplicable("s_lemma: A = 0 is out of scope");
      }
      auto ed = linalg::sym_eig(p.A, opt);
      double scale = std::max(1.0, ed.eigenvalues.cwiseAbs().maxCoeff());
      bool psd = ed.eigenvalues.minCoeff() >= -opt.tol_eig * scale;
      bool nsd = ed.eigenvalues.maxCoeff() <= opt.tol_eig * scale;
      if ((psd || nsd) && linalg::in_range(p.A, p.b, opt.tol_eig)) {
        double stat = -0.5 * p.b.dot(linalg::pseudoinverse(p.A, opt) * p.b);
        double tol = opt.tol_zero * (1.0 + std::abs(p.c1) + std::abs(p.c2));
        if (psd && stat > p.c2 + tol) {
          throw NotApplicable("s_lemma: constraint set is empty");
        }
        if (nsd && stat < p.c1 - tol) {
          throw NotApplicable("s_lemma: constraint set is empty");
        }
        if (std::abs(stat - p.c1) <= tol || std::abs(stat - p.c2) <= tol) {
          throw NotApplicable(
              "s_lemma: an interval endpoint touches the constraint's "
              "stationary value");
        }
      }
      return;
    }
  }
}

}  // namespace

SLemmaVerdict s_lemma(const SLemmaQuery& q, const Options& opt) {
  GtrsProblem p;
  p.D = q.D;
  p.e = q.e;
  p.A = q.A;
  p.b = q.b;
  p.c = q.c;
  p.c1 = q.c1;
  p.c2 = q.c2;
  p.kind = q.kind;
  p.validate(opt.tol_sym);
  check_applicable(p, opt);

  Solution sol = solve(p, opt);
  SLemmaVerdict verdict;
  double total = sol.value + q.v;
  verdict.min_value = total;
  double tol_holds = 2e-8 * (1.0 + std::abs(q.v));
  verdict.holds = total >= -tol_holds;

  if (verdict.holds) {
    verdict.multiplier = sol.certificate.has_nu ? sol.certificate.nu : 0.0;
    return verdict;
  }

  Eigen::VectorXd w;
  if (sol.has_point()) {
    w = sol.x;
  } else if (sol.status == SolveStatus::FiniteUnattained) {
    double eps = std::min(opt.eps, std::abs(total) / 2.0);
    w = sol.epsilon_solution(eps);
  } else {
    // Unbounded below: search for a deeply negative feasible point.
    oracle::OracleConfig cfg;
    cfg.seed = opt.seed;
    for (double radius : {8.0, 80.0, 800.0}) {
      cfg.radius = radius;
      auto res = oracle::brute_force_min(p, cfg);
      if (res.argmin.size() > 0 && p.feasible(res.argmin, opt.tol_feas) &&
          p.objective(res.argmin) + q.v < -tol_holds) {
        w = res.argmin;
        break;
      }
    }
    if (w.size() == 0) {
      throw NumericalFailure("s_lemma: could not materialize a witness for an "
                             "unbounded objective");
    }
  }
  if (!p.feasible(w, opt.tol_feas) || p.objective(w) + q.v > -1e-9) {
    throw NumericalFailure("s_lemma: witness failed re-verification");
  }
  verdict.witness = w;
  return verdict;
}

}  // namespace gtrs::slemma
