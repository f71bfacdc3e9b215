#include "gtrs/classify.hpp"

#include <cmath>

namespace gtrs::classify {

std::string to_string(Reason r) {
  switch (r) {
    case Reason::JordanTooLarge: return "JordanTooLarge";
    case Reason::ComplexPair: return "ComplexPair";
    case Reason::TypeBLarge: return "TypeBLarge";
    case Reason::TwoByTwoCase3: return "TwoByTwoCase3";
    case Reason::OddLinearTermNonzero: return "OddLinearTermNonzero";
    case Reason::UnequalZetas: return "UnequalZetas";
  }
  return "?";
}

std::string to_string(CaseTag t) {
  switch (t) {
    case CaseTag::Case1: return "Case1";
    case CaseTag::Case2: return "Case2";
    case CaseTag::Case3: return "Case3";
    case CaseTag::Deferred: return "Deferred";
  }
  return "?";
}

BoundednessReport screen_structure(const canonical::Outcome& outcome,
                                   const Options& opt) {
  BoundednessReport report;
  if (const auto* diag = std::get_if<canonical::EarlyDiagnostic>(&outcome)) {
    for (const auto& item : diag->items) {
      Reason r;
      switch (item.kind) {
        case canonical::DiagnosticKind::JordanTooLarge:
          r = Reason::JordanTooLarge;
          break;
        case canonical::DiagnosticKind::ComplexPair:
          r = Reason::ComplexPair;
          break;
        case canonical::DiagnosticKind::TypeBLarge:
          r = Reason::TypeBLarge;
          break;
        case canonical::DiagnosticKind::MultipleTwoByTwoChains:
          r = Reason::UnequalZetas;
          break;
      }
      report.reasons.push_back({-1, r});
    }
    report.unbounded = !report.reasons.empty();
    return report;
  }

  const auto& cf = std::get<canonical::CanonicalForm>(outcome);
  // tau = -1 coupled blocks can never be part of a bounded problem, and
  // coupled blocks with different eigenvalues force the dual gate shut.
  int coupled_index = 0;
  bool have_zeta = false;
  double zeta0 = 0.0;
  for (size_t i = 0; i < cf.blocks.size(); ++i) {
    const auto* cb = std::get_if<canonical::CoupledBlock>(&cf.blocks[i]);
    if (!cb) continue;
    if (cb->tau < 0.0) {
      report.reasons.push_back({coupled_index, Reason::TwoByTwoCase3});
    }
    double zeta = -cb->kappa;
    if (!have_zeta) {
      zeta0 = zeta;
      have_zeta = true;
    } else if (std::abs(zeta - zeta0) > opt.tol_zero * (1.0 + std::abs(zeta0))) {
      report.reasons.push_back({coupled_index, Reason::UnequalZetas});
    }
    report.case_tags.push_back(CaseTag::Deferred);
    ++coupled_index;
  }
  report.unbounded = !report.reasons.empty();
  return report;
}

CaseTag analyze_coupled(double tau, double lambda, double e_odd, double e_even,
                        ConstraintKind kind, const Options& opt) {
  const double tol = opt.tol_zero;
  bool odd_zero = std::abs(e_odd) <= tol;
  bool even_zero = std::abs(e_even) <= tol;
  if (tau < 0.0 || !odd_zero) return CaseTag::Case3;
  if (kind == ConstraintKind::Inequality) {
    if (lambda > tol) return CaseTag::Case3;
    if (!even_zero) return CaseTag::Case1;
    return CaseTag::Deferred;
  }
  // equality and interval kinds: the eigenvalue sign plays no role
  if (!even_zero) return CaseTag::Case1;
  return CaseTag::Deferred;
}

std::vector<int> unattained_blocks(const std::vector<double>& z_bar,
                                   const std::vector<double>& zeta,
                                   const std::vector<double>& e_even,
                                   ConstraintKind kind, const Options& opt) {
  const double tol = opt.tol_zero;
  std::vector<int> out;
  for (size_t j = 0; j < z_bar.size(); ++j) {
    bool even_zero = std::abs(e_even[j]) <= tol;
    if (!even_zero) continue;
    bool z_nonzero = std::abs(z_bar[j]) > tol;
    if (kind == ConstraintKind::Inequality) {
      bool zeta_zero = std::abs(zeta[j]) <= tol;
      if ((zeta_zero && z_bar[j] < -tol) || (zeta[j] < -tol && z_nonzero)) {
        out.push_back(static_cast<int>(j));
      }
    } else if (z_nonzero) {
      out.push_back(static_cast<int>(j));
    }
  }
  return out;
}

bool attained(const std::vector<double>& z_bar, const std::vector<double>& zeta,
              const std::vector<double>& e_even, ConstraintKind kind,
              const Options& opt) {
  return unattained_blocks(z_bar, zeta, e_even, kind, opt).empty();
}

}  // namespace gtrs::classify
