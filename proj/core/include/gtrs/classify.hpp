#pragma once

#include <string>
#include <vector>

#include "gtrs/canonical.hpp"
#include "gtrs/config.hpp"
#include "gtrs/problem.hpp"

namespace gtrs::classify {

enum class Reason {
  JordanTooLarge,
  ComplexPair,
  TypeBLarge,
  TwoByTwoCase3,
  OddLinearTermNonzero,
  UnequalZetas,
};

std::string to_string(Reason r);

enum class CaseTag { Case1, Case2, Case3, Deferred };

std::string to_string(CaseTag t);

struct BoundednessReport {
  bool unbounded = false;
  struct Entry {
    int block_index;  ///< -1 for global/structural reasons
    Reason reason;
  };
  std::vector<Entry> reasons;
  std::vector<CaseTag> case_tags;  ///< one per coupled block (when screened)
};

/// Structural screen on a canonical outcome: early diagnostics map 1:1 to
/// reasons, an assembled form is scanned for tau = -1 coupled blocks and for
/// coupled blocks with distinct eigenvalues. Case tags are left Deferred;
/// the linear coefficients are not known here (see analyze_coupled).
BoundednessReport screen_structure(const canonical::Outcome& outcome,
                                   const Options& opt = {});

/// Case analysis of one coupled block after the constraint-side linear term
/// was shifted away. e_odd is the coefficient on the leading coordinate,
/// e_even on the trailing one.
CaseTag analyze_coupled(double tau, double lambda, double e_odd, double e_even,
                        ConstraintKind kind, const Options& opt = {});

/// Spec name alias.
inline CaseTag analyze_2x2(double tau, double lambda, double e_odd,
                           double e_even, ConstraintKind kind,
                           const Options& opt = {}) {
  return analyze_coupled(tau, lambda, e_odd, e_even, kind, opt);
}

/// Attainability of an established-finite optimum: a coupled block leaves the
/// infimum unattained when its shifted even coefficient vanishes and the
/// optimal cross-term forces an escaping sequence.
bool attained(const std::vector<double>& z_bar, const std::vector<double>& zeta,
              const std::vector<double>& e_even, ConstraintKind kind,
              const Options& opt = {});

/// Indices of the coupled blocks that make the infimum unattained.
std::vector<int> unattained_blocks(const std::vector<double>& z_bar,
                                   const std::vector<double>& zeta,
                                   const std::vector<double>& e_even,
                                   ConstraintKind kind, const Options& opt = {});

}  // namespace gtrs::classify
