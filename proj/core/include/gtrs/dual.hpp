#pragma once

#include <limits>
#include <string>
#include <vector>

#include "gtrs/config.hpp"
#include "gtrs/problem.hpp"
#include "gtrs/reformulate.hpp"

namespace gtrs::dual {

enum class MultiplierDomain { NonNegative, Real };

/// Data of the one-dimensional concave dual
///   rho(nu) = c nu + c0 + sum_i h_i(nu) + g(nu),
/// with h_i the quadratic-over-linear terms of the scalar coordinates and g
/// the gate that forces zeta_j + nu = 0 on every coupled pair.
struct DualSpec {
  std::vector<double> alpha, delta, b, e;  ///< scalar rows (may include linear-only rows)
  std::vector<double> zeta;
  double c = 0.0;
  double c0 = 0.0;
  MultiplierDomain domain = MultiplierDomain::NonNegative;
};

DualSpec make_dual_spec(const reformulate::CanonicalProblem& cp,
                        ConstraintKind kind);

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// rho(nu); -inf outside the effective domain.
double dual_value(const DualSpec& spec, double nu, const Options& opt = {});

enum class DualStatus {
  Finite,         ///< maximum found
  EmptyDomain,    ///< no feasible multiplier: primal unbounded below
  UnboundedAbove, ///< dual grows past the cap: infeasible-side anomaly
};

struct DualResult {
  DualStatus status = DualStatus::Finite;
  double nu = 0.0;
  double value = kNegInf;
  double domain_lo = kNegInf;
  double domain_hi = kPosInf;
  int iterations = 0;
  std::vector<int> active;  ///< scalar rows with delta_i + nu alpha_i ~ 0
  std::string note;
};

/// Maximizes rho over the multiplier domain. Coupled pairs pin the
/// multiplier (all zeta equal and -zeta in the domain) or force -inf.
/// Otherwise golden-section over the closed feasible interval, with
/// geometric bracket expansion on unbounded sides.
DualResult maximize_dual(const DualSpec& spec, const Options& opt = {});

/// Stationarity + complementary-slackness recovery of a conic-problem point
/// from a finite dual optimum. The leading l rows map to the scalar
/// coordinates, remaining rows to the free linear coordinates. Throws
/// NumericalFailure when verification fails.
reformulate::PrimalPoint primal_from_dual(const DualSpec& spec, int l,
                                          double nu, ConstraintKind kind,
                                          const std::vector<double>& e_even,
                                          const Options& opt = {});

/// Same recovery with explicit targets on (constraint lhs + c); used by the
/// interval pipeline where the admissible window is [c1 - c2, 0] in the
/// winning side's coordinates. NaN targets fall back to the kind defaults.
reformulate::PrimalPoint primal_from_dual_targeted(
    const DualSpec& spec, int l, double nu, ConstraintKind kind,
    const std::vector<double>& e_even, double target_lo, double target_hi,
    const Options& opt = {});

struct IntervalDualResult {
  DualStatus status = DualStatus::Finite;
  double value = kNegInf;
  double nu_lo = 0.0;   ///< multiplier of h >= c1
  double nu_hi = 0.0;   ///< multiplier of h <= c2
  bool hi_side = true;  ///< which one-sided problem won
  DualResult side;      ///< the winning side's result
  DualSpec side_spec;   ///< the winning side's effective single-constraint spec
};

/// Two-sided interval dual: the maximum of the two one-sided duals obtained
/// by pinning one multiplier to zero; ties break toward the upper bound.
IntervalDualResult maximize_interval_dual(const DualSpec& base, double lo,
                                          double hi, const Options& opt = {});

}  // namespace gtrs::dual
