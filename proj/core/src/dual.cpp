#include "gtrs/dual.hpp"

#include <algorithm>
#include <cmath>

namespace gtrs::dual {

DualSpec make_dual_spec(const reformulate::CanonicalProblem& cp,
                        ConstraintKind kind) {
  DualSpec spec;
  spec.alpha = cp.alpha;
  spec.delta = cp.delta;
  spec.b = cp.b;
  spec.e = cp.e;
  // Zero-pair coordinates enter the dual as linear-only rows: their h-term
  // pins the multiplier exactly where the primal analysis demands.
  for (size_t i = 0; i < cp.b_zero.size(); ++i) {
    spec.alpha.push_back(0.0);
    spec.delta.push_back(0.0);
    spec.b.push_back(cp.b_zero[i]);
    spec.e.push_back(cp.e_zero[i]);
  }
  spec.zeta = cp.zeta;
  spec.c = cp.c;
  spec.c0 = cp.recompute_c0();
  spec.domain = kind == ConstraintKind::Equality ? MultiplierDomain::Real
                                                 : MultiplierDomain::NonNegative;
  return spec;
}

double dual_value(const DualSpec& spec, double nu, const Options& opt) {
  if (spec.domain == MultiplierDomain::NonNegative &&
      nu < -opt.tol_zero * (1.0 + std::abs(nu))) {
    return kNegInf;
  }
  double val = spec.c * nu + spec.c0;
  for (size_t i = 0; i < spec.alpha.size(); ++i) {
    double den = spec.alpha[i] * nu + spec.delta[i];
    double num = spec.b[i] * nu + spec.e[i];
    if (den > 0.0) {
      val -= num * num / (2.0 * den);
    } else {
      double den_tol =
          opt.tol_zero * (1.0 + std::abs(spec.alpha[i] * nu) + std::abs(spec.delta[i]));
      double num_tol =
          opt.tol_zero * (1.0 + std::abs(spec.b[i] * nu) + std::abs(spec.e[i]));
      if (den >= -den_tol && std::abs(num) <= num_tol) {
        continue;  // both vanish: the row contributes nothing
      }
      return kNegInf;
    }
  }
  for (double zeta : spec.zeta) {
    if (std::abs(zeta + nu) > opt.tol_zero * (1.0 + std::abs(zeta))) {
      return kNegInf;
    }
  }
  return val;
}

namespace {

/// Analytic derivative of rho on the open domain: equal to the constraint
/// sum at the stationarity-recovered point, which makes the maximizer and
/// the primal recovery agree to machine precision.
double rho_prime(const DualSpec& spec, double nu, const Options& opt) {
  double g = spec.c;
  for (size_t i = 0; i < spec.alpha.size(); ++i) {
    double den = spec.alpha[i] * nu + spec.delta[i];
    double num = spec.b[i] * nu + spec.e[i];
    if (den > 0.0) {
      double x = -num / den;
      g += 0.5 * spec.alpha[i] * x * x + spec.b[i] * x;
    } else {
      double num_tol =
          opt.tol_zero * (1.0 + std::abs(spec.b[i] * nu) + std::abs(spec.e[i]));
      if (std::abs(num) > num_tol) {
        // beyond a hard domain edge: the function falls off toward it
        return spec.alpha[i] > 0.0 ? kPosInf : kNegInf;
      }
    }
  }
  return g;
}

}  // namespace

DualResult maximize_dual(const DualSpec& spec, const Options& opt) {
  DualResult out;
  out.domain_lo =
      spec.domain == MultiplierDomain::NonNegative ? 0.0 : kNegInf;
  out.domain_hi = kPosInf;

  // Coupled pairs pin the multiplier.
  if (!spec.zeta.empty()) {
    double z0 = spec.zeta[0];
    for (double z : spec.zeta) {
      if (std::abs(z - z0) > opt.tol_zero * (1.0 + std::abs(z0))) {
        out.status = DualStatus::EmptyDomain;
        out.note = "coupled blocks with unequal eigenvalues";
        return out;
      }
    }
    double nu = -z0;
    if (spec.domain == MultiplierDomain::NonNegative) {
      if (nu < -opt.tol_zero * (1.0 + std::abs(nu))) {
        out.status = DualStatus::EmptyDomain;
        out.note = "pinned multiplier is negative";
        return out;
      }
      nu = std::max(nu, 0.0);
    }
    double val = dual_value(spec, nu, opt);
    if (!std::isfinite(val)) {
      out.status = DualStatus::EmptyDomain;
      out.note = "pinned multiplier outside the h-domain";
      return out;
    }
    out.nu = nu;
    out.value = val;
    out.domain_lo = out.domain_hi = nu;
  } else {
    // Feasible interval from the curvature rows; linear-only rows pin points.
    double lo = out.domain_lo, hi = out.domain_hi;
    bool forced = false;
    double forced_nu = 0.0;
    for (size_t i = 0; i < spec.alpha.size(); ++i) {
      double a = spec.alpha[i], d = spec.delta[i];
      if (a > opt.tol_zero) {
        lo = std::max(lo, -d / a);
      } else if (a < -opt.tol_zero) {
        hi = std::min(hi, -d / a);
      } else if (std::abs(d) <= opt.tol_zero) {
        // linear-only row: e + nu b must vanish
        if (std::abs(spec.b[i]) > opt.tol_zero) {
          double point = -spec.e[i] / spec.b[i];
          if (forced && std::abs(point - forced_nu) >
                            opt.tol_zero * (1.0 + std::abs(forced_nu))) {
            out.status = DualStatus::EmptyDomain;
            out.note = "linear rows pin contradictory multipliers";
            return out;
          }
          forced = true;
          forced_nu = point;
        } else if (std::abs(spec.e[i]) > opt.tol_zero) {
          out.status = DualStatus::EmptyDomain;
          out.note = "objective linear term on a free direction";
          return out;
        }
      } else if (d < -opt.tol_zero) {
        out.status = DualStatus::EmptyDomain;
        out.note = "negative-curvature row with no constraint counterpart";
        return out;
      }
    }
    out.domain_lo = lo;
    out.domain_hi = hi;
    double span_tol = opt.tol_zero * (1.0 + std::abs(lo) + std::abs(hi));
    if (lo > hi + span_tol) {
      out.status = DualStatus::EmptyDomain;
      out.note = "empty multiplier interval";
      return out;
    }
    if (forced) {
      if (forced_nu < lo - span_tol || forced_nu > hi + span_tol ||
          (spec.domain == MultiplierDomain::NonNegative &&
           forced_nu < -span_tol)) {
        out.status = DualStatus::EmptyDomain;
        out.note = "pinned multiplier outside the feasible interval";
        return out;
      }
      if (spec.domain == MultiplierDomain::NonNegative) {
        forced_nu = std::max(forced_nu, 0.0);
      }
      out.nu = forced_nu;
      out.value = dual_value(spec, forced_nu, opt);
      if (!std::isfinite(out.value)) {
        out.status = DualStatus::EmptyDomain;
        out.note = "pinned multiplier outside the h-domain";
        return out;
      }
    } else {
      // Bracket unbounded sides by geometric expansion on the supergradient.
      double anchor = 0.0;
      if (std::isfinite(lo)) anchor = std::max(anchor, lo);
      if (std::isfinite(hi)) anchor = std::min(anchor, hi);
      double ub = hi, lb = lo;
      if (!std::isfinite(hi)) {
        double t = anchor, step = 1.0 + std::abs(anchor);
        while (true) {
          double g = rho_prime(spec, t, opt);
          ++out.iterations;
          if (!(g > 0.0)) break;
          t += step;
          step *= 2.0;
          if (t > opt.dual_expand_cap) {
            out.status = DualStatus::UnboundedAbove;
            out.note = "dual unbounded above (constraint infeasible-side anomaly)";
            return out;
          }
        }
        ub = t;
      }
      if (!std::isfinite(lo)) {
        double t = anchor, step = 1.0 + std::abs(anchor);
        while (true) {
          double g = rho_prime(spec, t, opt);
          ++out.iterations;
          if (!(g < 0.0)) break;
          t -= step;
          step *= 2.0;
          if (t < -opt.dual_expand_cap) {
            out.status = DualStatus::UnboundedAbove;
            out.note = "dual unbounded above (constraint infeasible-side anomaly)";
            return out;
          }
        }
        lb = t;
      }
      // Bisection on the analytic derivative (concave: the derivative is
      // nonincreasing). The derivative equals the constraint sum of the
      // stationarity-recovered point, so driving it to zero keeps the
      // recovery consistent.
      double a = lb, bb = ub;
      double nu_star;
      double ga = rho_prime(spec, a, opt);
      double gb = rho_prime(spec, bb, opt);
      if (ga <= 0.0) {
        nu_star = a;
      } else if (gb >= 0.0) {
        nu_star = bb;
      } else {
        int it = 0;
        while (bb - a > 1e-15 * (1.0 + std::abs(a) + std::abs(bb)) &&
               it < 4 * opt.dual_max_iter) {
          double mid = 0.5 * (a + bb);
          double gm = rho_prime(spec, mid, opt);
          if (gm > 0.0) {
            a = mid;
          } else {
            bb = mid;
          }
          ++it;
        }
        out.iterations += it;
        double gaa = std::abs(rho_prime(spec, a, opt));
        double gbb = std::abs(rho_prime(spec, bb, opt));
        nu_star = gaa <= gbb ? a : bb;
      }
      double best = dual_value(spec, nu_star, opt);
      double best_nu = nu_star;
      // Prefer exact endpoints when they are at least as good: boundary
      // optima come out exact.
      for (double cand : {lb, ub, 0.0}) {
        if (!std::isfinite(cand)) continue;
        if (cand < lb - span_tol || cand > ub + span_tol) continue;
        if (spec.domain == MultiplierDomain::NonNegative && cand < 0.0) continue;
        double v = dual_value(spec, cand, opt);
        if (v >= best - 1e-12 * (1.0 + std::abs(best))) {
          best = v;
          best_nu = cand;
        }
      }
      out.nu = best_nu;
      out.value = best;
      if (!std::isfinite(out.value)) {
        out.status = DualStatus::EmptyDomain;
        out.note = "dual is -inf on its whole domain";
        return out;
      }
    }
  }
  for (size_t i = 0; i < spec.alpha.size(); ++i) {
    double den = spec.alpha[i] * out.nu + spec.delta[i];
    if (std::abs(den) <=
        opt.tol_zero * (1.0 + std::abs(spec.alpha[i] * out.nu) +
                        std::abs(spec.delta[i]))) {
      out.active.push_back(static_cast<int>(i));
    }
  }
  return out;
}

reformulate::PrimalPoint primal_from_dual(const DualSpec& spec, int l, double nu,
                                          ConstraintKind kind,
                                          const std::vector<double>& e_even,
                                          const Options& opt) {
  return primal_from_dual_targeted(spec, l, nu, kind, e_even,
                                   std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN(), opt);
}

reformulate::PrimalPoint primal_from_dual_targeted(
    const DualSpec& spec, int l, double nu, ConstraintKind kind,
    const std::vector<double>& e_even, double target_lo, double target_hi,
    const Options& opt) {
  const int rows = static_cast<int>(spec.alpha.size());
  const int pairs = static_cast<int>(spec.zeta.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rows);
  std::vector<int> free_rows;
  for (int i = 0; i < rows; ++i) {
    double den = spec.alpha[i] * nu + spec.delta[i];
    double act_tol = opt.tol_zero * (1.0 + std::abs(spec.alpha[i] * nu) +
                                     std::abs(spec.delta[i]));
    if (den > act_tol) {
      x[i] = -(spec.e[i] + nu * spec.b[i]) / den;
    } else {
      free_rows.push_back(i);
    }
  }
  std::vector<double> z(pairs, 0.0);

  auto constraint_sum = [&]() {
    double s = spec.c;
    for (int i = 0; i < rows; ++i) {
      s += 0.5 * spec.alpha[i] * x[i] * x[i] + spec.b[i] * x[i];
    }
    for (double zj : z) s += zj;
    return s;
  };

  // Targets on (constraint lhs + c).
  if (std::isnan(target_hi)) {
    bool tight = std::abs(nu) > opt.tol_zero;
    if (kind == ConstraintKind::Equality || tight) {
      target_lo = target_hi = 0.0;
    } else {
      target_lo = kNegInf;
      target_hi = 0.0;
    }
  }

  double s = constraint_sum();
  double need = 0.0;
  if (s > target_hi) {
    need = target_hi - s;
  } else if (s < target_lo) {
    need = target_lo - s;
  }
  double feas_tol = opt.tol_feas * (1.0 + std::abs(spec.c));

  if (std::abs(need) > 0.0) {
    bool done = false;
    // 1. a coupled block with nonzero even coefficient realizes any cross
    //    term exactly
    if (pairs > 0) {
      int sink = -1;
      double best = opt.tol_zero;
      for (int j = 0; j < pairs; ++j) {
        if (std::abs(e_even[j]) > best) {
          best = std::abs(e_even[j]);
          sink = j;
        }
      }
      if (sink >= 0) {
        z[sink] += need;
        done = true;
      }
    }
    // 2. a free quadratic coordinate, when its curvature sign permits
    if (!done) {
      for (int i : free_rows) {
        double a = spec.alpha[i], bi = spec.b[i];
        if (std::abs(a) <= opt.tol_zero) continue;
        double disc = bi * bi + 2.0 * a * need;
        if (disc < 0.0) continue;
        double r1 = (-bi + std::sqrt(disc)) / a;
        double r2 = (-bi - std::sqrt(disc)) / a;
        x[i] = std::abs(r1) <= std::abs(r2) ? r1 : r2;
        done = true;
        break;
      }
    }
    // 3. the first coupled block
    if (!done && pairs > 0) {
      z[0] += need;
      done = true;
    }
    // 4. a free linear coordinate
    if (!done) {
      for (int i : free_rows) {
        if (std::abs(spec.alpha[i]) <= opt.tol_zero &&
            std::abs(spec.b[i]) > opt.tol_zero) {
          x[i] += need / spec.b[i];
          done = true;
          break;
        }
      }
    }
    // 5. nudge a determined coordinate along the constraint: first-order
    //    objective change is -nu * need by stationarity, second order is
    //    O(need^2); verification below keeps this honest. This mops up the
    //    conditioning-limited residual of a near-boundary optimum.
    if (!done) {
      int pick = -1;
      double best_slope = opt.tol_zero;
      for (int i = 0; i < rows; ++i) {
        double slope = std::abs(spec.alpha[i] * x[i] + spec.b[i]);
        if (slope > best_slope) {
          best_slope = slope;
          pick = i;
        }
      }
      if (pick >= 0) {
        double a = spec.alpha[pick];
        double slope = a * x[pick] + spec.b[pick];
        // 1/2 a t^2 + slope t = need
        double t;
        if (std::abs(a) <= opt.tol_zero) {
          t = need / slope;
        } else {
          double disc = slope * slope + 2.0 * a * need;
          if (disc >= 0.0) {
            double r1 = (-slope + std::sqrt(disc)) / a;
            double r2 = (-slope - std::sqrt(disc)) / a;
            t = std::abs(r1) <= std::abs(r2) ? r1 : r2;
          } else {
            t = need / slope;  // best effort; verification decides
          }
        }
        x[pick] += t;
        done = true;
      }
    }
    if (!done) {
      throw NumericalFailure(
          "primal_from_dual: cannot place the constraint residual");
    }
  }

  s = constraint_sum();
  if (s > target_hi + feas_tol || s < target_lo - feas_tol) {
    throw NumericalFailure("primal_from_dual: residual allocation failed");
  }

  reformulate::PrimalPoint pp;
  pp.x = x.head(l);
  pp.y = 0.5 * pp.x.cwiseProduct(pp.x);
  pp.z = z;
  pp.x_zero = x.tail(rows - l);
  double obj = spec.c0;
  for (int i = 0; i < l; ++i) {
    obj += spec.delta[i] * pp.y[i] + spec.e[i] * pp.x[i];
  }
  for (int i = l; i < rows; ++i) obj += spec.e[i] * x[i];
  for (int j = 0; j < pairs; ++j) obj += spec.zeta[j] * z[j];
  pp.objective = obj;
  pp.constraint_value = s;

  // Verification: the point must reproduce the dual value after accounting
  // for the constraint activity.
  double rho = dual_value(spec, nu, opt);
  double expect = rho - nu * s;
  if (std::isfinite(rho) &&
      std::abs(obj - expect) > 1e-7 * (1.0 + std::abs(expect))) {
    throw NumericalFailure("primal_from_dual: recovered point does not match the dual value");
  }
  return pp;
}

IntervalDualResult maximize_interval_dual(const DualSpec& base, double lo,
                                          double hi, const Options& opt) {
  DualSpec side_hi = base;  // multiplier of (h - c2 <= 0)
  side_hi.c = base.c - hi;
  side_hi.domain = MultiplierDomain::NonNegative;

  DualSpec side_lo = base;  // multiplier of (c1 - h <= 0)
  for (auto& a : side_lo.alpha) a = -a;
  for (auto& b : side_lo.b) b = -b;
  for (auto& z : side_lo.zeta) z = -z;
  side_lo.c = lo - base.c;
  side_lo.domain = MultiplierDomain::NonNegative;

  DualResult r_hi = maximize_dual(side_hi, opt);
  DualResult r_lo = maximize_dual(side_lo, opt);

  IntervalDualResult out;
  if (r_hi.status == DualStatus::UnboundedAbove ||
      r_lo.status == DualStatus::UnboundedAbove) {
    out.status = DualStatus::UnboundedAbove;
    return out;
  }
  double v_hi = r_hi.status == DualStatus::Finite ? r_hi.value : kNegInf;
  double v_lo = r_lo.status == DualStatus::Finite ? r_lo.value : kNegInf;
  if (!std::isfinite(v_hi) && !std::isfinite(v_lo)) {
    out.status = DualStatus::EmptyDomain;
    return out;
  }
  // ties break toward the upper bound side
  bool pick_hi = v_hi >= v_lo - 1e-12 * (1.0 + std::abs(v_hi));
  out.status = DualStatus::Finite;
  out.hi_side = pick_hi;
  out.side = pick_hi ? r_hi : r_lo;
  out.side_spec = pick_hi ? side_hi : side_lo;
  out.value = pick_hi ? v_hi : v_lo;
  out.nu_hi = pick_hi ? out.side.nu : 0.0;
  out.nu_lo = pick_hi ? 0.0 : out.side.nu;
  return out;
}

}  // namespace gtrs::dual
