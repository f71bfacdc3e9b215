#include "gtrs/reformulate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gtrs/classify.hpp"
#include "gtrs/linalg.hpp"

namespace gtrs::reformulate {

using Eigen::MatrixXd;
using Eigen::VectorXd;

PreprocessResult preprocess(const GtrsProblem& p, const Options& opt) {
  if (p.A.rows() != p.dim() || p.b.size() != p.dim()) {
    throw InvalidInput("preprocess: dimension mismatch");
  }
  auto ed = linalg::sym_eig(p.A, opt);
  double scale = std::max(1.0, ed.eigenvalues.cwiseAbs().maxCoeff());
  bool psd = ed.eigenvalues.minCoeff() >= -opt.tol_eig * scale;
  if (!psd) return Proceed{};
  if (!linalg::in_range(p.A, p.b, opt.tol_eig)) return Proceed{};

  MatrixXd pinv = linalg::pseudoinverse(p.A, opt);
  double k = p.c - 0.5 * p.b.dot(pinv * p.b);
  double tol = opt.tol_zero * (1.0 + std::abs(p.c));
  if (k > tol) return Infeasible{k};
  if (k < -tol) return Proceed{};

  // Boundary case: the feasible set is the affine set A (x + A^+ b) = 0.
  ReducedUnconstrained red;
  red.base = -pinv * p.b;
  red.basis = linalg::null_space_basis(p.A, opt.tol_rank);
  red.D_red = red.basis.transpose() * p.D * red.basis;
  red.e_red = red.basis.transpose() * (p.D * red.base + p.e);
  red.constant = p.objective(red.base);
  return red;
}

std::optional<UnconstrainedOpt> minimize_unconstrained(const Eigen::MatrixXd& D,
                                                       const Eigen::VectorXd& e,
                                                       double constant,
                                                       const Options& opt) {
  const int n = static_cast<int>(D.rows());
  if (n == 0) {
    return UnconstrainedOpt{constant, VectorXd(0)};
  }
  auto ed = linalg::sym_eig(D, opt);
  double scale = std::max(1.0, ed.eigenvalues.cwiseAbs().maxCoeff());
  if (ed.eigenvalues.minCoeff() < -opt.tol_eig * scale) return std::nullopt;
  MatrixXd pinv = linalg::pseudoinverse(D, opt);
  VectorXd y = -pinv * e;
  if ((D * y + e).norm() > opt.tol_zero * (1.0 + e.norm())) {
    return std::nullopt;  // linear term escapes along a null direction
  }
  double value = 0.5 * y.dot(D * y) + e.dot(y) + constant;
  return UnconstrainedOpt{value, y};
}

Eigen::VectorXd CanonicalProblem::assemble(const Eigen::VectorXd& x_scalar,
                                           const std::vector<double>& u,
                                           const std::vector<double>& v,
                                           const Eigen::VectorXd& x_zero) const {
  VectorXd out(dim());
  out.head(l) = x_scalar;
  for (int j = 0; j < pairs(); ++j) {
    out[l + 2 * j] = u[j];
    out[l + 2 * j + 1] = v[j];
  }
  out.tail(back_map.zero_count) = x_zero;
  return out;
}

double CanonicalProblem::recompute_c0() const {
  double out = 0.0;
  for (double ev : e_even) out -= 0.5 * ev * ev;
  return out;
}

CanonicalProblem shift_cross_b(const canonical::CanonicalForm& cf,
                               const Eigen::VectorXd& e_hat,
                               const Eigen::VectorXd& b_hat, double c,
                               const Options& opt) {
  CanonicalProblem cp;
  cp.back_map.S = cf.S;
  cp.back_map.zero_count = cf.zero_count;
  cp.c = c;

  int at = 0;
  for (const auto& blk : cf.blocks) {
    if (const auto* sb = std::get_if<canonical::ScalarBlock>(&blk)) {
      cp.alpha.push_back(sb->alpha);
      cp.delta.push_back(sb->delta);
      cp.b.push_back(b_hat[at]);
      cp.e.push_back(e_hat[at]);
      at += 1;
    } else if (const auto* cb = std::get_if<canonical::CoupledBlock>(&blk)) {
      double tau = cb->tau, lam = cb->kappa;
      double b1 = b_hat[at], b2 = b_hat[at + 1];
      double e1 = e_hat[at], e2 = e_hat[at + 1];
      // substitute u' = u + tau*b2, v' = v + tau*b1: the constraint's linear
      // part on the pair vanishes and the constants move as below
      cp.c -= tau * b1 * b2;
      double e1s = e1 - lam * b1;
      double e2s = e2 - b1 - lam * b2;
      cp.obj_offset +=
          -e1 * tau * b2 - e2 * tau * b1 + tau * lam * b1 * b2 + 0.5 * tau * b1 * b1;
      cp.tau.push_back(tau);
      cp.zeta.push_back(lam);
      cp.e_odd.push_back(e1s);
      cp.e_even.push_back(e2s);
      cp.back_map.pair_shift.push_back({tau * b2, tau * b1});
      at += 2;
    } else {
      cp.b_zero.push_back(b_hat[at]);
      cp.e_zero.push_back(e_hat[at]);
      at += 1;
    }
  }
  cp.l = static_cast<int>(cp.alpha.size());
  cp.c0 = cp.recompute_c0();
  (void)opt;
  return cp;
}

double SocpProblem::objective(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& z) const {
  double out = c0;
  for (int i = 0; i < l; ++i) out += delta[i] * y[i] + e[i] * x[i];
  for (int j = 0; j < pairs(); ++j) out += zeta[j] * z[j];
  return out;
}

double SocpProblem::constraint_lhs(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& z) const {
  double out = 0.0;
  for (int i = 0; i < l; ++i) out += alpha[i] * y[i] + b[i] * x[i];
  for (int j = 0; j < pairs(); ++j) out += z[j];
  return out;
}

SocpProblem build_socp(const CanonicalProblem& cp, ConstraintKind kind,
                       const Options& opt) {
  double e_scale = 1.0;
  for (double v : cp.e) e_scale = std::max(e_scale, std::abs(v));
  for (double v : cp.e_even) e_scale = std::max(e_scale, std::abs(v));
  for (int j = 0; j < cp.pairs(); ++j) {
    if (cp.tau[j] < 0.0) {
      throw NumericalFailure(
          "build_socp: coupled block with negative orientation (problem is "
          "unbounded)");
    }
    if (std::abs(cp.e_odd[j]) > opt.tol_zero * e_scale) {
      throw NumericalFailure(
          "build_socp: odd linear term nonzero on a coupled block (problem is "
          "unbounded)");
    }
  }
  SocpProblem sp;
  sp.l = cp.l;
  sp.alpha = cp.alpha;
  sp.delta = cp.delta;
  sp.b = cp.b;
  sp.e = cp.e;
  sp.zeta = cp.zeta;
  sp.c = cp.c;
  sp.c0 = cp.recompute_c0();
  sp.obj_offset = cp.obj_offset;
  sp.kind = kind;
  return sp;
}

namespace {

/// Values of the coupled coordinates realizing cross terms z_bar, with
/// escaping blocks driven by magnitude M. For the inequality kind a block
/// with zeta = 0, e_even = 0 and z_bar > 0 is realized with a smaller cross
/// term (constraint only gets slacker).
struct PairCoords {
  std::vector<double> u, v;
};

PairCoords realize_pairs(const CanonicalProblem& cp, const std::vector<double>& z,
                         const std::vector<int>& escaping, double M,
                         ConstraintKind kind, const Options& opt) {
  PairCoords pc;
  const double tol = opt.tol_zero;
  for (int j = 0; j < cp.pairs(); ++j) {
    bool escapes = std::find(escaping.begin(), escaping.end(), j) != escaping.end();
    double vj, uj;
    if (escapes) {
      vj = 1.0 / M;
      uj = z[j] * M;
    } else if (std::abs(cp.e_even[j]) > tol) {
      vj = -cp.e_even[j];
      uj = z[j] / vj;
    } else if (std::abs(z[j]) <= tol) {
      vj = 0.0;
      uj = 0.0;
    } else if (kind == ConstraintKind::Inequality && z[j] > 0.0) {
      // the cross term may drop to zero: the constraint only loosens
      vj = 0.0;
      uj = 0.0;
    } else {
      throw NumericalFailure("recover_x: block cannot realize its cross term");
    }
    pc.u.push_back(uj);
    pc.v.push_back(vj);
  }
  return pc;
}

}  // namespace

RecoveredPoint recover_x(const PrimalPoint& point, const CanonicalProblem& cp,
                         ConstraintKind kind, double eps, const Options& opt) {
  const int l = cp.l;
  VectorXd x = point.x;
  VectorXd y = point.y;
  std::vector<double> z = point.z;
  VectorXd x_zero = point.x_zero.size() == cp.back_map.zero_count
                        ? point.x_zero
                        : VectorXd::Zero(cp.back_map.zero_count);

  // Lift cone-slack coordinates to 1/2 x_i^2 = y_i. The per-coordinate sign
  // choice keeps the linear constraint from growing.
  std::vector<int> slack;
  double y_max = y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
  double cone_tol = opt.tol_feas * (1.0 + y_max);
  for (int i = 0; i < l; ++i) {
    if (y[i] - 0.5 * x[i] * x[i] > cone_tol) slack.push_back(i);
  }
  auto lifted_x = [&](const std::vector<int>& signs) {
    VectorXd out = x;
    for (size_t k = 0; k < slack.size(); ++k) {
      out[slack[k]] = signs[k] * std::sqrt(2.0 * y[slack[k]]);
    }
    return out;
  };
  std::vector<int> signs(slack.size());
  for (size_t k = 0; k < slack.size(); ++k) {
    double bi = cp.b[slack[k]];
    signs[k] = bi > 0.0 ? -1 : 1;
  }
  x = lifted_x(signs);

  auto constraint_sum = [&](const VectorXd& xv, const std::vector<double>& zv) {
    double out = cp.c;
    for (int i = 0; i < l; ++i) {
      out += 0.5 * cp.alpha[i] * xv[i] * xv[i] + cp.b[i] * xv[i];
    }
    for (int j = 0; j < cp.pairs(); ++j) out += zv[j];
    for (int i = 0; i < cp.back_map.zero_count; ++i) {
      out += cp.b_zero[i] * x_zero[i];
    }
    return out;
  };

  // Residual reallocation into the cross terms when the lift disturbed the
  // constraint. Sink: a block whose even coefficient is nonzero realizes any
  // cross term exactly; otherwise the first block.
  double h = constraint_sum(x, z);
  double feas_tol = opt.tol_feas * (1.0 + std::abs(cp.c));
  double need = 0.0;
  if (kind == ConstraintKind::Equality) {
    need = -h;
  } else if (kind == ConstraintKind::Inequality && h > feas_tol) {
    need = -h;
  }
  if (std::abs(need) > 0.0 && !z.empty()) {
    int sink = 0;
    double best = 0.0;
    for (int j = 0; j < cp.pairs(); ++j) {
      if (std::abs(cp.e_even[j]) > best + opt.tol_zero) {
        best = std::abs(cp.e_even[j]);
        sink = j;
      }
    }
    z[sink] += need;
    need = 0.0;
  }
  if (std::abs(need) > feas_tol && slack.size() <= 20 && !slack.empty()) {
    // exhaustive sign search over the slack indices
    std::vector<int> best_signs = signs;
    double best_violation = std::abs(need);
    for (std::size_t mask = 0; mask < (1u << slack.size()); ++mask) {
      std::vector<int> trial(slack.size());
      for (size_t k = 0; k < slack.size(); ++k) {
        trial[k] = (mask >> k) & 1 ? 1 : -1;
      }
      double ht = constraint_sum(lifted_x(trial), z);
      double viol = kind == ConstraintKind::Equality ? std::abs(ht)
                                                     : std::max(ht, 0.0);
      if (viol < best_violation) {
        best_violation = viol;
        best_signs = trial;
      }
    }
    x = lifted_x(best_signs);
    need = kind == ConstraintKind::Equality ? -constraint_sum(x, z) : 0.0;
    if (kind == ConstraintKind::Inequality &&
        constraint_sum(x, z) > feas_tol) {
      need = -constraint_sum(x, z);
    }
  }
  if (std::abs(need) > feas_tol) {
    throw NumericalFailure("recover_x: no sign assignment restores feasibility");
  }

  RecoveredPoint out;
  out.unattained_blocks =
      classify::unattained_blocks(z, cp.zeta, cp.e_even, kind, opt);
  out.attained = out.unattained_blocks.empty();

  double eps_share = out.attained
                         ? 1.0
                         : eps / static_cast<double>(out.unattained_blocks.size());
  // a hair above the minimal magnitude, so the gap stays strictly inside eps
  double M = out.attained ? 1.0 : 1.05 * std::sqrt(1.0 / (2.0 * eps_share));
  PairCoords pc = realize_pairs(cp, z, out.unattained_blocks, M, kind, opt);
  for (int j = 0; j < cp.pairs(); ++j) {
    pc.u[j] -= cp.back_map.pair_shift[j][0];
    pc.v[j] -= cp.back_map.pair_shift[j][1];
  }
  VectorXd canonical_x = cp.assemble(x, pc.u, pc.v, x_zero);
  out.x = cp.back_map.S * canonical_x;
  return out;
}

}  // namespace gtrs::reformulate
