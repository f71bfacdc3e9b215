#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "gtrs/canonical.hpp"
#include "gtrs/reformulate.hpp"
#include "gtrs/solver.hpp"
#include "support.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace gtrs;
using namespace gtrs::reformulate;

namespace {

GtrsProblem worked_example() {
  GtrsProblem p;
  p.A = MatrixXd(4, 4);
  p.A << 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 1.5;
  p.D = MatrixXd(4, 4);
  p.D << 0, -1, 0, 0, -1, 1, 0, 0, 0, 0, -2, 0, 0, 0, 0, 2;
  p.e = VectorXd(4);
  p.e << 0, 2, 0, -1;
  p.b = VectorXd::Zero(4);
  p.c = -1.25;
  p.kind = ConstraintKind::Inequality;
  return p;
}

/// CanonicalProblem over the raw (unnormalized) coefficients of the worked
/// example, with an identity back map: the pair is already block diagonal.
CanonicalProblem worked_example_cp() {
  CanonicalProblem cp;
  cp.l = 2;
  cp.alpha = {2.0, 1.5};
  cp.delta = {-2.0, 2.0};
  cp.b = {0.0, 0.0};
  cp.e = {0.0, -1.0};
  cp.tau = {1.0};
  cp.zeta = {-1.0};
  cp.e_odd = {0.0};
  cp.e_even = {2.0};
  cp.c = -1.25;
  cp.c0 = -2.0;
  cp.obj_offset = 0.0;
  // canonical order: scalars (x3, x4) first, then the coupled pair (x1, x2)
  MatrixXd S = MatrixXd::Zero(4, 4);
  S(2, 0) = 1.0;
  S(3, 1) = 1.0;
  S(0, 2) = 1.0;
  S(1, 3) = 1.0;
  cp.back_map.S = S;
  cp.back_map.pair_shift = {{0.0, 0.0}};
  cp.back_map.zero_count = 0;
  return cp;
}

}  // namespace

TEST_CASE("preprocess: strictly positive constraint is infeasible") {
  GtrsProblem p;
  p.A = MatrixXd::Identity(2, 2);
  p.D = MatrixXd::Identity(2, 2);
  p.e = VectorXd::Zero(2);
  p.b = VectorXd::Zero(2);
  p.c = 1.0;
  auto pre = preprocess(p);
  CHECK(std::holds_alternative<Infeasible>(pre));
}

TEST_CASE("preprocess: boundary case reduces to the null space") {
  GtrsProblem p;
  p.A = MatrixXd::Identity(2, 2);
  p.D = MatrixXd::Identity(2, 2);
  p.e = VectorXd::Zero(2);
  p.b = VectorXd::Zero(2);
  p.c = 0.0;
  auto pre = preprocess(p);
  const auto* red = std::get_if<ReducedUnconstrained>(&pre);
  REQUIRE(red != nullptr);
  CHECK(red->basis.cols() == 0);  // feasible set is the origin only
  CHECK(red->constant == doctest::Approx(0.0));
}

TEST_CASE("preprocess: cross-term objective over a degenerate constraint") {
  // f = x1 x2, h = x2^2 <= 0: feasible set is the x1 axis, value 0
  GtrsProblem p;
  p.D = MatrixXd(2, 2);
  p.D << 0, 1, 1, 0;
  p.A = MatrixXd::Zero(2, 2);
  p.A(1, 1) = 2.0;
  p.e = VectorXd::Zero(2);
  p.b = VectorXd::Zero(2);
  p.c = 0.0;
  auto pre = preprocess(p);
  const auto* red = std::get_if<ReducedUnconstrained>(&pre);
  REQUIRE(red != nullptr);
  auto m = minimize_unconstrained(red->D_red, red->e_red, red->constant);
  REQUIRE(m.has_value());
  CHECK(m->value == doctest::Approx(0.0));

  auto sol = solve(p);
  CHECK(sol.status == SolveStatus::ReducedUnconstrained);
  CHECK(sol.value == doctest::Approx(0.0));
}

TEST_CASE("preprocess: Slater holds for indefinite constraints") {
  GtrsProblem p;
  p.A = MatrixXd(2, 2);
  p.A << 1, 0, 0, -1;
  p.D = MatrixXd::Identity(2, 2);
  p.e = VectorXd::Zero(2);
  p.b = VectorXd::Zero(2);
  p.c = 5.0;
  CHECK(std::holds_alternative<Proceed>(preprocess(p)));
}

TEST_CASE("shift_cross_b: no linear term is the identity transform") {
  auto p = worked_example();
  auto outcome = canonical::canonicalize(p.A, p.D);
  const auto& cf = std::get<canonical::CanonicalForm>(outcome);
  VectorXd e_hat = cf.S.transpose() * p.e;
  VectorXd b_hat = cf.S.transpose() * p.b;
  auto cp = shift_cross_b(cf, e_hat, b_hat, p.c);
  CHECK(cp.obj_offset == doctest::Approx(0.0));
  CHECK(cp.c == doctest::Approx(p.c));
  REQUIRE(cp.pairs() == 1);
  CHECK(cp.e_odd[0] == doctest::Approx(0.0));
  CHECK(std::abs(cp.e_even[0]) == doctest::Approx(2.0));
  CHECK(cp.c0 == doctest::Approx(-2.0));
  CHECK(cp.c0 == doctest::Approx(cp.recompute_c0()));
}

TEST_CASE("shift_cross_b eliminates pair linear terms exactly") {
  // tau = 1, kappa = -1 coupled pair with constraint-side linear terms;
  // oracle: evaluate original vs shifted representations at random points
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<canonical::BlockPair> blocks{canonical::CoupledBlock{1.0, -1.0}};
  auto [A, D] = testsupport::assemble_pair(blocks);
  canonical::CanonicalForm cf;
  cf.S = MatrixXd::Identity(2, 2);
  cf.blocks = blocks;
  VectorXd e_hat(2), b_hat(2);
  e_hat << 0.0, 2.0;
  b_hat << 1.0, 2.0;
  double c = 0.7;
  auto cp = shift_cross_b(cf, e_hat, b_hat, c);
  REQUIRE(cp.pairs() == 1);
  // tau=1, lam=-1, b1=1, b2=2: e1' = e1 - lam b1 = 1, e2' = e2 - b1 - lam b2 = 3
  CHECK(cp.e_odd[0] == doctest::Approx(1.0));
  CHECK(cp.e_even[0] == doctest::Approx(3.0));
  CHECK(cp.c == doctest::Approx(c - 1.0 * 1.0 * 2.0));

  for (int k = 0; k < 5; ++k) {
    double z1 = u(rng), z2 = u(rng);
    double f_orig = -z1 * z2 + 0.5 * z2 * z2 + e_hat[0] * z1 + e_hat[1] * z2;
    double h_orig = z1 * z2 + b_hat[0] * z1 + b_hat[1] * z2 + c;
    // shifted coordinates: u' = u + tau b2, v' = v + tau b1
    double z1s = z1 + 2.0, z2s = z2 + 1.0;
    double f_shift = cp.zeta[0] * z1s * z2s + 0.5 * z2s * z2s +
                     cp.e_odd[0] * z1s + cp.e_even[0] * z2s + cp.obj_offset;
    double h_shift = z1s * z2s + cp.c;
    REQUIRE(std::abs(f_orig - f_shift) <= 1e-12 * (1.0 + std::abs(f_orig)));
    REQUIRE(std::abs(h_orig - h_shift) <= 1e-12 * (1.0 + std::abs(h_orig)));
  }
}

TEST_CASE("build_socp reproduces the textbook display on raw coefficients") {
  auto cp = worked_example_cp();
  auto sp = build_socp(cp, ConstraintKind::Inequality);
  // objective: -z1 - 2 y3 + 2 y4 - x4 - 2 (the z coefficient is the coupled
  // eigenvalue -1), constraint z1 + 2 y3 + 1.5 y4 <= 1.25
  CHECK(sp.zeta[0] == doctest::Approx(-1.0));
  CHECK(sp.delta[0] == doctest::Approx(-2.0));
  CHECK(sp.delta[1] == doctest::Approx(2.0));
  CHECK(sp.e[1] == doctest::Approx(-1.0));
  CHECK(sp.c0 == doctest::Approx(-2.0));
  CHECK(sp.alpha[0] == doctest::Approx(2.0));
  CHECK(sp.alpha[1] == doctest::Approx(1.5));
  CHECK(sp.c == doctest::Approx(-1.25));

  VectorXd x(2), y(2);
  VectorXd z(1);
  x << 0.0, 0.2857;
  y << 7.0830, 0.0408;
  z << -12.9773;
  CHECK(sp.objective(x, y, z) ==
        doctest::Approx(-z[0] - 2 * y[0] + 2 * y[1] - x[1] - 2));
  CHECK(sp.objective(x, y, z) == doctest::Approx(-3.3929).epsilon(1e-3));
  CHECK(sp.constraint_lhs(x, y, z) ==
        doctest::Approx(z[0] + 2 * y[0] + 1.5 * y[1]));
}

TEST_CASE("build_socp with no coupled blocks has an empty z") {
  std::vector<canonical::BlockPair> blocks{canonical::ScalarBlock{1.0, 1.0},
                                           canonical::ScalarBlock{-1.0, 0.5}};
  canonical::CanonicalForm cf;
  cf.S = MatrixXd::Identity(2, 2);
  cf.blocks = blocks;
  auto cp = shift_cross_b(cf, VectorXd::Zero(2), VectorXd::Zero(2), -1.0);
  auto sp = build_socp(cp, ConstraintKind::Inequality);
  CHECK(sp.pairs() == 0);
  auto sp_eq = build_socp(cp, ConstraintKind::Equality);
  CHECK(sp_eq.kind == ConstraintKind::Equality);
  CHECK(sp_eq.alpha == sp.alpha);
}

TEST_CASE("build_socp rejects leftover odd coefficients") {
  auto cp = worked_example_cp();
  cp.e_odd[0] = 0.5;
  CHECK_THROWS_AS(build_socp(cp, ConstraintKind::Inequality), NumericalFailure);
}

TEST_CASE("recover_x lifts the textbook conic point to the known optimizer") {
  auto cp = worked_example_cp();
  PrimalPoint point;
  point.x = VectorXd(2);
  point.x << 0.0, 0.2857;
  point.y = VectorXd(2);
  point.y << 7.0830, 0.0408;
  point.z = {-12.9773};
  point.x_zero = VectorXd(0);

  auto rec = recover_x(point, cp, ConstraintKind::Inequality, 1e-6);
  CHECK(rec.attained);
  REQUIRE(rec.x.size() == 4);
  CHECK(rec.x[0] == doctest::Approx(6.48865).epsilon(1e-3));
  CHECK(rec.x[1] == doctest::Approx(-2.0));
  CHECK(std::abs(rec.x[2]) == doctest::Approx(3.7638).epsilon(1e-3));
  CHECK(rec.x[3] == doctest::Approx(0.2857));
  auto p = worked_example();
  CHECK(p.objective(rec.x) == doctest::Approx(-3.3929).epsilon(1e-3));
  CHECK(p.feasible(rec.x, 1e-3));
}

TEST_CASE("recover_x is the identity lift when cones are tight") {
  std::vector<canonical::BlockPair> blocks{canonical::ScalarBlock{1.0, 1.0}};
  canonical::CanonicalForm cf;
  cf.S = MatrixXd::Identity(1, 1);
  cf.blocks = blocks;
  auto cp = shift_cross_b(cf, VectorXd::Zero(1), VectorXd::Zero(1), -1.0);
  PrimalPoint point;
  point.x = VectorXd(1);
  point.x << 0.7;
  point.y = VectorXd(1);
  point.y << 0.5 * 0.49;
  point.x_zero = VectorXd(0);
  auto rec = recover_x(point, cp, ConstraintKind::Inequality, 1e-6);
  CHECK(rec.x[0] == doctest::Approx(0.7));
}

TEST_CASE("recover_x: escaping block obeys the epsilon budget") {
  // single coupled block, zeta = -1, even coefficient 0, cross term 1:
  // f = -u v + v^2/2, h = u v - 1 <= 0, infimum -1 unattained
  std::vector<canonical::BlockPair> blocks{canonical::CoupledBlock{1.0, -1.0}};
  canonical::CanonicalForm cf;
  cf.S = MatrixXd::Identity(2, 2);
  cf.blocks = blocks;
  auto cp = shift_cross_b(cf, VectorXd::Zero(2), VectorXd::Zero(2), -1.0);
  PrimalPoint point;
  point.x = VectorXd(0);
  point.y = VectorXd(0);
  point.z = {1.0};
  point.x_zero = VectorXd(0);

  GtrsProblem p;
  std::tie(p.A, p.D) = testsupport::assemble_pair(blocks);
  p.e = VectorXd::Zero(2);
  p.b = VectorXd::Zero(2);
  p.c = -1.0;
  const double v_inf = -1.0;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    auto rec = recover_x(point, cp, ConstraintKind::Inequality, eps);
    CHECK(!rec.attained);
    double gap = p.objective(rec.x) - v_inf;
    CHECK(gap > 0.0);
    CHECK(gap <= eps * (1.0 + 1e-12));
    CHECK(p.feasible(rec.x, 1e-9));
  }
}

TEST_CASE("value preservation through canonical coordinates on random bounded "
          "instances") {
  std::mt19937_64 rng(61);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + static_cast<int>(rng() % 7);
    auto inst = testsupport::random_bounded_instance(n, rng, trial % 3 == 0);
    auto outcome = canonical::canonicalize(inst.p.A, inst.p.D);
    const auto* cf = std::get_if<canonical::CanonicalForm>(&outcome);
    REQUIRE(cf != nullptr);
    VectorXd e_hat = cf->S.transpose() * inst.p.e;
    VectorXd b_hat = cf->S.transpose() * inst.p.b;
    auto cp = shift_cross_b(*cf, e_hat, b_hat, inst.p.c);
    REQUIRE(cp.c0 == doctest::Approx(cp.recompute_c0()));

    // evaluate both representations at mapped random points
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 3; ++k) {
      VectorXd xs(cp.l);
      for (int i = 0; i < cp.l; ++i) xs[i] = u(rng);
      std::vector<double> uu(cp.pairs()), vv(cp.pairs());
      for (int j = 0; j < cp.pairs(); ++j) {
        uu[j] = u(rng);
        vv[j] = u(rng);
      }
      VectorXd xz(cp.back_map.zero_count);
      for (int i = 0; i < xz.size(); ++i) xz[i] = u(rng);
      // shifted-coordinate evaluation
      double f_c = cp.obj_offset;
      double h_c = cp.c;
      for (int i = 0; i < cp.l; ++i) {
        f_c += 0.5 * cp.delta[i] * xs[i] * xs[i] + cp.e[i] * xs[i];
        h_c += 0.5 * cp.alpha[i] * xs[i] * xs[i] + cp.b[i] * xs[i];
      }
      for (int j = 0; j < cp.pairs(); ++j) {
        f_c += cp.zeta[j] * uu[j] * vv[j] + 0.5 * vv[j] * vv[j] +
               cp.e_odd[j] * uu[j] + cp.e_even[j] * vv[j];
        h_c += uu[j] * vv[j];
      }
      for (int i = 0; i < xz.size(); ++i) {
        f_c += cp.e_zero[i] * xz[i];
        h_c += cp.b_zero[i] * xz[i];
      }
      // map to original coordinates (undo the pair shifts)
      std::vector<double> u0 = uu, v0 = vv;
      for (int j = 0; j < cp.pairs(); ++j) {
        u0[j] -= cp.back_map.pair_shift[j][0];
        v0[j] -= cp.back_map.pair_shift[j][1];
      }
      VectorXd xc = cp.assemble(xs, u0, v0, xz);
      VectorXd x = cp.back_map.S * xc;
      REQUIRE(std::abs(inst.p.objective(x) - f_c) <=
              1e-9 * (1.0 + std::abs(f_c)));
      REQUIRE(std::abs(inst.p.constraint(x) - h_c) <=
              1e-9 * (1.0 + std::abs(h_c)));
      ++checked;
    }
  }
  CHECK(checked > 0);
}
