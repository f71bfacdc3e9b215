#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "gtrs/canonical.hpp"
#include "gtrs/linalg.hpp"
#include "gtrs/problem.hpp"
#include "support.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace gtrs;
using namespace gtrs::canonical;

namespace {

MatrixXd worked_A() {
  MatrixXd A(4, 4);
  A << 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 1.5;
  return A;
}

MatrixXd worked_D() {
  MatrixXd D(4, 4);
  D << 0, -1, 0, 0, -1, 1, 0, 0, 0, 0, -2, 0, 0, 0, 0, 2;
  return D;
}

double roundtrip_residual(const MatrixXd& A, const MatrixXd& D,
                          const CanonicalForm& cf) {
  double num = (cf.S.transpose() * A * cf.S - cf.assemble_a()).norm() +
               (cf.S.transpose() * D * cf.S - cf.assemble_d()).norm();
  return num / (1.0 + A.norm() + D.norm());
}

}  // namespace

TEST_CASE("jordan_structure: the indefinite 4x4 pair") {
  // oracle: eigen decomposition of A^{-1}D gives eigenvalues {-1,-1,-1, 4/3};
  // the -1 cluster holds one coupled block and one scalar.
  JordanData jd = jordan_structure(worked_A(), worked_D());
  REQUIRE(jd.chains.size() == 2);
  CHECK(!jd.has_complex_pair);
  CHECK(!jd.has_large_block);
  CHECK(jd.chains_with_coupled_blocks == 1);

  const auto& c1 = jd.chains[0];
  CHECK(c1.lambda == doctest::Approx(-1.0));
  REQUIRE(c1.sizes.size() == 2);
  CHECK(c1.sizes[0] == 2);
  CHECK(c1.sizes[1] == 1);
  const auto& c2 = jd.chains[1];
  CHECK(c2.lambda == doctest::Approx(4.0 / 3.0));
  REQUIRE(c2.sizes.size() == 1);
  CHECK(c2.sizes[0] == 1);
  CHECK(jd.residual < 1e-10);
}

TEST_CASE("jordan_structure: identity against a diagonal matrix") {
  MatrixXd D = Eigen::Vector3d(1, 2, 3).asDiagonal();
  JordanData jd = jordan_structure(MatrixXd::Identity(3, 3), D);
  REQUIRE(jd.chains.size() == 3);
  for (const auto& c : jd.chains) {
    REQUIRE(c.sizes.size() == 1);
    CHECK(c.sizes[0] == 1);
  }
}

TEST_CASE("jordan_structure: a pure coupled pair is one chain of size 2") {
  MatrixXd E(2, 2);
  E << 0, 1, 1, 0;
  MatrixXd J(2, 2);
  J << 5, 1, 0, 5;
  MatrixXd D = E * J;
  D = 0.5 * (D + D.transpose());
  // E*J(5,2) = [[0,5],[5,1]] is symmetric already
  JordanData jd = jordan_structure(E, (E * J).eval());
  REQUIRE(jd.chains.size() == 1);
  CHECK(jd.chains[0].lambda == doctest::Approx(5.0));
  REQUIRE(jd.chains[0].sizes.size() == 1);
  CHECK(jd.chains[0].sizes[0] == 2);
}

TEST_CASE("jordan_structure rejects singular A") {
  MatrixXd A = MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(jordan_structure(A, MatrixXd::Identity(2, 2)), InvalidInput);
}

TEST_CASE("chain_canonical: already-canonical coupled block") {
  MatrixXd A(2, 2), D(2, 2);
  A << 0, 1, 1, 0;
  D << 0, -1, -1, 1;
  ChainResult cr = chain_canonical(A, D);
  REQUIRE(cr.blocks.size() == 1);
  const auto* cb = std::get_if<CoupledBlock>(&cr.blocks[0]);
  REQUIRE(cb != nullptr);
  CHECK(cb->tau == doctest::Approx(1.0));
  CHECK(cb->kappa == doctest::Approx(-1.0));
  CHECK((cr.U - MatrixXd::Identity(2, 2)).norm() < 1e-9);
}

TEST_CASE("chain_canonical: scalar rescaling") {
  MatrixXd A(1, 1), D(1, 1);
  A << 4;
  D << 8;
  ChainResult cr = chain_canonical(A, D);
  REQUIRE(cr.blocks.size() == 1);
  const auto* sb = std::get_if<ScalarBlock>(&cr.blocks[0]);
  REQUIRE(sb != nullptr);
  CHECK(sb->alpha == doctest::Approx(1.0));
  CHECK(sb->delta == doctest::Approx(2.0));
  CHECK(cr.U(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("chain_canonical: singular leading block repaired by the sweep") {
  // two coupled blocks at the same eigenvalue, scrambled so the leading
  // 2x2 of the chain matrix is singular
  std::mt19937_64 rng(17);
  std::vector<BlockPair> blocks{CoupledBlock{1.0, 0.5}, CoupledBlock{-1.0, 0.5}};
  auto [A0, D0] = testsupport::assemble_pair(blocks);
  // congruence that mixes the two pairs but commutes with the Jordan part:
  // X = [[a I2, b I2],[c I2, d I2]] in pair coordinates acts blockwise
  MatrixXd X = MatrixXd::Zero(4, 4);
  X(0, 0) = X(1, 1) = 1.0;
  X(2, 0) = X(3, 1) = 1.0;  // add pair 1 into pair 2
  X(2, 2) = X(3, 3) = 1.0;
  MatrixXd A = X.transpose() * A0 * X;
  MatrixXd D = X.transpose() * D0 * X;
  // now A(0,1) = tau1 + tau2 = 0: leading block singular
  REQUIRE(std::abs(A(0, 1)) < 1e-14);

  ChainResult cr = chain_canonical(A, D);
  REQUIRE(cr.blocks.size() == 2);
  double resid = (cr.U.transpose() * A * cr.U -
                  testsupport::assemble_pair(cr.blocks).first)
                     .norm();
  CHECK(resid <= 1e-9 * (1.0 + A.norm()));
  auto keys = testsupport::block_keys(cr.blocks);
  auto expect = testsupport::block_keys(blocks);
  CHECK(testsupport::keys_match(keys, expect, 1e-8));
  (void)rng;
}

TEST_CASE("chain_canonical: every diagonal block singular forces the "
          "addition repair") {
  // two coupled blocks of opposite sign at one eigenvalue, mixed so that both
  // diagonal 2x2 blocks of the chain matrix vanish
  std::vector<BlockPair> blocks{CoupledBlock{1.0, 0.4}, CoupledBlock{-1.0, 0.4}};
  auto [A0, D0] = testsupport::assemble_pair(blocks);
  MatrixXd X = MatrixXd::Zero(4, 4);
  X(0, 0) = X(1, 1) = 1.0;
  X(2, 0) = X(3, 1) = 1.0;   // first block column: [I; I]
  X(0, 2) = X(1, 3) = 1.0;
  X(2, 2) = X(3, 3) = -1.0;  // second block column: [I; -I]
  MatrixXd A = X.transpose() * A0 * X;
  MatrixXd D = X.transpose() * D0 * X;
  REQUIRE(std::abs(A(0, 1)) < 1e-14);
  REQUIRE(std::abs(A(2, 3)) < 1e-14);

  ChainResult cr = chain_canonical(A, D);
  REQUIRE(cr.blocks.size() == 2);
  CHECK(testsupport::keys_match(testsupport::block_keys(cr.blocks),
                                testsupport::block_keys(blocks), 1e-8));
  double resid = (cr.U.transpose() * A * cr.U -
                  testsupport::assemble_pair(cr.blocks).first)
                     .norm();
  CHECK(resid <= 1e-9 * (1.0 + A.norm()));
}

TEST_CASE("reduce_doubly_singular: scalar against zero") {
  MatrixXd A = MatrixXd::Zero(2, 2), D = MatrixXd::Zero(2, 2);
  A(0, 0) = 1.0;
  ReducedPair red = reduce_doubly_singular(A, D);
  CHECK(red.zero_count == 1);
  REQUIRE(red.A.rows() == 1);
  CHECK(red.A(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(red.D(0, 0)) < 1e-12);
}

TEST_CASE("reduce_doubly_singular: equal singular pair") {
  MatrixXd A = MatrixXd::Zero(2, 2);
  A(0, 0) = 1.0;
  ReducedPair red = reduce_doubly_singular(A, A);
  CHECK(red.zero_count == 1);
  REQUIRE(red.A.rows() == 1);
  CHECK(red.A(0, 0) == doctest::Approx(1.0));
  CHECK(red.D(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("reduce_doubly_singular: planted two-dimensional common null space") {
  std::mt19937_64 rng(23);
  MatrixXd A = MatrixXd::Zero(5, 5), D = MatrixXd::Zero(5, 5);
  A.topLeftCorner(3, 3) = testsupport::random_symmetric(3, rng);
  D.topLeftCorner(3, 3) = testsupport::random_symmetric(3, rng);
  MatrixXd R = testsupport::random_congruence(5, rng);
  MatrixXd As = 0.5 * (R.transpose() * A * R + (R.transpose() * A * R).transpose());
  MatrixXd Ds = 0.5 * (R.transpose() * D * R + (R.transpose() * D * R).transpose());

  ReducedPair red = reduce_doubly_singular(As, Ds);
  // the reduction may peel zero coordinates in stages; the embedding itself
  // must be exact
  MatrixXd emb_a = MatrixXd::Zero(5, 5), emb_d = MatrixXd::Zero(5, 5);
  int m = static_cast<int>(red.A.rows());
  emb_a.topLeftCorner(m, m) = red.A;
  emb_d.topLeftCorner(m, m) = red.D;
  CHECK((red.Q.transpose() * As * red.Q - emb_a).norm() <=
        1e-9 * (1.0 + As.norm()));
  CHECK((red.Q.transpose() * Ds * red.Q - emb_d).norm() <=
        1e-9 * (1.0 + Ds.norm()));
  CHECK(red.zero_count >= 1);

  // the full canonicalization recovers both planted null directions
  auto outcome = canonicalize(As, Ds);
  const auto* cf = std::get_if<CanonicalForm>(&outcome);
  REQUIRE(cf != nullptr);
  CHECK(cf->zero_count == 2);
  CHECK(roundtrip_residual(As, Ds, *cf) <= 1e-9);
}

TEST_CASE("reduce_doubly_singular rejects pairs with a regular pencil") {
  MatrixXd A = MatrixXd::Identity(2, 2);
  std::mt19937_64 rng(3);
  MatrixXd D = testsupport::random_symmetric(2, rng);
  CHECK_THROWS_AS(reduce_doubly_singular(A, D), InvalidInput);
}

TEST_CASE("reduce_doubly_singular detects irreducible singular pencils") {
  // singular pencil with trivial common null space: no block-diagonal
  // normal form of this family exists
  MatrixXd A = Eigen::Vector3d(1, -1, 0).asDiagonal();
  MatrixXd D(3, 3);
  D << 0, 0, 1, 0, 0, 1, 1, 1, 0;
  REQUIRE(!linalg::nonsingular_shift(A, D).has_value());
  CHECK_THROWS_AS(reduce_doubly_singular(A, D), NumericalFailure);
  CHECK_THROWS_AS(canonicalize(A, D), NumericalFailure);
}

TEST_CASE("canonicalize: the indefinite 4x4 pair normalizes as expected") {
  auto outcome = canonicalize(worked_A(), worked_D());
  const auto* cf = std::get_if<CanonicalForm>(&outcome);
  REQUIRE(cf != nullptr);
  REQUIRE(cf->blocks.size() == 3);
  CHECK(cf->scalar_count() == 2);
  CHECK(cf->coupled_count() == 1);
  // scalars first: (1, -1) and (1, 4/3) in some order, then the coupled block
  std::vector<std::pair<double, double>> scalars;
  for (const auto& b : cf->blocks) {
    if (const auto* sb = std::get_if<ScalarBlock>(&b)) {
      scalars.push_back({sb->alpha, sb->delta});
    }
  }
  std::sort(scalars.begin(), scalars.end(),
            [](auto& x, auto& y) { return x.second < y.second; });
  CHECK(scalars[0].first == doctest::Approx(1.0));
  CHECK(scalars[0].second == doctest::Approx(-1.0));
  CHECK(scalars[1].first == doctest::Approx(1.0));
  CHECK(scalars[1].second == doctest::Approx(4.0 / 3.0));
  const auto* cb = std::get_if<CoupledBlock>(&cf->blocks[2]);
  REQUIRE(cb != nullptr);
  CHECK(cb->tau == doctest::Approx(1.0));
  CHECK(cb->kappa == doctest::Approx(-1.0));
  CHECK(roundtrip_residual(worked_A(), worked_D(), *cf) <= 1e-10);
}

TEST_CASE("canonicalize: identity with an anti-diagonal partner splits into "
          "two scalars") {
  MatrixXd A = MatrixXd::Identity(2, 2);
  MatrixXd D(2, 2);
  D << 0, 1, 1, 0;
  auto outcome = canonicalize(A, D);
  const auto* cf = std::get_if<CanonicalForm>(&outcome);
  REQUIRE(cf != nullptr);
  REQUIRE(cf->blocks.size() == 2);
  std::vector<double> deltas;
  for (const auto& b : cf->blocks) {
    const auto* sb = std::get_if<ScalarBlock>(&b);
    REQUIRE(sb != nullptr);
    CHECK(sb->alpha == doctest::Approx(1.0));
    deltas.push_back(sb->delta);
  }
  std::sort(deltas.begin(), deltas.end());
  CHECK(deltas[0] == doctest::Approx(-1.0));
  CHECK(deltas[1] == doctest::Approx(1.0));
  CHECK(roundtrip_residual(A, D, *cf) <= 1e-10);
}

TEST_CASE("canonicalize: singular-side coupled block of size two is an early "
          "diagnostic") {
  // pair (F, E): constraint side has the nilpotent stripe, partner is the
  // anti-diagonal; the chain of (A + mu D)^{-1} D sits at the degenerate
  // eigenvalue with a size-2 block
  MatrixXd F(2, 2), E(2, 2);
  F << 0, 0, 0, 1;
  E << 0, 1, 1, 0;
  auto outcome = canonicalize(F, E);
  const auto* diag = std::get_if<EarlyDiagnostic>(&outcome);
  REQUIRE(diag != nullptr);
  REQUIRE(diag->items.size() == 1);
  CHECK(diag->items[0].kind == DiagnosticKind::TypeBLarge);
  CHECK(diag->items[0].size == 2);
}

TEST_CASE("canonicalize: zero constraint matrix against an indefinite partner "
          "yields two singular-side scalars") {
  MatrixXd A = MatrixXd::Zero(2, 2);
  MatrixXd D(2, 2);
  D << 0, 1, 1, 0;
  auto outcome = canonicalize(A, D);
  const auto* cf = std::get_if<CanonicalForm>(&outcome);
  REQUIRE(cf != nullptr);
  std::vector<double> deltas;
  for (const auto& b : cf->blocks) {
    const auto* sb = std::get_if<ScalarBlock>(&b);
    REQUIRE(sb != nullptr);
    CHECK(sb->alpha == doctest::Approx(0.0));
    deltas.push_back(sb->delta);
  }
  std::sort(deltas.begin(), deltas.end());
  CHECK(deltas[0] == doctest::Approx(-1.0));
  CHECK(deltas[1] == doctest::Approx(1.0));
  CHECK(roundtrip_residual(A, D, *cf) <= 1e-10);
}

TEST_CASE("canonicalize: complex pair and large Jordan block diagnostics") {
  MatrixXd A(2, 2), D(2, 2);
  A << 0, 1, 1, 0;
  D << 1, 0, 0, -1;  // A^{-1} D is a rotation: eigenvalues +/- i
  auto outcome = canonicalize(A, D);
  const auto* diag = std::get_if<EarlyDiagnostic>(&outcome);
  REQUIRE(diag != nullptr);
  CHECK(diag->items[0].kind == DiagnosticKind::ComplexPair);

  MatrixXd E3 = MatrixXd::Zero(3, 3);
  E3(0, 2) = E3(1, 1) = E3(2, 0) = 1.0;
  MatrixXd J3 = MatrixXd::Zero(3, 3);
  J3.diagonal().setConstant(0.5);
  J3(0, 1) = J3(1, 2) = 1.0;
  MatrixXd D3 = E3 * J3;
  D3 = 0.5 * (D3 + D3.transpose());
  auto outcome3 = canonicalize(E3, (E3 * J3).eval());
  const auto* diag3 = std::get_if<EarlyDiagnostic>(&outcome3);
  REQUIRE(diag3 != nullptr);
  CHECK(diag3->items[0].kind == DiagnosticKind::JordanTooLarge);
}

TEST_CASE("canonicalize: multiple coupled chains at distinct eigenvalues are "
          "rejected early") {
  std::vector<BlockPair> blocks{CoupledBlock{1.0, 0.3}, CoupledBlock{1.0, -0.8}};
  auto [A, D] = testsupport::assemble_pair(blocks);
  auto outcome = canonicalize(A, D);
  const auto* diag = std::get_if<EarlyDiagnostic>(&outcome);
  REQUIRE(diag != nullptr);
  bool found = false;
  for (const auto& item : diag->items) {
    found |= item.kind == DiagnosticKind::MultipleTwoByTwoChains;
  }
  CHECK(found);
}

TEST_CASE("canonicalize: round trip and block multiset invariance under "
          "scrambling") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<BlockPair> blocks;
    int nscalars = 2 + static_cast<int>(rng() % 3);
    for (int i = 0; i < nscalars; ++i) {
      double alpha = coin(rng) ? 1.0 : -1.0;
      blocks.push_back(ScalarBlock{alpha, u(rng)});
    }
    if (coin(rng)) blocks.push_back(ScalarBlock{0.0, coin(rng) ? 1.0 : -1.0});
    if (coin(rng)) blocks.push_back(CoupledBlock{coin(rng) ? 1.0 : -1.0, u(rng)});
    if (trial % 4 == 0) blocks.push_back(ZeroBlock{});

    auto [A0, D0] = testsupport::assemble_pair(blocks);
    int n = static_cast<int>(A0.rows());
    MatrixXd R = testsupport::random_congruence(n, rng);
    MatrixXd A = 0.5 * ((R.transpose() * A0 * R) +
                        (R.transpose() * A0 * R).transpose());
    MatrixXd D = 0.5 * ((R.transpose() * D0 * R) +
                        (R.transpose() * D0 * R).transpose());

    auto outcome = canonicalize(A, D);
    const auto* cf = std::get_if<CanonicalForm>(&outcome);
    REQUIRE(cf != nullptr);
    REQUIRE(roundtrip_residual(A, D, *cf) <= 1e-8);
    REQUIRE(testsupport::keys_match(testsupport::block_keys(cf->blocks),
                                    testsupport::block_keys(blocks), 1e-6));

    // joint null space dimension equals the zero-pair count
    MatrixXd stacked(2 * n, n);
    stacked << A, D;
    CHECK(linalg::null_space_basis(stacked, 1e-8).cols() == cf->zero_count);

    // re-scramble: the multiset is stable
    MatrixXd R2 = testsupport::random_congruence(n, rng);
    MatrixXd A2 = 0.5 * ((R2.transpose() * A * R2) +
                         (R2.transpose() * A * R2).transpose());
    MatrixXd D2 = 0.5 * ((R2.transpose() * D * R2) +
                         (R2.transpose() * D * R2).transpose());
    auto outcome2 = canonicalize(A2, D2);
    const auto* cf2 = std::get_if<CanonicalForm>(&outcome2);
    REQUIRE(cf2 != nullptr);
    REQUIRE(testsupport::keys_match(testsupport::block_keys(cf2->blocks),
                                    testsupport::block_keys(cf->blocks), 1e-6));
  }
}

TEST_CASE("canonicalize: simultaneously diagonalizable inputs have no coupled "
          "blocks") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + static_cast<int>(rng() % 5);
    VectorXd a(n), d(n);
    for (int i = 0; i < n; ++i) {
      a[i] = u(rng);
      d[i] = u(rng);
    }
    auto outcome = canonicalize(MatrixXd(a.asDiagonal()), MatrixXd(d.asDiagonal()));
    const auto* cf = std::get_if<CanonicalForm>(&outcome);
    REQUIRE(cf != nullptr);
    CHECK(cf->coupled_count() == 0);
  }
}
