#pragma once

#include <Eigen/Core>
#include <string>
#include <variant>
#include <vector>

#include "gtrs/config.hpp"

namespace gtrs::canonical {

/// One chain of the (generalized) Jordan structure: a single eigenvalue with
/// its block sizes, nonincreasing.
struct JordanChain {
  bool complex_pair = false;
  double lambda = 0.0;      ///< real eigenvalue (or real part for complex pairs)
  double imag = 0.0;        ///< imaginary part for complex pairs
  std::vector<int> sizes;   ///< block sizes, nonincreasing
  bool has_large_block = false;  ///< some block of size >= 3 detected
};

struct JordanData {
  Eigen::MatrixXd transform;  ///< V with V^{-1} (A^{-1}D) V ~ block Jordan form
  std::vector<JordanChain> chains;
  std::vector<Eigen::MatrixXd> chain_bases;  ///< orthonormal invariant-subspace bases
  bool has_complex_pair = false;
  bool has_large_block = false;
  int chains_with_coupled_blocks = 0;  ///< number of chains containing 2x2 blocks
  double residual = 0.0;               ///< || V^{-1} M V - J || relative, when built
};

/// Block pairs of the simultaneous congruence normal form.
struct ScalarBlock {      // 1x1 pair (alpha, delta) with alpha in {-1, 0, +1}
  double alpha = 0.0;
  double delta = 0.0;
};
struct CoupledBlock {     // 2x2 pair (tau*E, tau*E*J(kappa,2)), tau = +/-1
  double tau = 1.0;
  double kappa = 0.0;
};
struct ZeroBlock {};      // (0, 0) pair

using BlockPair = std::variant<ScalarBlock, CoupledBlock, ZeroBlock>;

enum class DiagnosticKind {
  JordanTooLarge,            ///< real Jordan block of size >= 3
  ComplexPair,               ///< complex eigenvalue pair
  TypeBLarge,                ///< singular-side coupled block of size >= 2
  MultipleTwoByTwoChains,    ///< 2x2 blocks at more than one eigenvalue
};

std::string to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind;
  int size = 0;          ///< offending block size where meaningful
  double re = 0.0;       ///< complex pair data
  double im = 0.0;
};

/// Structure that rules out a finite optimum before the normal form is even
/// assembled. Carries every offending feature found.
struct EarlyDiagnostic {
  std::vector<Diagnostic> items;
};

struct CanonicalForm {
  Eigen::MatrixXd S;                ///< congruence: S^T A S = assembled A-part
  std::vector<BlockPair> blocks;    ///< scalars first, then coupled, then zeros
  int zero_count = 0;
  std::vector<int> permutation;     ///< ordered block -> discovery order
  double residual_a = 0.0;          ///< relative round-trip residuals
  double residual_d = 0.0;
  double cond_s = 0.0;
  std::vector<std::string> warnings;

  int scalar_count() const;
  int coupled_count() const;
  /// Assembled block-diagonal matrices (A-part, D-part) in block order.
  Eigen::MatrixXd assemble_a() const;
  Eigen::MatrixXd assemble_d() const;
};

using Outcome = std::variant<CanonicalForm, EarlyDiagnostic>;

/// Jordan structure of A^{-1}D for nonsingular A: clustered eigenvalues,
/// per-cluster block sizes from rank drops of (M - lambda I) and its square,
/// and an assembled chain basis. Size >= 3 blocks and complex pairs are
/// flagged, not expanded. Throws InvalidInput when A is numerically singular.
JordanData jordan_structure(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D,
                            const Options& opt = {});

/// Normal form of one chain: symmetric pair (A_i, D_i) with A_i invertible
/// and A_i^{-1} D_i having a single real eigenvalue and blocks of size <= 2.
/// Returns the congruence U and the block list (coupled blocks first).
struct ChainResult {
  Eigen::MatrixXd U;
  std::vector<BlockPair> blocks;
};
ChainResult chain_canonical(const Eigen::MatrixXd& A_i, const Eigen::MatrixXd& D_i,
                            const Options& opt = {});

/// Peels the common degenerate part off a pair whose pencil A + mu*D is
/// singular for every mu: returns a smaller pair with a regular pencil, the
/// congruence Q embedding it (Q^T A Q = diag(A', 0)), and the number of
/// (0,0) coordinate pairs split off. Throws InvalidInput when a nonsingular
/// pencil exists, and NumericalFailure when the pencil is singular but no
/// common null direction exists (such pairs have no block-diagonal normal
/// form of this kind).
struct ReducedPair {
  Eigen::MatrixXd A;
  Eigen::MatrixXd D;
  Eigen::MatrixXd Q;
  int zero_count = 0;
};
ReducedPair reduce_doubly_singular(const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& D,
                                   const Options& opt = {});

/// Simultaneous block-diagonal normal form of a symmetric pair by congruence,
/// or an early diagnostic when the structure already forces an unbounded
/// objective. Routing: invertible pencil member (including A itself) first,
/// common-null-space peeling otherwise.
Outcome canonicalize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D,
                     const Options& opt = {});

}  // namespace gtrs::canonical
