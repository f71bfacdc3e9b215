#pragma once

#include <Eigen/Core>
#include <optional>

#include "gtrs/config.hpp"

namespace gtrs::linalg {

/// Eigenvalues ascending, eigenvectors as orthonormal columns in the same
/// order.
struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

/// Spectral decomposition of a symmetric matrix. Throws InvalidInput when M
/// is not square or not symmetric within opt.tol_sym (relative).
EigenDecomposition sym_eig(const Eigen::MatrixXd& M, const Options& opt = {});

/// Moore-Penrose pseudoinverse of a symmetric matrix. Eigenvalues of
/// magnitude below tol_eig * max(1, |lambda|_max) are treated as zero.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& M, const Options& opt = {});

/// Orthonormal basis of the (numerical) null space of a possibly rectangular
/// matrix: columns v with ||M v|| <= tol * ||M||. Returns an n x k matrix,
/// k = cols - rank.
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& M, double tol);

/// Relative reciprocal condition number sigma_min / sigma_max (0 for the
/// zero matrix).
double rcond(const Eigen::MatrixXd& M);

/// Searches mu with A + mu*D invertible, probing small integers first and a
/// few seeded random draws, and prefers the best-conditioned candidate.
/// Returns nullopt when det(A + mu D) vanishes at n+1 distinct probe points,
/// i.e. identically.
std::optional<double> nonsingular_shift(const Eigen::MatrixXd& A,
                                        const Eigen::MatrixXd& D,
                                        const Options& opt = {});

/// Least-squares membership test: b in Range(M) up to tol * (1 + ||b||).
bool in_range(const Eigen::MatrixXd& M, const Eigen::VectorXd& b, double tol);

}  // namespace gtrs::linalg
