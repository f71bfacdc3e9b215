#include "gtrs/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "gtrs/problem.hpp"

namespace gtrs::linalg {

EigenDecomposition sym_eig(const Eigen::MatrixXd& M, const Options& opt) {
  if (M.rows() != M.cols()) {
    throw InvalidInput("sym_eig: matrix is not square");
  }
  double scale = std::max(1.0, M.norm());
  if ((M - M.transpose()).norm() > opt.tol_sym * scale) {
    throw InvalidInput("sym_eig: matrix is not symmetric within tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      ((M + M.transpose()) * 0.5).eval());
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("sym_eig: eigensolver did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& M, const Options& opt) {
  auto ed = sym_eig(M, opt);
  double cutoff = opt.tol_eig * std::max(1.0, ed.eigenvalues.cwiseAbs().maxCoeff());
  Eigen::VectorXd inv = ed.eigenvalues;
  for (int i = 0; i < inv.size(); ++i) {
    inv[i] = std::abs(inv[i]) > cutoff ? 1.0 / inv[i] : 0.0;
  }
  return ed.eigenvectors * inv.asDiagonal() * ed.eigenvectors.transpose();
}

Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& M, double tol) {
  const int n = static_cast<int>(M.cols());
  if (M.rows() == 0 || n == 0) {
    return Eigen::MatrixXd::Identity(n, n);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cutoff = tol * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

double rcond(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  double smax = sv[0];
  if (smax <= 0.0) return 0.0;
  return sv[sv.size() - 1] / smax;
}

std::optional<double> nonsingular_shift(const Eigen::MatrixXd& A,
                                        const Eigen::MatrixXd& D,
                                        const Options& opt) {
  if (A.rows() != D.rows() || A.cols() != D.cols()) {
    throw InvalidInput("nonsingular_shift: dimension mismatch");
  }
  const int n = static_cast<int>(A.rows());
  if (n == 0) return 0.0;

  std::vector<double> probes{0.0};
  for (int k = 1; static_cast<int>(probes.size()) < n + 3; ++k) {
    probes.push_back(static_cast<double>(k));
    probes.push_back(static_cast<double>(-k));
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> draw(-3.0, 3.0);
  for (int k = 0; k < 4; ++k) probes.push_back(draw(rng));

  double best_mu = 0.0, best_score = -1.0;
  int distinct_singular = 0;
  for (double mu : probes) {
    double score = rcond(A + mu * D);
    if (score > opt.tol_rank) {
      if (score > best_score) {
        best_score = score;
        best_mu = mu;
      }
    } else {
      ++distinct_singular;
    }
  }
  if (best_score < 0.0) {
    // det(A + mu D) vanished at more than n distinct points: the determinant
    // polynomial (degree <= n) is identically zero.
    (void)distinct_singular;
    return std::nullopt;
  }
  return best_mu;
}

bool in_range(const Eigen::MatrixXd& M, const Eigen::VectorXd& b, double tol) {
  if (b.size() == 0) return true;
  Eigen::VectorXd t = M.completeOrthogonalDecomposition().solve(b);
  return (M * t - b).norm() <= tol * (1.0 + b.norm());
}

}  // namespace gtrs::linalg
