#include "gtrs/canonical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtrs/linalg.hpp"
#include "gtrs/problem.hpp"

namespace gtrs::canonical {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kTinyNorm = 1e-150;

int svd_rank(const MatrixXd& M, double tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  double cutoff = tol * std::max(1.0, sv[0]);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  return rank;
}

MatrixXd symmetrized(const MatrixXd& M) { return 0.5 * (M + M.transpose()); }

/// Smallest-singular-value right vectors: orthonormal basis of the numerical
/// kernel-like subspace of dimension `count`.
MatrixXd smallest_right_vectors(const MatrixXd& M, int count) {
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(count);
}

}  // namespace

std::string to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::JordanTooLarge: return "JordanTooLarge";
    case DiagnosticKind::ComplexPair: return "ComplexPair";
    case DiagnosticKind::TypeBLarge: return "TypeBLarge";
    case DiagnosticKind::MultipleTwoByTwoChains: return "MultipleTwoByTwoChains";
  }
  return "?";
}

int CanonicalForm::scalar_count() const {
  int k = 0;
  for (const auto& b : blocks) {
    if (std::holds_alternative<ScalarBlock>(b)) ++k;
  }
  return k;
}

int CanonicalForm::coupled_count() const {
  int k = 0;
  for (const auto& b : blocks) {
    if (std::holds_alternative<CoupledBlock>(b)) ++k;
  }
  return k;
}

Eigen::MatrixXd CanonicalForm::assemble_a() const {
  int n = static_cast<int>(S.rows());
  MatrixXd out = MatrixXd::Zero(n, n);
  int at = 0;
  for (const auto& b : blocks) {
    if (const auto* s = std::get_if<ScalarBlock>(&b)) {
      out(at, at) = s->alpha;
      at += 1;
    } else if (const auto* cp = std::get_if<CoupledBlock>(&b)) {
      out(at, at + 1) = cp->tau;
      out(at + 1, at) = cp->tau;
      at += 2;
    } else {
      at += 1;
    }
  }
  return out;
}

Eigen::MatrixXd CanonicalForm::assemble_d() const {
  int n = static_cast<int>(S.rows());
  MatrixXd out = MatrixXd::Zero(n, n);
  int at = 0;
  for (const auto& b : blocks) {
    if (const auto* s = std::get_if<ScalarBlock>(&b)) {
      out(at, at) = s->delta;
      at += 1;
    } else if (const auto* cp = std::get_if<CoupledBlock>(&b)) {
      out(at, at + 1) = cp->tau * cp->kappa;
      out(at + 1, at) = cp->tau * cp->kappa;
      out(at + 1, at + 1) = cp->tau;
      at += 2;
    } else {
      at += 1;
    }
  }
  return out;
}

JordanData jordan_structure(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D,
                            const Options& opt) {
  if (A.rows() != A.cols() || A.rows() != D.rows() || D.rows() != D.cols()) {
    throw InvalidInput("jordan_structure: dimension mismatch");
  }
  const int n = static_cast<int>(A.rows());
  JordanData jd;
  jd.transform = MatrixXd::Identity(n, n);
  if (n == 0) return jd;
  if (linalg::rcond(A) <= opt.tol_rank) {
    throw InvalidInput("jordan_structure: A is numerically singular");
  }

  MatrixXd M = A.fullPivLu().solve(D);
  Eigen::EigenSolver<MatrixXd> es(M);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("jordan_structure: eigensolver did not converge");
  }

  // A defective eigenvalue of multiplicity k splits numerically by roughly
  // eps^(1/k), often into complex conjugates; imaginary parts below this
  // threshold are treated as splitting artifacts, not genuine complex pairs.
  auto defect_tol = [&](double re) { return 1e-4 * (1.0 + std::abs(re)); };

  struct Member {
    double re;
    double im_abs;
  };
  std::vector<Member> members;
  for (int i = 0; i < n; ++i) {
    std::complex<double> lam = es.eigenvalues()[i];
    if (std::abs(lam.imag()) > defect_tol(lam.real())) {
      if (lam.imag() > 0.0) {
        JordanChain chain;
        chain.complex_pair = true;
        chain.lambda = lam.real();
        chain.imag = lam.imag();
        chain.sizes = {2};
        jd.chains.push_back(chain);
        jd.chain_bases.emplace_back();
        jd.has_complex_pair = true;
      }
    } else {
      members.push_back({lam.real(), std::abs(lam.imag())});
    }
  }

  std::sort(members.begin(), members.end(),
            [](const Member& a, const Member& b) { return a.re < b.re; });
  struct ClusterM {
    std::vector<Member> ms;
    double mean() const {
      double s = 0.0;
      for (const auto& m : ms) s += m.re;
      return s / ms.size();
    }
    double radius() const {
      double mu = mean(), r = 0.0;
      for (const auto& m : ms) {
        r = std::max(r, std::hypot(m.re - mu, m.im_abs));
      }
      return r;
    }
  };
  std::vector<ClusterM> clusters;
  for (const auto& m : members) {
    if (!clusters.empty() && std::abs(m.re - clusters.back().ms.back().re) <=
                                 opt.tol_cluster * (1.0 + std::abs(m.re))) {
      clusters.back().ms.push_back(m);
    } else {
      clusters.push_back({{m}});
    }
  }

  // Rank analysis with thresholds widened by the cluster radius: directions
  // belonging to the cluster produce singular values on the order of the
  // eigenvalue spread.
  enum class Verdict { Ok, Large, Inconsistent };
  struct Analysis {
    Verdict verdict = Verdict::Inconsistent;
    int g = 0;
    std::vector<int> sizes;
  };
  auto analyze = [&](double lambda, double radius, int m1) {
    Analysis out;
    MatrixXd B = M - lambda * MatrixXd::Identity(n, n);
    double tol_b = std::max(opt.tol_rank, 3.0 * radius);
    int g = std::min(n - svd_rank(B, tol_b), m1);
    out.g = g;
    if (g <= 0) return out;
    if (g == m1) {
      out.verdict = Verdict::Ok;
      out.sizes.assign(m1, 1);
      return out;
    }
    MatrixXd B2 = B * B;
    double tol_b2 = std::max(opt.tol_rank, 9.0 * radius * radius +
                                               3.0 * radius * opt.tol_cluster);
    int s2 = std::min(n - svd_rank(B2, tol_b2), m1);
    if (s2 < m1) {
      out.verdict = Verdict::Large;
      return out;
    }
    int coupled = m1 - g;
    int single = 2 * g - m1;
    if (single < 0) return out;
    out.verdict = Verdict::Ok;
    out.sizes.assign(coupled, 2);
    out.sizes.insert(out.sizes.end(), single, 1);
    return out;
  };

  std::vector<MatrixXd> v_cols;
  std::vector<std::vector<int>> v_jordan_sizes;
  for (size_t ci = 0; ci < clusters.size(); ++ci) {
    int m1 = static_cast<int>(clusters[ci].ms.size());
    double lambda = clusters[ci].mean();
    double radius = clusters[ci].radius();
    Analysis an = analyze(lambda, radius, m1);
    if (an.verdict == Verdict::Inconsistent) {
      // widen: absorb neighbor clusters within the defect radius (a split
      // multiple eigenvalue scatters far beyond the cluster tolerance)
      while (ci + 1 < clusters.size() &&
             std::abs(clusters[ci + 1].mean() - lambda) <= defect_tol(lambda)) {
        for (const auto& m : clusters[ci + 1].ms) clusters[ci].ms.push_back(m);
        clusters.erase(clusters.begin() + ci + 1);
        lambda = clusters[ci].mean();
      }
      m1 = static_cast<int>(clusters[ci].ms.size());
      radius = std::max(clusters[ci].radius(), opt.tol_cluster);
      an = analyze(lambda, radius, m1);
    }
    if (an.verdict == Verdict::Inconsistent) {
      bool small_imag = false;
      for (const auto& m : clusters[ci].ms) small_imag |= m.im_abs > 0.0;
      if (small_imag && m1 >= 2) {
        JordanChain chain;
        chain.complex_pair = true;
        chain.lambda = lambda;
        chain.imag = clusters[ci].radius();
        chain.sizes = {2};
        jd.chains.push_back(chain);
        jd.chain_bases.emplace_back();
        jd.has_complex_pair = true;
        continue;
      }
      throw NumericalFailure("jordan_structure: inconsistent rank decisions");
    }

    JordanChain chain;
    chain.lambda = lambda;
    MatrixXd B = M - lambda * MatrixXd::Identity(n, n);
    MatrixXd basis;
    if (an.verdict == Verdict::Large) {
      chain.has_large_block = true;
      jd.has_large_block = true;
      chain.sizes.assign(1, 3);  // at least one block of size >= 3
    } else {
      chain.sizes = an.sizes;
      bool coupled = !an.sizes.empty() && an.sizes.front() >= 2;
      if (coupled) {
        basis = smallest_right_vectors(B * B, m1);
        jd.chains_with_coupled_blocks += 1;
      } else {
        basis = smallest_right_vectors(B, m1);
      }
    }
    jd.chains.push_back(chain);
    jd.chain_bases.push_back(basis);

    if (chain.has_large_block || basis.size() == 0) continue;

    // Jordan vectors inside the invariant subspace.
    int coupled = static_cast<int>(
        std::count(chain.sizes.begin(), chain.sizes.end(), 2));
    MatrixXd cols(n, m1);
    if (coupled == 0) {
      cols = basis;
    } else {
      MatrixXd Nsub = basis.transpose() * (B * basis);
      Eigen::JacobiSVD<MatrixXd> svd(Nsub, Eigen::ComputeFullU | Eigen::ComputeFullV);
      MatrixXd W2 = svd.matrixV().leftCols(coupled);
      MatrixXd V1 = Nsub * W2;
      // kernel of Nsub minus the span of V1
      MatrixXd K = svd.matrixV().rightCols(m1 - coupled);
      Eigen::HouseholderQR<MatrixXd> qr(V1);
      MatrixXd V1o = qr.householderQ() * MatrixXd::Identity(m1, coupled);
      MatrixXd G = K - V1o * (V1o.transpose() * K);
      int single = m1 - 2 * coupled;
      MatrixXd U1;
      if (single > 0) {
        Eigen::JacobiSVD<MatrixXd> gsvd(G, Eigen::ComputeFullU);
        U1 = gsvd.matrixU().leftCols(single);
      }
      MatrixXd sub(m1, m1);
      for (int j = 0; j < coupled; ++j) {
        sub.col(2 * j) = V1.col(j);
        sub.col(2 * j + 1) = W2.col(j);
      }
      if (single > 0) sub.rightCols(single) = U1;
      cols = basis * sub;
    }
    v_cols.push_back(cols);
    v_jordan_sizes.push_back(chain.sizes);
  }

  // Assemble the transform and measure the Jordan residual when the
  // structure is clean.
  if (!jd.has_complex_pair && !jd.has_large_block) {
    int total = 0;
    for (const auto& c : v_cols) total += static_cast<int>(c.cols());
    if (total == n) {
      MatrixXd V(n, n);
      int at = 0;
      for (const auto& c : v_cols) {
        V.middleCols(at, c.cols()) = c;
        at += static_cast<int>(c.cols());
      }
      jd.transform = V;
      MatrixXd J = MatrixXd::Zero(n, n);
      at = 0;
      int ci = 0;
      for (const auto& sizes : v_jordan_sizes) {
        double lam = 0.0;
        // recover the chain eigenvalue for this group
        int seen = 0;
        for (const auto& ch : jd.chains) {
          if (ch.complex_pair || ch.has_large_block) continue;
          if (seen == ci) {
            lam = ch.lambda;
            break;
          }
          ++seen;
        }
        for (int s : sizes) {
          for (int k = 0; k < s; ++k) {
            J(at + k, at + k) = lam;
            if (k + 1 < s) J(at + k, at + k + 1) = 1.0;
          }
          at += s;
        }
        ++ci;
      }
      MatrixXd MV = V.fullPivLu().solve(M * V);
      jd.residual = (MV - J).norm() / (1.0 + M.norm());
    }
  }
  return jd;
}

ChainResult chain_canonical(const Eigen::MatrixXd& A_in,
                            const Eigen::MatrixXd& D_in, const Options& opt) {
  const int d = static_cast<int>(A_in.rows());
  if (d == 0) return {MatrixXd::Identity(0, 0), {}};
  MatrixXd Ai = symmetrized(A_in);
  MatrixXd Di = symmetrized(D_in);
  if (linalg::rcond(Ai) <= opt.tol_rank) {
    throw InvalidInput("chain_canonical: block is numerically singular");
  }

  MatrixXd M = Ai.fullPivLu().solve(Di);
  double kappa = M.trace() / d;
  MatrixXd N = M - kappa * MatrixXd::Identity(d, d);
  int k2 = svd_rank(N, std::sqrt(opt.tol_rank));
  if (2 * k2 > d) {
    throw InvalidInput("chain_canonical: chain is not made of blocks of size <= 2");
  }
  if (k2 > 0) {
    double n2 = (N * N).norm();
    if (n2 > 1e-6 * std::max(1.0, N.norm() * N.norm())) {
      throw InvalidInput("chain_canonical: a block of size > 2 is present");
    }
  }

  ChainResult out;
  if (k2 == 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Ai);
    VectorXd a = es.eigenvalues();
    MatrixXd U = es.eigenvectors();
    VectorXd scale(d);
    for (int i = 0; i < d; ++i) scale[i] = 1.0 / std::sqrt(std::abs(a[i]));
    out.U = U * scale.asDiagonal();
    MatrixXd Dt = out.U.transpose() * Di * out.U;
    for (int i = 0; i < d; ++i) {
      out.blocks.push_back(ScalarBlock{signum(a[i]), Dt(i, i)});
    }
    return out;
  }

  // Jordan basis: pairs (N w, w) for the coupled part, kernel complement for
  // the scalars.
  Eigen::JacobiSVD<MatrixXd> nsvd(N, Eigen::ComputeFullU | Eigen::ComputeFullV);
  MatrixXd W2 = nsvd.matrixV().leftCols(k2);
  MatrixXd V1 = N * W2;
  MatrixXd K = nsvd.matrixV().rightCols(d - k2);
  Eigen::HouseholderQR<MatrixXd> qr(V1);
  MatrixXd V1o = qr.householderQ() * MatrixXd::Identity(d, k2);
  int single = d - 2 * k2;
  MatrixXd T(d, d);
  for (int j = 0; j < k2; ++j) {
    T.col(2 * j) = V1.col(j);
    T.col(2 * j + 1) = W2.col(j);
  }
  if (single > 0) {
    MatrixXd G = K - V1o * (V1o.transpose() * K);
    Eigen::JacobiSVD<MatrixXd> gsvd(G, Eigen::ComputeFullU);
    T.rightCols(single) = gsvd.matrixU().leftCols(single);
  }

  MatrixXd Ab = symmetrized(T.transpose() * Ai * T);
  MatrixXd Db = symmetrized(T.transpose() * Di * T);
  MatrixXd U = T;

  auto apply = [&](const MatrixXd& X) {
    Ab = symmetrized(X.transpose() * Ab * X);
    Db = symmetrized(X.transpose() * Db * X);
    U = U * X;
  };

  double piv_scale = std::max(1.0, Ab.cwiseAbs().maxCoeff());
  double piv_tol = std::sqrt(opt.tol_rank) * piv_scale * piv_scale;
  auto det2 = [&](int r, int c) {
    return Ab(r, c) * Ab(r + 1, c + 1) - Ab(r, c + 1) * Ab(r + 1, c);
  };

  for (int j = 0; j < k2; ++j) {
    const int r0 = 2 * j;
    if (std::abs(det2(r0, r0)) <= piv_tol) {
      int swap_s = -1;
      for (int s = j + 1; s < k2; ++s) {
        if (std::abs(det2(2 * s, 2 * s)) > piv_tol) {
          swap_s = s;
          break;
        }
      }
      if (swap_s >= 0) {
        MatrixXd P = MatrixXd::Identity(d, d);
        P(r0, r0) = P(r0 + 1, r0 + 1) = 0.0;
        P(2 * swap_s, 2 * swap_s) = P(2 * swap_s + 1, 2 * swap_s + 1) = 0.0;
        P(2 * swap_s, r0) = P(2 * swap_s + 1, r0 + 1) = 1.0;
        P(r0, 2 * swap_s) = P(r0 + 1, 2 * swap_s + 1) = 1.0;
        apply(P);
      } else {
        int add_s = -1;
        double best = piv_tol;
        for (int s = j + 1; s < k2; ++s) {
          double val = std::abs(det2(r0, 2 * s));
          if (val > best) {
            best = val;
            add_s = s;
          }
        }
        if (add_s < 0) {
          throw NumericalFailure("chain_canonical: no usable pivot block");
        }
        MatrixXd X = MatrixXd::Identity(d, d);
        X(2 * add_s, r0) = 1.0;
        X(2 * add_s + 1, r0 + 1) = 1.0;
        apply(X);
      }
    }
    // decouple block j from everything after it
    int rest0 = r0 + 2;
    if (rest0 < d) {
      Eigen::Matrix2d Ajj = Ab.block<2, 2>(r0, r0);
      MatrixXd Y = MatrixXd::Identity(d, d);
      Y.block(r0, rest0, 2, d - rest0) =
          -Ajj.inverse() * Ab.block(r0, rest0, 2, d - rest0);
      apply(Y);
    }
  }

  if (single > 0) {
    MatrixXd tail = symmetrized(Ab.bottomRightCorner(single, single));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(tail);
    MatrixXd Q = MatrixXd::Identity(d, d);
    Q.bottomRightCorner(single, single) = es.eigenvectors();
    apply(Q);
  }

  MatrixXd P = MatrixXd::Identity(d, d);
  for (int j = 0; j < k2; ++j) {
    const int r0 = 2 * j;
    double a1 = Ab(r0, r0 + 1);
    double a2 = Ab(r0 + 1, r0 + 1);
    double s = 1.0 / std::sqrt(std::abs(a1));
    P(r0, r0) = s;
    P(r0 + 1, r0 + 1) = s;
    P(r0, r0 + 1) = -a2 / (2.0 * a1) * s;
  }
  for (int i = 2 * k2; i < d; ++i) {
    P(i, i) = 1.0 / std::sqrt(std::abs(Ab(i, i)));
  }
  apply(P);

  for (int j = 0; j < k2; ++j) {
    const int r0 = 2 * j;
    double tau = signum(Ab(r0, r0 + 1));
    out.blocks.push_back(CoupledBlock{tau, Db(r0, r0 + 1) / tau});
  }
  for (int i = 2 * k2; i < d; ++i) {
    out.blocks.push_back(ScalarBlock{signum(Ab(i, i)), Db(i, i)});
  }
  out.U = U;
  return out;
}

ReducedPair reduce_doubly_singular(const Eigen::MatrixXd& A_in,
                                   const Eigen::MatrixXd& D_in,
                                   const Options& opt) {
  if (linalg::nonsingular_shift(A_in, D_in, opt).has_value()) {
    throw InvalidInput("reduce_doubly_singular: the pencil has a nonsingular member");
  }
  const int n = static_cast<int>(A_in.rows());
  MatrixXd A = symmetrized(A_in);
  MatrixXd D = symmetrized(D_in);

  // Split off the range of A.
  Eigen::SelfAdjointEigenSolver<MatrixXd> ea(A);
  double cutoff_a =
      opt.tol_rank * std::max(1.0, ea.eigenvalues().cwiseAbs().maxCoeff());
  std::vector<int> nz, ze;
  for (int i = 0; i < n; ++i) {
    (std::abs(ea.eigenvalues()[i]) > cutoff_a ? nz : ze).push_back(i);
  }
  const int q = static_cast<int>(nz.size());
  MatrixXd Q1(n, n);
  VectorXd a1(q);
  for (int i = 0; i < q; ++i) {
    Q1.col(i) = ea.eigenvectors().col(nz[i]);
    a1[i] = ea.eigenvalues()[nz[i]];
  }
  for (int i = 0; i < n - q; ++i) Q1.col(q + i) = ea.eigenvectors().col(ze[i]);

  MatrixXd Dbar = symmetrized(Q1.transpose() * D * Q1);

  // Split off the nonsingular part of the trailing block of D.
  MatrixXd D3 = Dbar.bottomRightCorner(n - q, n - q);
  int s = 0;
  MatrixXd Q2 = MatrixXd::Identity(n, n);
  VectorXd d6;
  if (n - q > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> ed3(symmetrized(D3));
    double cutoff_d =
        opt.tol_rank * std::max(1.0, ed3.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<int> dn, dz;
    for (int i = 0; i < n - q; ++i) {
      (std::abs(ed3.eigenvalues()[i]) > cutoff_d ? dn : dz).push_back(i);
    }
    s = static_cast<int>(dn.size());
    MatrixXd S3(n - q, n - q);
    d6.resize(s);
    for (int i = 0; i < s; ++i) {
      S3.col(i) = ed3.eigenvectors().col(dn[i]);
      d6[i] = ed3.eigenvalues()[dn[i]];
    }
    for (int i = 0; i < n - q - s; ++i) S3.col(s + i) = ed3.eigenvectors().col(dz[i]);
    Q2.bottomRightCorner(n - q, n - q) = S3;
  }
  MatrixXd Dhat = symmetrized(Q2.transpose() * Dbar * Q2);

  // Clear the coupling between the range of A and the D6 block.
  MatrixXd Q3 = MatrixXd::Identity(n, n);
  if (s > 0 && q > 0) {
    MatrixXd D4 = Dhat.block(0, q, q, s);
    Q3.block(q, 0, s, q) =
        -(d6.cwiseInverse().asDiagonal() * D4.transpose()).eval();
  }
  MatrixXd Dtil = symmetrized(Q3.transpose() * Dhat * Q3);

  // Column compression of the remaining coupling block.
  const int w = n - q - s;
  MatrixXd D5 = q > 0 && w > 0 ? Dtil.block(0, q + s, q, w) : MatrixXd(q, w);
  int r = 0;
  MatrixXd Q4 = MatrixXd::Identity(n, n);
  if (q > 0 && w > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(D5, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cutoff = opt.tol_rank * std::max(1.0, sv.size() ? sv[0] : 0.0);
    for (int i = 0; i < sv.size(); ++i) {
      if (sv[i] > cutoff) ++r;
    }
    Q4.bottomRightCorner(w, w) = svd.matrixV();
  }
  const int zero_added = n - q - s - r;
  if (zero_added <= 0) {
    throw NumericalFailure(
        "reduce_doubly_singular: singular pencil without a common null "
        "direction; the pair admits no block-diagonal normal form");
  }
  MatrixXd Dchk = symmetrized(Q4.transpose() * Dtil * Q4);

  const int m = q + s + r;
  ReducedPair out;
  out.A = MatrixXd::Zero(m, m);
  out.A.topLeftCorner(q, q) = MatrixXd(a1.asDiagonal());
  out.D = Dchk.topLeftCorner(m, m);
  out.Q = Q1 * Q2 * Q3 * Q4;
  out.zero_count = zero_added;
  return out;
}

namespace {

struct CoreResult {
  MatrixXd S;
  std::vector<BlockPair> blocks;
  std::vector<Diagnostic> diags;
};

CoreResult canonicalize_core(const MatrixXd& A, const MatrixXd& D,
                             const Options& opt, int depth) {
  const int n = static_cast<int>(A.rows());
  CoreResult out;
  out.S = MatrixXd::Identity(n, n);
  if (n == 0) return out;
  if (depth > n + 2) {
    throw NumericalFailure("canonicalize: reduction did not terminate");
  }

  if (A.norm() <= 1e-12 && D.norm() <= 1e-12) {
    out.blocks.assign(n, ZeroBlock{});
    return out;
  }

  auto mu = linalg::nonsingular_shift(A, D, opt);
  if (!mu) {
    auto nu = linalg::nonsingular_shift(D, A, opt);
    if (nu && std::abs(*nu) > opt.tol_rank) mu = 1.0 / *nu;
  }

  if (!mu) {
    ReducedPair red = reduce_doubly_singular(A, D, opt);
    CoreResult sub = canonicalize_core(red.A, red.D, opt, depth + 1);
    if (!sub.diags.empty()) {
      out.diags = std::move(sub.diags);
      return out;
    }
    const int m = static_cast<int>(red.A.rows());
    MatrixXd embed = MatrixXd::Identity(n, n);
    embed.topLeftCorner(m, m) = sub.S;
    out.S = red.Q * embed;
    out.blocks = std::move(sub.blocks);
    out.blocks.insert(out.blocks.end(), red.zero_count, ZeroBlock{});
    return out;
  }

  // Pencil route: analyze the chains of C^{-1} D for the invertible member
  // C = A + mu D, then canonicalize (A, D) chain by chain.
  MatrixXd C = A + *mu * D;
  JordanData jd = jordan_structure(C, D, opt);

  for (const auto& chain : jd.chains) {
    if (chain.complex_pair) {
      out.diags.push_back(
          {DiagnosticKind::ComplexPair, 2, chain.lambda, chain.imag});
    } else if (chain.has_large_block) {
      out.diags.push_back({DiagnosticKind::JordanTooLarge, 3, chain.lambda, 0.0});
    }
  }

  struct ChainPiece {
    MatrixXd cols;
    std::vector<BlockPair> blocks;
  };
  std::vector<ChainPiece> pieces;
  int coupled_chains = 0;
  const double tol_singular_side = std::max(1e-8, 100.0 * opt.tol_rank);

  for (size_t ci = 0; ci < jd.chains.size(); ++ci) {
    const auto& chain = jd.chains[ci];
    if (chain.complex_pair || chain.has_large_block) continue;
    const MatrixXd& W = jd.chain_bases[ci];
    MatrixXd Ai = symmetrized(W.transpose() * A * W);
    MatrixXd Di = symmetrized(W.transpose() * D * W);
    bool has_coupled =
        std::any_of(chain.sizes.begin(), chain.sizes.end(), [](int s) { return s >= 2; });

    double ai_scale = std::max(Ai.norm(), std::max(1.0, Di.norm()));
    if (Ai.norm() <= tol_singular_side * ai_scale ||
        linalg::rcond(Ai) <= tol_singular_side) {
      // Constraint-side block degenerates on this chain.
      if (has_coupled) {
        int axsize = *std::max_element(chain.sizes.begin(), chain.sizes.end());
        out.diags.push_back({DiagnosticKind::TypeBLarge, axsize, chain.lambda, 0.0});
        continue;
      }
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(Di);
      double d_scale = std::max(1.0, Di.norm());
      bool d_degenerate =
          es.eigenvalues().cwiseAbs().minCoeff() <= tol_singular_side * d_scale;
      if (d_degenerate) {
        // Both quadratics vanish along some chain direction: the fragment
        // of a higher Jordan block whose eigenvalue splitting defeated the
        // clustering. A wholly isotropic chain comes from a real block of
        // size >= 3; a partially degenerate one from a singular-side block
        // of size >= 2. Either way the problem is unbounded.
        if (Di.norm() <= tol_singular_side * ai_scale) {
          out.diags.push_back({DiagnosticKind::JordanTooLarge, 3, chain.lambda, 0.0});
        } else {
          out.diags.push_back({DiagnosticKind::TypeBLarge, 2, chain.lambda, 0.0});
        }
        continue;
      }
      ChainPiece piece;
      const int dlen = static_cast<int>(Di.rows());
      MatrixXd Ui = es.eigenvectors();
      for (int i = 0; i < dlen; ++i) {
        double dv = es.eigenvalues()[i];
        Ui.col(i) /= std::sqrt(std::abs(dv));
        piece.blocks.push_back(ScalarBlock{0.0, signum(dv)});
      }
      piece.cols = W * Ui;
      pieces.push_back(std::move(piece));
      continue;
    }

    if (has_coupled) ++coupled_chains;
    ChainResult cr = chain_canonical(Ai, Di, opt);
    ChainPiece piece;
    piece.cols = W * cr.U;
    piece.blocks = std::move(cr.blocks);
    pieces.push_back(std::move(piece));
  }

  if (coupled_chains > 1) {
    out.diags.push_back({DiagnosticKind::MultipleTwoByTwoChains, 2, 0.0, 0.0});
  }
  if (!out.diags.empty()) return out;

  int at = 0;
  for (const auto& piece : pieces) {
    out.S.middleCols(at, piece.cols.cols()) = piece.cols;
    at += static_cast<int>(piece.cols.cols());
    out.blocks.insert(out.blocks.end(), piece.blocks.begin(), piece.blocks.end());
  }
  if (at != n) {
    throw NumericalFailure("canonicalize: chain bases do not span the space");
  }
  return out;
}

}  // namespace

Outcome canonicalize(const Eigen::MatrixXd& A_in, const Eigen::MatrixXd& D_in,
                     const Options& opt) {
  if (A_in.rows() != A_in.cols() || D_in.rows() != D_in.cols() ||
      A_in.rows() != D_in.rows()) {
    throw InvalidInput("canonicalize: dimension mismatch");
  }
  MatrixXd A = symmetrized(A_in);
  MatrixXd D = symmetrized(D_in);
  double scale_a = 1.0 + A.norm(), scale_d = 1.0 + D.norm();
  if ((A_in - A_in.transpose()).norm() > opt.tol_sym * scale_a ||
      (D_in - D_in.transpose()).norm() > opt.tol_sym * scale_d) {
    throw InvalidInput("canonicalize: inputs are not symmetric within tolerance");
  }
  const int n = static_cast<int>(A.rows());

  // Equilibrate so both matrices have unit Frobenius norm; undone per block
  // below.
  double ca = A.norm() > kTinyNorm ? A.norm() : 1.0;
  double cd = D.norm() > kTinyNorm ? D.norm() : 1.0;
  CoreResult core = canonicalize_core(A / ca, D / cd, opt, 0);
  if (!core.diags.empty()) {
    return EarlyDiagnostic{std::move(core.diags)};
  }

  const double r = cd / ca;
  // Per-column rescaling that maps the normalized pair's blocks back to the
  // original pair, and ordering: scalars, coupled pairs, zero pairs.
  struct Ordered {
    BlockPair block;
    std::vector<int> cols;  // columns of core.S
    int discovery = 0;
  };
  std::vector<Ordered> scalars, coupled, zeros;
  MatrixXd S = core.S;
  int at = 0, disc = 0;
  for (const auto& b : core.blocks) {
    if (const auto* sb = std::get_if<ScalarBlock>(&b)) {
      double col_scale =
          sb->alpha != 0.0 ? 1.0 / std::sqrt(ca) : 1.0 / std::sqrt(cd);
      S.col(at) *= col_scale;
      double delta = sb->alpha != 0.0 ? r * sb->delta : sb->delta;
      scalars.push_back({ScalarBlock{sb->alpha, delta}, {at}, disc});
      at += 1;
    } else if (const auto* cb = std::get_if<CoupledBlock>(&b)) {
      S.col(at) *= std::sqrt(cd) / ca;
      S.col(at + 1) *= 1.0 / std::sqrt(cd);
      coupled.push_back({CoupledBlock{cb->tau, r * cb->kappa}, {at, at + 1}, disc});
      at += 2;
    } else {
      zeros.push_back({ZeroBlock{}, {at}, disc});
      at += 1;
    }
    ++disc;
  }

  CanonicalForm cf;
  cf.S.resize(n, n);
  int col = 0;
  auto emit = [&](const std::vector<Ordered>& group) {
    for (const auto& o : group) {
      for (int c : o.cols) cf.S.col(col++) = S.col(c);
      cf.blocks.push_back(o.block);
      cf.permutation.push_back(o.discovery);
    }
  };
  emit(scalars);
  emit(coupled);
  emit(zeros);
  cf.zero_count = static_cast<int>(zeros.size());

  MatrixXd Ahat = cf.assemble_a();
  MatrixXd Dhat = cf.assemble_d();
  double denom = 1.0 + A.norm() + D.norm();
  cf.residual_a = (cf.S.transpose() * A * cf.S - Ahat).norm() / denom;
  cf.residual_d = (cf.S.transpose() * D * cf.S - Dhat).norm() / denom;
  {
    Eigen::JacobiSVD<MatrixXd> svd(cf.S);
    const auto& sv = svd.singularValues();
    cf.cond_s = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1]
                                        : std::numeric_limits<double>::infinity();
  }
  if (cf.cond_s > opt.cond_warn) {
    cf.warnings.push_back("canonical congruence is ill-conditioned (cond ~ " +
                          std::to_string(cf.cond_s) + ")");
  }
  return cf;
}

}  // namespace gtrs::canonical
