#include "bpcp/thresholded_svd.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>

#include "bpcp/rng.hpp"

namespace bpcp {

namespace {

// Classical Gram-Schmidt, applied twice, against the first `count` columns.
void reorthogonalize(const Matrix& basis, Index count, Vector& w) {
  if (count == 0) return;
  const auto b = basis.leftCols(count);
  for (int pass = 0; pass < 2; ++pass) {
    w.noalias() -= b * (b.transpose() * w);
  }
}

}  // namespace

SvdFactors svd_above(const Matrix& a, double tau, int rank_guess) {
  const Index n = a.rows();
  const Index t = a.cols();
  const Index m = std::min(n, t);
  const Index cap = std::min(m, std::max<Index>(m / 2, 48));

  // Dense is cheaper unless the spectrum is cut well below m, or the matrix
  // is so tall that even a thin dense decomposition dominates.
  const bool small_dense = m <= 64 && std::max(n, t) < 8 * m;
  if (m <= 24 || small_dense || rank_guess + 10 >= cap) {
    return svd(a);
  }
  if (norm_fro(a) == 0.0) {
    SvdFactors empty;
    empty.u = Matrix::Zero(n, 0);
    empty.sigma = Vector::Zero(0);
    empty.v = Matrix::Zero(t, 0);
    return empty;
  }

  Matrix ubasis(n, cap + 1);
  Matrix vbasis(t, cap + 1);
  std::vector<double> alpha, beta;
  alpha.reserve(static_cast<size_t>(cap) + 1);
  beta.reserve(static_cast<size_t>(cap) + 1);

  RngStream rng(0x5bd1e995u ^ (static_cast<std::uint64_t>(n) << 20),
                static_cast<std::uint64_t>(t));
  {
    Vector v0(t);
    for (Index i = 0; i < t; ++i) v0(i) = rng.next_normal();
    v0.normalize();
    vbasis.col(0) = v0;
  }
  Vector z = a * vbasis.col(0);
  double al = z.norm();
  if (al == 0.0) return svd(a);  // start vector hit the null space
  ubasis.col(0) = z / al;
  alpha.push_back(al);

  // Invariant at each checkpoint: j columns in both bases, alpha[0..j-1],
  // beta[0..j-1] where beta[j-1] links out to the pending v_j. The Ritz
  // residual of triplet i is beta[j-1] * |P(j-1, i)| with B = P Theta W^T.
  Index j = 0;
  bool exhausted = false;
  Index next_check = std::min<Index>(cap, rank_guess + 10);
  Vector w(t);

  while (true) {
    while (j < next_check && !exhausted) {
      w.noalias() = a.transpose() * ubasis.col(j) - alpha.back() * vbasis.col(j);
      reorthogonalize(vbasis, j + 1, w);
      double be = w.norm();
      if (be < 1e-13 * alpha[0]) {
        for (Index i = 0; i < t; ++i) w(i) = rng.next_normal();
        reorthogonalize(vbasis, j + 1, w);
        be = w.norm();
        if (be < 1e-12) {
          beta.push_back(0.0);
          exhausted = true;
          ++j;
          break;
        }
        beta.push_back(0.0);  // exact invariant subspace boundary
        vbasis.col(j + 1) = w / be;
      } else {
        beta.push_back(be);
        vbasis.col(j + 1) = w / be;
      }
      ++j;
      z.noalias() = a * vbasis.col(j) - beta.back() * ubasis.col(j - 1);
      reorthogonalize(ubasis, j, z);
      al = z.norm();
      if (al < 1e-13 * alpha[0]) {
        for (Index i = 0; i < n; ++i) z(i) = rng.next_normal();
        reorthogonalize(ubasis, j, z);
        al = z.norm();
        if (al < 1e-12) {
          exhausted = true;
          break;
        }
        alpha.push_back(0.0);
      } else {
        alpha.push_back(al);
      }
      ubasis.col(j) = z / al;
    }

    const Index jc = std::min<Index>(j, static_cast<Index>(alpha.size()));
    Matrix bid = Matrix::Zero(jc, jc);
    for (Index i = 0; i < jc; ++i) bid(i, i) = alpha[static_cast<size_t>(i)];
    for (Index i = 0; i + 1 < jc; ++i)
      bid(i, i + 1) = beta[static_cast<size_t>(i)];
    Eigen::JacobiSVD<Matrix> small(bid,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& theta = small.singularValues();
    const double last_beta = (static_cast<size_t>(jc) <= beta.size())
                                 ? beta[static_cast<size_t>(jc - 1)]
                                 : 0.0;
    const double res_tol = std::max(1e-12 * theta(0), 1e-300);

    Index n_above = 0;
    while (n_above < jc && theta(n_above) > tau) ++n_above;

    bool ok = exhausted || n_above + 2 <= jc;
    if (!exhausted) {
      for (Index i = 0; ok && i < std::min(n_above + 1, jc); ++i) {
        if (std::abs(last_beta * small.matrixU()(jc - 1, i)) > res_tol)
          ok = false;
      }
    }

    if (ok) {
      const Index k = std::min(n_above + 2, jc);
      SvdFactors f;
      f.u.noalias() = ubasis.leftCols(jc) * small.matrixU().leftCols(k);
      f.sigma = theta.head(k);
      f.v.noalias() = vbasis.leftCols(jc) * small.matrixV().leftCols(k);
      return f;
    }
    if (j >= cap) {
      return svd(a);  // threshold cuts too deep for the Krylov budget
    }
    next_check = std::min<Index>(cap, std::max<Index>(j + 16, 2 * j));
  }
}

}  // namespace bpcp
