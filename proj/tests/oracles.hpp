// Test-only oracles, kept independent of the library's computational paths.
#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "bpcp/certificate.hpp"
#include "bpcp/matrix.hpp"

namespace oracle {

using bpcp::Index;
using bpcp::Matrix;
using bpcp::Vector;

// One-sided Jacobi SVD (Hestenes). Deliberately not Eigen's decomposition:
// an independent route for cross-checking spectra of small matrices.
struct JacobiSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
};

inline JacobiSvd jacobi_svd(const Matrix& a) {
  const Index n = a.rows();
  const Index t = a.cols();
  Matrix w = a;  // columns get orthogonalized in place
  Matrix v = Matrix::Identity(t, t);
  const double eps = 1e-14;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p + 1 < t; ++p) {
      for (Index q = p + 1; q < t; ++q) {
        const double app = w.col(p).squaredNorm();
        const double aqq = w.col(q).squaredNorm();
        const double apq = w.col(p).dot(w.col(q));
        off = std::max(off, std::abs(apq) / std::max(std::sqrt(app * aqq),
                                                     1e-300));
        if (std::abs(apq) < eps * std::sqrt(app * aqq)) continue;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double sgn = zeta >= 0.0 ? 1.0 : -1.0;
        const double tan_t =
            sgn / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cos_t = 1.0 / std::sqrt(1.0 + tan_t * tan_t);
        const double sin_t = cos_t * tan_t;
        for (Index i = 0; i < n; ++i) {
          const double wip = w(i, p);
          const double wiq = w(i, q);
          w(i, p) = cos_t * wip - sin_t * wiq;
          w(i, q) = sin_t * wip + cos_t * wiq;
        }
        for (Index i = 0; i < t; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = cos_t * vip - sin_t * viq;
          v(i, q) = sin_t * vip + cos_t * viq;
        }
      }
    }
    if (off < eps) break;
  }
  JacobiSvd out;
  out.sigma.resize(t);
  out.u.resize(n, t);
  for (Index j = 0; j < t; ++j) {
    const double s = w.col(j).norm();
    out.sigma(j) = s;
    out.u.col(j) = s > 1e-300 ? Matrix(w.col(j) / s) : Matrix(w.col(j));
  }
  // Descending order.
  std::vector<Index> order(static_cast<size_t>(t));
  for (Index j = 0; j < t; ++j) order[static_cast<size_t>(j)] = j;
  std::sort(order.begin(), order.end(),
            [&](Index x, Index y) { return out.sigma(x) > out.sigma(y); });
  JacobiSvd sorted;
  sorted.sigma.resize(t);
  sorted.u.resize(n, t);
  sorted.v.resize(t, t);
  for (Index j = 0; j < t; ++j) {
    sorted.sigma(j) = out.sigma(order[static_cast<size_t>(j)]);
    sorted.u.col(j) = out.u.col(order[static_cast<size_t>(j)]);
    sorted.v.col(j) = v.col(order[static_cast<size_t>(j)]);
  }
  return sorted;
}

inline Vector jacobi_singular_values(const Matrix& a) {
  return a.rows() >= a.cols() ? jacobi_svd(a).sigma
                              : jacobi_svd(Matrix(a.transpose())).sigma;
}

// Proximal value of tau ||.||_* at a, via the Moreau route: subtract the
// projection onto the tau spectral ball, X = A - U min(Sigma, tau) V^T,
// with the independent Jacobi factorization.
inline Matrix prox_nuclear_dual_route(const Matrix& a, double tau) {
  const bool wide = a.rows() < a.cols();
  const Matrix work = wide ? Matrix(a.transpose()) : a;
  JacobiSvd f = jacobi_svd(work);
  Vector clipped = f.sigma.cwiseMin(tau);
  Matrix proj = f.u * clipped.asDiagonal() * f.v.transpose();
  Matrix x = work - proj;
  return wide ? Matrix(x.transpose()) : x;
}

// f(X) = 1/2 ||X - A||_F^2 + tau ||X||_*, nuclear part from the Jacobi route.
inline double prox_objective(const Matrix& x, const Matrix& a, double tau) {
  return 0.5 * (x - a).squaredNorm() + tau * jacobi_singular_values(x).sum();
}

// Dense matrix of the operator R -> P_Phi P_Omega P_Phi R on vectorized
// matrices; feasible only at small sizes.
inline Matrix dense_composed_operator(const bpcp::TangentSpace& ts,
                                      const bpcp::SupportSet& s) {
  const Index n = s.rows();
  const Index t = s.cols();
  const Index dim = n * t;
  Matrix op(dim, dim);
  Matrix basis = Matrix::Zero(n, t);
  for (Index col = 0; col < dim; ++col) {
    basis(col / t, col % t) = 1.0;
    const Matrix image =
        bpcp::proj_phi(ts, bpcp::proj_omega(s, bpcp::proj_phi(ts, basis)));
    for (Index rr = 0; rr < dim; ++rr) op(rr, col) = image(rr / t, rr % t);
    basis(col / t, col % t) = 0.0;
  }
  return op;
}

inline double dense_composed_norm(const bpcp::TangentSpace& ts,
                                  const bpcp::SupportSet& s) {
  const Matrix op = dense_composed_operator(ts, s);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(
      Matrix(0.5 * (op + op.transpose())), Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  return std::sqrt(std::max(0.0, top));
}

// Conjugate gradients on the support: solve (I - P_Omega P_Phi P_Omega) X =
// rhs with everything restricted to Omega. SPD when ||P_Omega P_Phi|| < 1.
inline Matrix cg_restricted_solve(const bpcp::TangentSpace& ts,
                                  const bpcp::SupportSet& s, const Matrix& rhs,
                                  double tol, int max_iters) {
  auto apply = [&](const Matrix& x) {
    return Matrix(x - bpcp::proj_omega(s, bpcp::proj_phi(ts, x)));
  };
  Matrix x = Matrix::Zero(rhs.rows(), rhs.cols());
  Matrix r = bpcp::proj_omega(s, rhs);
  Matrix p = r;
  double rs = r.squaredNorm();
  const double target = tol * tol * rs;
  for (int k = 0; k < max_iters && rs > target && rs > 0.0; ++k) {
    const Matrix ap = apply(p);
    const double alpha = rs / p.cwiseProduct(ap).sum();
    x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return x;
}

}  // namespace oracle
