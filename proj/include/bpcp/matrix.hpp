#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace bpcp {

// Dense row-major carrier for every matrix in the toolkit. Row-major keeps
// elementwise passes and the on-disk layout (row-major doubles) aligned.
template <typename Scalar>
using DenseMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = DenseMatrix<double>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when the SVD backend fails to converge; carries the sweep count
/// the backend gave up after.
class SvdError : public std::runtime_error {
 public:
  SvdError(const std::string& what, int iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

template <typename Derived>
bool is_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* name) {
  if (!a.allFinite()) {
    throw std::invalid_argument(std::string(name) +
                                " contains NaN or Inf entries");
  }
}

// ---------------------------------------------------------------------------
// Elementwise utilities

template <typename DerivedA, typename DerivedB>
Matrix hadamard(const Eigen::MatrixBase<DerivedA>& a,
                const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("hadamard: shape mismatch");
  }
  return a.cwiseProduct(b);
}

// ---------------------------------------------------------------------------
// Norms. The chain norm_op <= norm_fro <= norm_nuclear and
// norm_fro <= norm_l1 holds for every matrix.

template <typename Derived>
double norm_l1(const Eigen::MatrixBase<Derived>& a) {
  return a.cwiseAbs().sum();
}

template <typename Derived>
double norm_fro(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

/// Max norm: largest entry in absolute value.
template <typename Derived>
double norm_inf(const Eigen::MatrixBase<Derived>& a) {
  return a.cwiseAbs().maxCoeff();
}

double norm_nuclear(const Matrix& a);
double norm_op(const Matrix& a);

// ---------------------------------------------------------------------------
// Singular value decomposition

/// Economy (thin) SVD factors with k = min(rows, cols), singular values
/// descending, orthonormal columns in u and v.
struct SvdFactors {
  Matrix u;      // N x k
  Vector sigma;  // k, nonnegative, descending
  Matrix v;      // T x k

  Matrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

/// Thin SVD of a finite matrix. Singular values are reported as computed,
/// never clamped; rank decisions belong to the caller.
SvdFactors svd(const Matrix& a);

}  // namespace bpcp
