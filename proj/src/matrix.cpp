#include "bpcp/matrix.hpp"

#include <Eigen/SVD>

namespace bpcp {

SvdFactors svd(const Matrix& a) {
  require_finite(a, "svd input");
  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw SvdError("svd: backend did not converge", 40 /* Eigen sweep cap */);
  }
  SvdFactors f;
  f.u = dec.matrixU();
  f.sigma = dec.singularValues();
  f.v = dec.matrixV();
  return f;
}

double norm_nuclear(const Matrix& a) { return svd(a).sigma.sum(); }

double norm_op(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  return svd(a).sigma(0);
}

}  // namespace bpcp
