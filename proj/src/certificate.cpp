#include "bpcp/certificate.hpp"

#include <Eigen/QR>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace bpcp {

namespace {

void require_same_shape(const Matrix& a, Index rows, Index cols,
                        const char* what) {
  if (a.rows() != rows || a.cols() != cols) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

void require_orthonormal(const Matrix& m, const char* what) {
  if (m.cols() == 0) return;
  const Matrix gram = m.transpose() * m;
  const double err =
      (gram - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-10) {
    throw std::invalid_argument(std::string(what) +
                                ": columns not orthonormal (err " +
                                std::to_string(err) + ")");
  }
}

std::uint64_t instance_hash(const TangentSpace& ts, const SupportSet& s) {
  std::uint64_t h = splitmix64(0x9e3779b97f4a7c15ull ^
                               static_cast<std::uint64_t>(ts.u.rows()));
  h = splitmix64(h ^ static_cast<std::uint64_t>(ts.v.rows()));
  h = splitmix64(h ^ static_cast<std::uint64_t>(ts.rank()));
  h = splitmix64(h ^ static_cast<std::uint64_t>(s.count()));
  auto fold = [&h](double x) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, sizeof(bits));
    h = splitmix64(h ^ bits);
  };
  if (ts.rank() > 0) {
    fold(ts.u(0, 0));
    fold(ts.v(0, 0));
    fold(ts.u(ts.u.rows() - 1, ts.rank() - 1));
  }
  if (s.rows() > 0 && s.cols() > 0) fold(s.indicator()(0, 0));
  return h;
}

}  // namespace

TangentSpace TangentSpace::from_factors(Matrix u, Matrix v) {
  if (u.cols() != v.cols())
    throw std::invalid_argument("TangentSpace: u and v rank mismatch");
  require_orthonormal(u, "TangentSpace u");
  require_orthonormal(v, "TangentSpace v");
  TangentSpace ts;
  ts.u = std::move(u);
  ts.v = std::move(v);
  return ts;
}

TangentSpace TangentSpace::from_low_rank(const Matrix& l0, int r) {
  if (r < 0 || r > std::min(l0.rows(), l0.cols()))
    throw std::invalid_argument("TangentSpace: rank out of range");
  SvdFactors f = svd(l0);
  TangentSpace ts;
  ts.u = f.u.leftCols(r);
  ts.v = f.v.leftCols(r);
  return ts;
}

SupportSet SupportSet::from_indicator(Matrix indicator) {
  SupportSet s;
  std::int64_t count = 0;
  for (Index i = 0; i < indicator.rows(); ++i) {
    for (Index j = 0; j < indicator.cols(); ++j) {
      const double v = indicator(i, j);
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("SupportSet: indicator entries must be 0/1");
      }
      count += v != 0.0;
    }
  }
  s.indicator_ = std::move(indicator);
  s.count_ = count;
  return s;
}

SupportSet SupportSet::from_pairs(
    Index rows, Index cols, const std::vector<std::pair<Index, Index>>& ix) {
  Matrix ind = Matrix::Zero(rows, cols);
  for (const auto& [i, t] : ix) {
    if (i < 0 || i >= rows || t < 0 || t >= cols)
      throw std::out_of_range("SupportSet: index out of range");
    if (ind(i, t) != 0.0)
      throw std::invalid_argument("SupportSet: duplicate index pair");
    ind(i, t) = 1.0;
  }
  return from_indicator(std::move(ind));
}

SupportSet SupportSet::complement() const {
  SupportSet s;
  s.indicator_ = Matrix::Ones(rows(), cols()) - indicator_;
  s.count_ = static_cast<std::int64_t>(rows()) * cols() - count_;
  return s;
}

Matrix proj_phi(const TangentSpace& ts, const Matrix& r) {
  require_same_shape(r, ts.u.rows(), ts.v.rows(), "proj_phi");
  if (ts.rank() == 0) return Matrix::Zero(r.rows(), r.cols());
  const Matrix ut_r = ts.u.transpose() * r;  // r x T
  const Matrix r_v = r * ts.v;               // N x r
  Matrix out = ts.u * ut_r;
  out.noalias() += r_v * ts.v.transpose();
  out.noalias() -= ts.u * (ut_r * ts.v) * ts.v.transpose();
  return out;
}

Matrix proj_phi_perp(const TangentSpace& ts, const Matrix& r) {
  require_same_shape(r, ts.u.rows(), ts.v.rows(), "proj_phi_perp");
  return r - proj_phi(ts, r);
}

Matrix proj_omega(const SupportSet& s, const Matrix& r) {
  require_same_shape(r, s.rows(), s.cols(), "proj_omega");
  return s.indicator().cwiseProduct(r);
}

Matrix proj_omega_perp(const SupportSet& s, const Matrix& r) {
  require_same_shape(r, s.rows(), s.cols(), "proj_omega_perp");
  return r - s.indicator().cwiseProduct(r);
}

OpNormEstimate op_norm_composed(const TangentSpace& ts, const SupportSet& s,
                                double tol, int max_iters) {
  if (!(tol > 0.0)) throw std::invalid_argument("op_norm_composed: tol > 0");
  const Index n = s.rows();
  const Index t = s.cols();
  OpNormEstimate best;

  const std::uint64_t h = instance_hash(ts, s);
  for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
    RngStream rng(h, attempt);
    Matrix x(n, t);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < t; ++j) x(i, j) = rng.next_normal();
    x = proj_phi(ts, x);
    double nx = norm_fro(x);
    if (nx == 0.0) {
      // Phi is the zero space; the composition is the zero operator.
      return OpNormEstimate{0.0, 0, true};
    }
    x /= nx;

    double rho_prev = -1.0;
    double rho = 0.0;
    bool converged = false;
    int used = 0;
    for (int k = 1; k <= max_iters; ++k) {
      Matrix y = proj_phi(ts, proj_omega(s, x));
      rho = x.cwiseProduct(y).sum();  // = ||P_Omega x||_F^2 for x in Phi
      const double ny = norm_fro(y);
      used = k;
      if (ny == 0.0) {
        rho = 0.0;
        converged = true;
        break;
      }
      x = y / ny;
      if (std::abs(rho - rho_prev) < tol) {
        converged = true;
        break;
      }
      rho_prev = rho;
    }
    best.iterations += used;
    if (rho > best.value) best.value = rho;
    best.converged = (attempt == 0) ? converged : (best.converged && converged);
  }
  best.value = std::sqrt(std::max(0.0, std::min(best.value, 1.0)));
  return best;
}

double golfing_q(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("golfing_q: delta must be in (0,1)");
  return delta / ((1.0 + std::sqrt(1.0 - delta)) *
                  (1.0 + std::pow(1.0 - delta, 0.25)));
}

GolfingResult golfing_wl(const TangentSpace& ts,
                         const std::vector<SupportSet>& batches, double q) {
  if (!(q > 0.0 && q <= 1.0))
    throw std::invalid_argument("golfing_wl: q must be in (0,1]");
  if (batches.empty()) throw std::invalid_argument("golfing_wl: no batches");
  const Matrix uv = ts.uv();
  GolfingResult out;
  Matrix qmat = Matrix::Zero(uv.rows(), uv.cols());
  for (const auto& batch : batches) {
    if (batch.count() == 0) ++out.empty_batches;
    qmat.noalias() += proj_omega(batch, proj_phi(ts, uv - qmat)) / q;
  }
  out.w_l = proj_phi_perp(ts, qmat);
  return out;
}

Matrix neumann_series_sum(const TangentSpace& ts, const SupportSet& s,
                          const Matrix& e, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("neumann: tol > 0");
  const OpNormEstimate nrm = op_norm_composed(ts, s);
  if (nrm.value >= 1.0) {
    throw CertificateError(
        "neumann: ||P_Omega P_Phi|| >= 1, series does not converge",
        nrm.value);
  }
  Matrix term = proj_omega(s, e);
  Matrix sum = term;
  // Terms contract by ||P_Omega P_Phi||^2 per step.
  const int max_terms = 400000;
  for (int k = 0; k < max_terms; ++k) {
    term = proj_omega(s, proj_phi(ts, term));
    if (norm_fro(term) < tol) return sum;
    sum += term;
  }
  throw CertificateError("neumann: series did not reach tolerance", nrm.value);
}

Matrix neumann_ws(const TangentSpace& ts, const SupportSet& s, const Matrix& e,
                  double lambda, double tol) {
  if (!(lambda > 0.0)) throw std::invalid_argument("neumann_ws: lambda > 0");
  // e must be a sign pattern living on the support.
  for (Index i = 0; i < e.rows(); ++i) {
    for (Index j = 0; j < e.cols(); ++j) {
      const double v = e(i, j);
      const bool on = s.indicator()(i, j) != 0.0;
      if (on && v != 1.0 && v != -1.0)
        throw std::invalid_argument("neumann_ws: e must be +/-1 on support");
      if (!on && v != 0.0)
        throw std::invalid_argument("neumann_ws: e must vanish off support");
    }
  }
  const Matrix sum = neumann_series_sum(ts, s, e, tol);
  return lambda * proj_phi_perp(ts, sum);
}

CertificateReport verify_certificate(const TangentSpace& ts,
                                     const SupportSet& s, const Matrix& e,
                                     const Matrix& w, double lambda,
                                     double delta, double eps) {
  require_same_shape(w, s.rows(), s.cols(), "verify_certificate w");
  require_same_shape(e, s.rows(), s.cols(), "verify_certificate e");
  CertificateReport rep;
  const Matrix uv = ts.uv();
  rep.norm_w = norm_op(w);
  rep.cond1_residual = norm_fro(proj_phi(ts, w));
  rep.cond3_lhs = norm_fro(proj_omega(s, uv + w - lambda * e));
  rep.cond3_bound = lambda * delta / 16.0;
  rep.cond4_lhs = norm_inf(proj_omega_perp(s, uv + w));
  rep.cond4_bound = lambda / 2.0;
  const OpNormEstimate nrm = op_norm_composed(ts, s);
  rep.composed_sq = nrm.value * nrm.value;
  rep.composed_bound = 1.0 - delta + eps * delta;
  rep.op_norm_iterations = nrm.iterations;
  rep.mu_implied = implied_mu(ts);
  rep.pass_cond1 = rep.cond1_residual <= 1e-9;
  rep.pass_cond2 = rep.norm_w <= 0.5;
  rep.pass_cond3 = rep.cond3_lhs <= rep.cond3_bound;
  rep.pass_cond4 = rep.cond4_lhs < rep.cond4_bound;
  rep.pass_composed = rep.composed_sq <= rep.composed_bound;
  return rep;
}

double implied_mu(const TangentSpace& ts) {
  if (ts.rank() == 0) return 0.0;
  const double nt = static_cast<double>(ts.u.rows()) *
                    static_cast<double>(ts.v.rows());
  return std::sqrt(nt) * norm_inf(ts.uv()) / static_cast<double>(ts.rank());
}

Rates rates(int n, double mu, int r, double c_delta, double c_lambda,
            double c_eps) {
  if (n < 2 || r < 0 || !(mu > 0.0))
    throw std::invalid_argument("rates: bad inputs");
  const double n13 = std::cbrt(n);
  Rates out;
  out.delta = c_delta * mu * static_cast<double>(r) / n13;
  out.lambda = c_lambda * std::cbrt(mu) / (n13 * n13);
  out.eps = c_eps * std::log(n) / n13;
  return out;
}

TangentSpace random_orthogonal_model(int n, int t, int r, RngStream& rng) {
  if (r < 0 || r > std::min(n, t))
    throw std::invalid_argument("random_orthogonal_model: rank out of range");
  auto haar = [&rng](int dim, int k) {
    Matrix g(dim, k);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < k; ++j) g(i, j) = rng.next_normal();
    if (k == 0) return Matrix(g);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, k);
    // Fix signs so the draw is a deterministic function of the stream.
    const Matrix rfac = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (Index j = 0; j < k; ++j) {
      if (rfac(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
  };
  TangentSpace ts;
  ts.u = haar(n, r);
  ts.v = haar(t, r);
  return ts;
}

std::vector<SupportSet> sample_batches(int n, int t, int j0, double q,
                                       RngStream& rng) {
  if (j0 < 1) throw std::invalid_argument("sample_batches: j0 >= 1");
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("sample_batches: q in (0,1)");
  std::vector<SupportSet> out;
  out.reserve(static_cast<size_t>(j0));
  for (int b = 0; b < j0; ++b) {
    Matrix ind(n, t);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < t; ++j) ind(i, j) = rng.next_unit() < q ? 1.0 : 0.0;
    out.push_back(SupportSet::from_indicator(std::move(ind)));
  }
  return out;
}

SupportSet support_from_batches(const std::vector<SupportSet>& batches) {
  if (batches.empty())
    throw std::invalid_argument("support_from_batches: no batches");
  Matrix outside = Matrix::Ones(batches.front().rows(), batches.front().cols());
  for (const auto& b : batches) {
    outside = outside.cwiseProduct(Matrix::Ones(b.rows(), b.cols()) -
                                   b.indicator());
  }
  return SupportSet::from_indicator(std::move(outside));
}

Matrix rademacher_on(const SupportSet& s, RngStream& rng) {
  Matrix e = Matrix::Zero(s.rows(), s.cols());
  for (Index i = 0; i < s.rows(); ++i) {
    for (Index j = 0; j < s.cols(); ++j) {
      if (s.indicator()(i, j) != 0.0) {
        e(i, j) = (rng.next_u32() & 1u) ? 1.0 : -1.0;
      }
    }
  }
  return e;
}

}  // namespace bpcp
