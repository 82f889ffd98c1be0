#include "bpcp/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "bpcp/thresholded_svd.hpp"

namespace bpcp {

void SolverConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("config: lambda must be > 0");
  if (nu && !(*nu > 0.0)) throw std::invalid_argument("config: nu must be > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("config: alpha must be > 0");
  if (max_iters < 1) throw std::invalid_argument("config: max_iters must be >= 1");
  if (!(tol_feasibility > 0.0) || !(tol_progress > 0.0))
    throw std::invalid_argument("config: tolerances must be > 0");
}

Matrix soft_threshold(const Matrix& a, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("soft_threshold: tau < 0");
  return a.unaryExpr([tau](double x) {
    const double m = std::abs(x) - tau;
    return m > 0.0 ? (x > 0.0 ? m : -m) : 0.0;
  });
}

Matrix svt(const Matrix& a, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("svt: tau < 0");
  SvdFactors f = svd(a);
  Vector s = (f.sigma.array() - tau).max(0.0);
  Index k = 0;
  while (k < s.size() && s(k) > 0.0) ++k;
  if (k == 0) return Matrix::Zero(a.rows(), a.cols());
  return f.u.leftCols(k) * s.head(k).asDiagonal() * f.v.leftCols(k).transpose();
}

double default_nu(const Matrix& y) {
  const double l1 = norm_l1(y);
  if (l1 == 0.0) throw std::invalid_argument("default_nu: ||y||_1 is zero");
  return static_cast<double>(y.rows()) * static_cast<double>(y.cols()) /
         (4.0 * l1);
}

double default_lambda(int n, int t, double c) {
  if (n < 2 || t < 2) throw std::invalid_argument("default_lambda: n, t >= 2");
  if (!(c > 0.0)) throw std::invalid_argument("default_lambda: c > 0");
  const double nm = std::min(n, t);
  return c * std::cbrt(std::log(nm) /
                       (static_cast<double>(n) * static_cast<double>(t)));
}

namespace {

struct SvtStep {
  Matrix l;
  double nuclear;  // of the thresholded result, sum of kept values
  int rank;
};

SvtStep svt_step(const Matrix& a, double tau, SvdMode mode, int rank_guess) {
  SvdFactors f = (mode == SvdMode::kFull) ? svd(a)
                                          : svd_above(a, tau, rank_guess);
  Vector s = (f.sigma.array() - tau).max(0.0);
  Index k = 0;
  while (k < s.size() && s(k) > 0.0) ++k;
  SvtStep out;
  out.rank = static_cast<int>(k);
  out.nuclear = s.head(k).sum();
  if (k == 0) {
    out.l = Matrix::Zero(a.rows(), a.cols());
  } else {
    out.l.noalias() =
        f.u.leftCols(k) * s.head(k).asDiagonal() * f.v.leftCols(k).transpose();
  }
  if (mode == SvdMode::kValidate) {
    const Matrix ref = svt(a, tau);
    const double err = norm_fro(out.l - ref);
    if (err > 1e-9 * std::max(1.0, norm_fro(ref))) {
      throw std::runtime_error(
          "svt validation: truncated and full paths disagree by " +
          std::to_string(err));
    }
  }
  return out;
}

}  // namespace

SolveResult solve_bpcp(const Matrix& y, const SolverConfig& config) {
  require_finite(y, "solve_bpcp input");
  config.validate();

  const Index n = y.rows();
  const Index t = y.cols();
  const double norm_y = norm_fro(y);
  const double l1_y = norm_l1(y);
  // An all-zero Y solves at the first iteration; the nu formula is undefined
  // there, so fall back to an arbitrary positive penalty.
  const double nu = config.nu ? *config.nu : (l1_y > 0.0 ? default_nu(y) : 1.0);
  const double lambda = config.lambda;
  const double tau_l = 1.0 / nu;
  const double tau_z = lambda / nu;

  // Multiplier start: Y scaled into the dual-feasible ball (Lin et al. style).
  Matrix mult;
  {
    const double denom = std::max(norm_op(y), norm_inf(y) / lambda);
    mult = denom > 0.0 ? Matrix(y / denom) : Matrix::Zero(n, t);
  }

  Matrix l = Matrix::Zero(n, t);
  Matrix z = Matrix::Zero(n, t);
  Matrix z_prev(n, t), arg(n, t), resid(n, t);

  SolveResult result;
  result.nu_used = nu;
  result.lambda_used = lambda;
  if (config.keep_log) result.per_iteration_log.reserve(64);

  double nuclear_l = 0.0;
  double l1_z = 0.0;
  resid = y;  // Y - L_0 - Z_0
  int rank_guess = 10;

  for (int k = 1; k <= config.max_iters; ++k) {
    // Augmented Lagrangian at the current multiplier, before block updates.
    const double al_old = nuclear_l + lambda * l1_z +
                          mult.cwiseProduct(resid).sum() +
                          0.5 * nu * resid.squaredNorm();

    arg.noalias() = y - z + mult / nu;
    SvtStep step = svt_step(arg, tau_l, config.svd_mode, rank_guess);
    l.swap(step.l);
    if (config.clip_to_alpha && std::isfinite(config.alpha)) {
      l = l.cwiseMax(-config.alpha).cwiseMin(config.alpha);
    }
    nuclear_l = step.nuclear;
    rank_guess = step.rank + 5;

    z_prev.swap(z);
    arg.noalias() = y - l + mult / nu;
    z = soft_threshold(arg, tau_z);
    l1_z = norm_l1(z);

    resid.noalias() = y - l - z;
    const double feas = norm_fro(resid);
    const double prog = nu * norm_fro(z - z_prev);
    const double objective = nuclear_l + lambda * l1_z;
    const double al_new = objective + mult.cwiseProduct(resid).sum() +
                          0.5 * nu * resid.squaredNorm();

    mult.noalias() += nu * resid;

    result.iterations = k;
    result.feasibility_residual = feas;
    result.progress_residual = prog;
    result.objective = objective;
    if (config.keep_log) {
      result.per_iteration_log.push_back(
          {k, objective, feas, prog, al_new, al_new - al_old});
    }
    if (feas <= config.tol_feasibility * norm_y &&
        prog <= config.tol_progress) {
      result.converged = true;
      break;
    }
  }

  result.l_hat = std::move(l);
  result.z_hat = std::move(z);
  result.alpha_satisfied = norm_inf(result.l_hat) <= config.alpha;
  return result;
}

}  // namespace bpcp
