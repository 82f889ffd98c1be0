#pragma once

#include <utility>
#include <vector>

#include "bpcp/matrix.hpp"
#include "bpcp/rng.hpp"

namespace bpcp {

class CertificateError : public std::runtime_error {
 public:
  CertificateError(const std::string& what, double measured_norm)
      : std::runtime_error(what), measured_norm_(measured_norm) {}
  double measured_norm() const { return measured_norm_; }

 private:
  double measured_norm_;
};

/// Row/column spaces of the low-rank target: the linear space
/// Phi = { U X^T + Y V^T } of matrices sharing them. u is N x r, v is T x r,
/// both with orthonormal columns. r = 0 gives the zero space.
struct TangentSpace {
  Matrix u;
  Matrix v;

  Index rank() const { return u.cols(); }
  Matrix uv() const { return u * v.transpose(); }  // U V^T, zero when r = 0

  /// Validates column orthonormality to 1e-10.
  static TangentSpace from_factors(Matrix u, Matrix v);
  /// Leading-r singular subspaces of l0.
  static TangentSpace from_low_rank(const Matrix& l0, int r);
};

/// Entrywise support: the space of matrices vanishing off a set of (i, t)
/// pairs. Stored as a 0/1 indicator for cheap masking.
class SupportSet {
 public:
  static SupportSet from_indicator(Matrix indicator);
  static SupportSet from_pairs(Index rows, Index cols,
                               const std::vector<std::pair<Index, Index>>& ix);

  const Matrix& indicator() const { return indicator_; }
  Index rows() const { return indicator_.rows(); }
  Index cols() const { return indicator_.cols(); }
  std::int64_t count() const { return count_; }
  SupportSet complement() const;

 private:
  SupportSet() = default;
  Matrix indicator_;
  std::int64_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Projections. All four are idempotent and self-adjoint; each pair sums to
// the identity.

/// P_Phi R = U U^T R + R V V^T - U U^T R V V^T.
Matrix proj_phi(const TangentSpace& ts, const Matrix& r);
/// P_Phi_perp R = (I - U U^T) R (I - V V^T).
Matrix proj_phi_perp(const TangentSpace& ts, const Matrix& r);
/// Entrywise masking onto the support.
Matrix proj_omega(const SupportSet& s, const Matrix& r);
Matrix proj_omega_perp(const SupportSet& s, const Matrix& r);

// ---------------------------------------------------------------------------
// Operator norm of the composition

struct OpNormEstimate {
  double value = 0.0;  // ||P_Omega P_Phi||, in [0, 1]
  int iterations = 0;
  bool converged = false;
};

/// Power iteration on the self-adjoint composition P_Phi P_Omega P_Phi over
/// matrix space. Stops when successive Rayleigh quotients differ by less
/// than tol; restarts once from a second seed and keeps the larger estimate.
/// Seeded deterministically from the instance.
OpNormEstimate op_norm_composed(const TangentSpace& ts, const SupportSet& s,
                                double tol = 1e-13, int max_iters = 100000);

// ---------------------------------------------------------------------------
// Certificate construction

/// Batch flip probability: (1 - q)^4 = 1 - delta in the closed form
/// q = delta / ((1 + (1-delta)^(1/2)) (1 + (1-delta)^(1/4))), in [delta/4,
/// delta].
double golfing_q(double delta);

struct GolfingResult {
  Matrix w_l;
  int empty_batches = 0;  // degenerate draws, reported rather than fatal
};

/// Golfing scheme over j0 batches: Q_0 = 0,
/// Q_j = Q_{j-1} + q^{-1} P_{Omega_j} P_Phi (U V^T - Q_{j-1}),
/// W_L = P_Phi_perp Q_{j0}. With the batches drawn Bernoulli(q), the union
/// of the batches is the complement of the support of S0.
GolfingResult golfing_wl(const TangentSpace& ts,
                         const std::vector<SupportSet>& batches, double q);

/// Omega-supported partial sums sum_k (P_Omega P_Phi P_Omega)^k e, truncated
/// when a term drops below tol in Frobenius norm. Refuses (with the measured
/// norm) when ||P_Omega P_Phi|| >= 1 since the series would not converge.
Matrix neumann_series_sum(const TangentSpace& ts, const SupportSet& s,
                          const Matrix& e, double tol = 1e-12);

/// Least-squares certificate part
/// W_S = lambda P_Phi_perp sum_k (P_Omega P_Phi P_Omega)^k E for a sign
/// matrix e supported on s. Satisfies P_Omega W_S = lambda E and
/// P_Phi W_S = 0 up to the series tolerance.
Matrix neumann_ws(const TangentSpace& ts, const SupportSet& s, const Matrix& e,
                  double lambda, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Verification

struct CertificateReport {
  double norm_w = 0.0;          // ||W||, bound 1/2
  double cond1_residual = 0.0;  // ||P_Phi W||_F, exact condition is zero
  double cond3_lhs = 0.0;       // ||P_Omega(UV^T + W - lambda E)||_F
  double cond3_bound = 0.0;     // lambda delta / 16
  double cond4_lhs = 0.0;       // ||P_Omega_perp(UV^T + W)||_inf
  double cond4_bound = 0.0;     // lambda / 2
  double composed_sq = 0.0;      // ||P_Omega P_Phi||^2
  double composed_bound = 0.0;    // 1 - delta + eps delta
  double mu_implied = 0.0;      // sqrt(NT) ||UV^T||_inf / r
  bool pass_cond1 = false;
  bool pass_cond2 = false;
  bool pass_cond3 = false;
  bool pass_cond4 = false;
  bool pass_composed = false;
  int op_norm_iterations = 0;
};

/// Measures the four dual-certificate conditions plus the composed-norm
/// bound at the given eps.
CertificateReport verify_certificate(const TangentSpace& ts,
                                     const SupportSet& s, const Matrix& e,
                                     const Matrix& w, double lambda,
                                     double delta, double eps = 0.2);

/// Incoherence implied by the max entry: sqrt(N T) ||U V^T||_inf / r.
double implied_mu(const TangentSpace& ts);

/// The rate family delta ~ mu r / n^(1/3), lambda ~ mu^(1/3) / n^(2/3),
/// eps ~ log n / n^(1/3), with caller-chosen constants (the theory fixes
/// only the orders).
struct Rates {
  double delta;
  double lambda;
  double eps;
};
Rates rates(int n, double mu, int r, double c_delta = 1.0,
            double c_lambda = 1.0, double c_eps = 1.0);

// ---------------------------------------------------------------------------
// Instance generation for the lab

/// Haar-style singular subspaces: QR of independent standard normal factors.
TangentSpace random_orthogonal_model(int n, int t, int r, RngStream& rng);

/// j0 independent Bernoulli(q) index sets.
std::vector<SupportSet> sample_batches(int n, int t, int j0, double q,
                                       RngStream& rng);

/// The support of S0 implied by the batches: complement of their union.
SupportSet support_from_batches(const std::vector<SupportSet>& batches);

/// Rademacher signs on the support, zero elsewhere.
Matrix rademacher_on(const SupportSet& s, RngStream& rng);

}  // namespace bpcp
