#pragma once

#include <vector>

#include "bpcp/matrix.hpp"

namespace bpcp {

/// Homogeneous noise model for the error entries: all entries share one
/// distribution, so the quantile band collapses to a single threshold pair.
class NoiseModel {
 public:
  enum class Kind { kGaussian, kCauchy, kEmpirical };

  static NoiseModel gaussian(double sigma = 1.0);
  static NoiseModel cauchy(double scale = 1.0);
  /// Order-statistics model over a sample matrix; quantiles use type-7
  /// linear interpolation.
  static NoiseModel empirical(const Matrix& sample);

  Kind kind() const { return kind_; }
  /// Inverse CDF at p in (0,1). Nondecreasing in p; zero at p = 1/2 for the
  /// zero-location analytic models.
  double quantile(double p) const;
  /// Number of entries behind an empirical model (0 for analytic kinds).
  std::size_t sample_size() const { return sorted_.size(); }

 private:
  NoiseModel(Kind kind, double param) : kind_(kind), param_(param) {}
  Kind kind_;
  double param_;
  std::vector<double> sorted_;
};

struct Thresholds {
  double gamma_lo;
  double gamma_hi;
};

/// The unique pair with P(Z >= gamma_hi) = P(Z <= gamma_lo) = (1 - delta)/2.
/// Errors outside delta in (0,1), or when an empirical sample is smaller
/// than 100/delta entries.
Thresholds thresholds(const NoiseModel& model, double delta);

/// Decomposition of an error matrix into the small-entry band d0 and the
/// large-entry remainder s0 with exactly complementary supports.
struct BernoulliSplit {
  Matrix d0;    // mask ∘ z0
  Matrix s0;    // z0 - mask ∘ z0
  Matrix mask;  // {0,1}entries, 1 inside the open band (gamma_lo, gamma_hi)
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  double delta = 0.0;
};

/// Split z0 by the quantile band of the model at level delta. Entries equal
/// to a threshold go to s0 (the band is open). No arithmetic beyond the
/// comparison: d0 + s0 reproduces z0 exactly.
BernoulliSplit split(const Matrix& z0, const NoiseModel& model, double delta);

/// delta = c mu r / n^(1/3). Errors (does not clamp) when the value leaves
/// (0, 1), i.e. when the inputs are outside the asymptotic regime.
double delta_schedule(int n, double mu, int r, double c);

struct DeviceReport {
  double max_abs_d0 = 0.0;
  double ratio_max_d0 = 0.0;  // max|d0| / delta
  double l1_d0 = 0.0;
  double ratio_l1_d0 = 0.0;  // ||d0||_1 / (N T delta^2)
  std::int64_t mask_ones = 0;
  double mask_fraction = 0.0;
  // sign(s0) category counts against the target (delta, (1-delta)/2,
  // (1-delta)/2) for (zero, +1, -1), with the chi-square statistic.
  std::int64_t n_zero = 0;
  std::int64_t n_plus = 0;
  std::int64_t n_minus = 0;
  double chi_square = 0.0;
};

DeviceReport diagnostics(const BernoulliSplit& sp, double delta);

}  // namespace bpcp
