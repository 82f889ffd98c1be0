#include "bpcp/bernoulli.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bpcp/stats.hpp"

namespace bpcp {

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian: sigma > 0");
  return NoiseModel(Kind::kGaussian, sigma);
}

NoiseModel NoiseModel::cauchy(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("cauchy: scale > 0");
  return NoiseModel(Kind::kCauchy, scale);
}

NoiseModel NoiseModel::empirical(const Matrix& sample) {
  require_finite(sample, "empirical sample");
  NoiseModel m(Kind::kEmpirical, 0.0);
  m.sorted_.assign(sample.data(), sample.data() + sample.size());
  std::sort(m.sorted_.begin(), m.sorted_.end());
  return m;
}

double NoiseModel::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("quantile: p must be in (0,1)");
  switch (kind_) {
    case Kind::kGaussian:
      return param_ * normal_quantile(p);
    case Kind::kCauchy:
      return param_ * cauchy_quantile(p);
    case Kind::kEmpirical: {
      // Type-7: h = (n-1)p, linear interpolation between order statistics.
      const double h = static_cast<double>(sorted_.size() - 1) * p;
      const auto lo = static_cast<std::size_t>(std::floor(h));
      const auto hi = std::min(lo + 1, sorted_.size() - 1);
      const double frac = h - std::floor(h);
      return sorted_[lo] + frac * (sorted_[hi] - sorted_[lo]);
    }
  }
  throw std::logic_error("unreachable");
}

Thresholds thresholds(const NoiseModel& model, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("thresholds: delta must be in (0,1)");
  if (model.kind() == NoiseModel::Kind::kEmpirical &&
      static_cast<double>(model.sample_size()) < 100.0 / delta) {
    throw std::invalid_argument(
        "thresholds: empirical sample too small for this delta");
  }
  const double tail = (1.0 - delta) / 2.0;
  return Thresholds{model.quantile(tail), model.quantile(1.0 - tail)};
}

BernoulliSplit split(const Matrix& z0, const NoiseModel& model, double delta) {
  require_finite(z0, "split input");
  const Thresholds th = thresholds(model, delta);
  BernoulliSplit sp;
  sp.gamma_lo = th.gamma_lo;
  sp.gamma_hi = th.gamma_hi;
  sp.delta = delta;
  sp.mask.resize(z0.rows(), z0.cols());
  sp.d0.resize(z0.rows(), z0.cols());
  sp.s0.resize(z0.rows(), z0.cols());
  for (Index i = 0; i < z0.rows(); ++i) {
    for (Index j = 0; j < z0.cols(); ++j) {
      const double z = z0(i, j);
      const bool banded = th.gamma_lo < z && z < th.gamma_hi;
      sp.mask(i, j) = banded ? 1.0 : 0.0;
      sp.d0(i, j) = banded ? z : 0.0;
      sp.s0(i, j) = banded ? 0.0 : z;
    }
  }
  return sp;
}

double delta_schedule(int n, double mu, int r, double c) {
  if (n < 1 || r < 1 || !(mu > 0.0) || !(c > 0.0))
    throw std::invalid_argument("delta_schedule: bad inputs");
  const double value = c * mu * static_cast<double>(r) / std::cbrt(n);
  if (!(value > 0.0 && value < 1.0)) {
    throw std::domain_error(
        "delta_schedule: value outside (0,1); inputs are outside the "
        "asymptotic regime");
  }
  return value;
}

DeviceReport diagnostics(const BernoulliSplit& sp, double delta) {
  DeviceReport rep;
  const double nt =
      static_cast<double>(sp.d0.rows()) * static_cast<double>(sp.d0.cols());
  rep.max_abs_d0 = norm_inf(sp.d0);
  rep.ratio_max_d0 = rep.max_abs_d0 / delta;
  rep.l1_d0 = norm_l1(sp.d0);
  rep.ratio_l1_d0 = rep.l1_d0 / (nt * delta * delta);
  rep.mask_ones = static_cast<std::int64_t>(sp.mask.sum());
  rep.mask_fraction = static_cast<double>(rep.mask_ones) / nt;
  for (Index i = 0; i < sp.s0.rows(); ++i) {
    for (Index j = 0; j < sp.s0.cols(); ++j) {
      const double s = sp.s0(i, j);
      if (s > 0.0)
        ++rep.n_plus;
      else if (s < 0.0)
        ++rep.n_minus;
      else
        ++rep.n_zero;
    }
  }
  const double expected_zero = nt * delta;
  const double expected_tail = nt * (1.0 - delta) / 2.0;
  auto term = [](double obs, double exp) {
    return exp > 0.0 ? (obs - exp) * (obs - exp) / exp : 0.0;
  };
  rep.chi_square = term(static_cast<double>(rep.n_zero), expected_zero) +
                   term(static_cast<double>(rep.n_plus), expected_tail) +
                   term(static_cast<double>(rep.n_minus), expected_tail);
  return rep;
}

}  // namespace bpcp
