#include "bpcp/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "bpcp/matrix_io.hpp"
#include "bpcp/rng.hpp"

namespace bpcp {

const char* to_string(NoiseKind kind) {
  return kind == NoiseKind::kGaussian ? "gaussian" : "cauchy";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseKind::kGaussian;
  if (name == "cauchy") return NoiseKind::kCauchy;
  throw std::invalid_argument("unknown noise kind: " + name);
}

void ExperimentSpec::validate() const {
  if (sizes.empty() || ranks.empty() || noises.empty())
    throw std::invalid_argument("experiment spec: empty grid");
  for (auto [n, t] : sizes) {
    if (n < 2 || t < 2) throw std::invalid_argument("experiment spec: sizes >= 2");
    for (int r : ranks) {
      if (r < 1 || r > std::min(n, t))
        throw std::invalid_argument("experiment spec: ranks in [1, min(N,T)]");
    }
  }
  if (replications < 1)
    throw std::invalid_argument("experiment spec: replications >= 1");
  if (!(lambda_scale > 0.0))
    throw std::invalid_argument("experiment spec: lambda_scale > 0");
}

Matrix gen_low_rank(int n, int t, int r, std::uint64_t seed) {
  if (r < 1 || r > std::min(n, t))
    throw std::invalid_argument("gen_low_rank: rank out of range");
  RngStream rng(seed);
  Matrix a(n, r), b(r, t);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rng.next_normal();
  for (Index i = 0; i < b.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j) b(i, j) = rng.next_normal();
  return a * b;
}

Matrix gen_noise(int n, int t, NoiseKind kind, std::uint64_t seed) {
  RngStream rng(seed);
  Matrix z(n, t);
  if (kind == NoiseKind::kGaussian) {
    for (Index i = 0; i < z.rows(); ++i)
      for (Index j = 0; j < z.cols(); ++j) z(i, j) = rng.next_normal();
  } else {
    for (Index i = 0; i < z.rows(); ++i)
      for (Index j = 0; j < z.cols(); ++j) z(i, j) = rng.next_cauchy();
  }
  return z;
}

std::uint64_t replication_seed(std::uint64_t base, int cell_index, int rep,
                               int purpose) {
  std::uint64_t x = splitmix64(base ^ 0xb5297a4d9c14f3c1ull);
  x = splitmix64(x ^ static_cast<std::uint64_t>(cell_index) * 0x100001b3ull);
  x = splitmix64(x ^ static_cast<std::uint64_t>(rep) * 0x9e3779b9ull);
  return splitmix64(x ^ static_cast<std::uint64_t>(purpose));
}

namespace {

RepOutcome run_one(const ExperimentSpec& spec, const CellKey& key,
                   int cell_index, int rep) {
  const Matrix l0 = gen_low_rank(key.n, key.t, key.r,
                                 replication_seed(spec.seed, cell_index, rep, 0));
  const Matrix z0 = gen_noise(key.n, key.t, key.noise,
                              replication_seed(spec.seed, cell_index, rep, 1));
  const Matrix y = l0 + z0;

  SolverConfig config;
  config.lambda = default_lambda(key.n, key.t, spec.lambda_scale);
  config.max_iters = spec.max_iters;
  config.svd_mode = spec.svd_mode;
  config.keep_log = false;
  const SolveResult sol = solve_bpcp(y, config);

  RepOutcome out;
  const double err2 = (sol.l_hat - l0).squaredNorm();
  out.mse = err2 / (static_cast<double>(key.n) * key.t);
  out.rel = err2 / l0.squaredNorm();
  out.iterations = sol.iterations;
  out.converged = sol.converged;
  return out;
}

CellStats aggregate(const std::vector<RepOutcome>& reps) {
  CellStats st;
  st.reps = static_cast<int>(reps.size());
  double mse_sum = 0.0, rel_sum = 0.0, iter_sum = 0.0;
  for (const auto& r : reps) {
    mse_sum += r.mse;
    rel_sum += r.rel;
    iter_sum += r.iterations;
    if (!r.converged) ++st.nonconverged;
  }
  const double n = static_cast<double>(st.reps);
  st.mse_mean = mse_sum / n;
  st.rel_mean = rel_sum / n;
  st.mean_iterations = iter_sum / n;
  if (st.reps > 1) {
    double mse_var = 0.0, rel_var = 0.0;
    for (const auto& r : reps) {
      mse_var += (r.mse - st.mse_mean) * (r.mse - st.mse_mean);
      rel_var += (r.rel - st.rel_mean) * (r.rel - st.rel_mean);
    }
    mse_var /= (n - 1.0);
    rel_var /= (n - 1.0);
    st.mse_stderr = std::sqrt(mse_var / n);
    st.rel_stderr = std::sqrt(rel_var / n);
  }
  st.flagged = st.nonconverged * 10 > st.reps;
  return st;
}

}  // namespace

ExperimentResult run_grid(const ExperimentSpec& spec) {
  spec.validate();

  std::vector<CellKey> keys;
  for (auto [n, t] : spec.sizes)
    for (int r : spec.ranks)
      for (NoiseKind noise : spec.noises) keys.push_back({n, t, r, noise});

  struct Task {
    int cell;
    int rep;
  };
  std::vector<Task> tasks;
  for (int c = 0; c < static_cast<int>(keys.size()); ++c)
    for (int rep = 0; rep < spec.replications; ++rep) tasks.push_back({c, rep});

  std::vector<std::vector<RepOutcome>> outcomes(
      keys.size(), std::vector<RepOutcome>(spec.replications));

  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int nthreads = std::max(
      1, std::min(spec.threads > 0 ? spec.threads : std::max(hw, 1),
                  static_cast<int>(tasks.size())));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      outcomes[task.cell][task.rep] =
          run_one(spec, keys[task.cell], task.cell, task.rep);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Merge in key order: deterministic regardless of completion order.
  ExperimentResult result;
  for (std::size_t c = 0; c < keys.size(); ++c) {
    result.cells.emplace_back(keys[c], aggregate(outcomes[c]));
    result.replications.emplace_back(keys[c], outcomes[c]);
  }
  return result;
}

void write_metric_csv(const ExperimentResult& result, const std::string& path,
                      const std::string& metric) {
  if (metric != "mse_per_entry" && metric != "rel_error")
    throw std::invalid_argument("unknown metric: " + metric);
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f, "n,t,r,noise,metric,mean,stderr,reps,nonconverged\n");
  for (const auto& [key, st] : result.cells) {
    const double mean = metric == "mse_per_entry" ? st.mse_mean : st.rel_mean;
    const double se = metric == "mse_per_entry" ? st.mse_stderr : st.rel_stderr;
    std::fprintf(f, "%d,%d,%d,%s,%s,%.17g,%.17g,%d,%d\n", key.n, key.t, key.r,
                 to_string(key.noise), metric.c_str(), mean, se, st.reps,
                 st.nonconverged);
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

MonitorReport bound_monitors(const Matrix& l0, const Matrix& z0,
                             const Matrix& l_hat, double delta, double lambda,
                             const TangentSpace& ts, const SupportSet& s) {
  MonitorReport rep;
  rep.delta = delta;
  rep.lambda = lambda;

  const Matrix h = l_hat - l0;
  const Matrix d0 = proj_omega_perp(s, z0);  // D0 lives off the support of S0

  const Matrix h_phi = proj_phi(ts, h);
  const Matrix h_phi_perp = h - h_phi;
  const Matrix h_omega = proj_omega(s, h);

  rep.offspace_lhs = norm_nuclear(h_phi_perp) / lambda +
                     norm_l1(proj_omega_perp(s, h));
  rep.offspace_rhs = 8.0 * norm_l1(d0);
  rep.offspace_ratio =
      rep.offspace_rhs > 0.0 ? rep.offspace_lhs / rep.offspace_rhs
                             : (rep.offspace_lhs > 0.0 ? HUGE_VAL : 0.0);

  rep.separation_lhs = (h_phi - h_omega).squaredNorm();
  rep.separation_rhs =
      delta / 4.0 * (h_phi.squaredNorm() + h_omega.squaredNorm());
  rep.separation_holds = rep.separation_lhs >= rep.separation_rhs;
  rep.composed_norm = op_norm_composed(ts, s).value;
  rep.separation_sufficient = 1.0 - rep.composed_norm >= delta / 4.0;

  rep.alpha_linf = norm_inf(l0);
  rep.mu_implied = implied_mu(ts);
  const double r = static_cast<double>(ts.rank());
  rep.consistency_mse =
      h.squaredNorm() /
      (static_cast<double>(l0.rows()) * static_cast<double>(l0.cols()));
  rep.consistency_scale =
      std::max(rep.alpha_linf, std::pow(rep.mu_implied, 8.0 / 3.0) * r * r) *
      delta;
  rep.consistency_ratio = rep.consistency_scale > 0.0
                              ? rep.consistency_mse / rep.consistency_scale
                              : 0.0;
  return rep;
}

}  // namespace bpcp
