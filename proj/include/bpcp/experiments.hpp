#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpcp/certificate.hpp"
#include "bpcp/matrix.hpp"
#include "bpcp/solver.hpp"

namespace bpcp {

enum class NoiseKind { kGaussian, kCauchy };

const char* to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// Grid description for the consistency benchmark. Streams are derived from
/// (seed, cell, replication), so fills are reproducible under any schedule.
struct ExperimentSpec {
  std::vector<std::pair<int, int>> sizes;  // (N, T)
  std::vector<int> ranks;
  std::vector<NoiseKind> noises;
  double lambda_scale = 0.7;
  int replications = 10;
  std::uint64_t seed = 42;
  int max_iters = 20000;
  SvdMode svd_mode = SvdMode::kTruncated;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct CellKey {
  int n, t, r;
  NoiseKind noise;
};

struct CellStats {
  double mse_mean = 0.0;    // mean of (1/NT)||L_hat - L0||_F^2
  double mse_stderr = 0.0;
  double rel_mean = 0.0;    // mean of ||L_hat - L0||_F^2 / ||L0||_F^2
  double rel_stderr = 0.0;
  int reps = 0;
  int nonconverged = 0;
  bool flagged = false;  // more than 10% of replications hit the cap
  double mean_iterations = 0.0;
};

struct RepOutcome {
  double mse = 0.0;
  double rel = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ExperimentResult {
  std::vector<std::pair<CellKey, CellStats>> cells;
  std::vector<std::pair<CellKey, std::vector<RepOutcome>>> replications;
};

/// Rank-r product of independent standard normal factors (N x r) (r x T).
Matrix gen_low_rank(int n, int t, int r, std::uint64_t seed);

/// I.i.d. noise fill; Cauchy entries are tan(pi (U - 1/2)).
Matrix gen_noise(int n, int t, NoiseKind kind, std::uint64_t seed);

/// Per-replication stream id for a grid cell; exposed so tests and the
/// harness derive identical instances.
std::uint64_t replication_seed(std::uint64_t base, int cell_index, int rep,
                               int purpose);

ExperimentResult run_grid(const ExperimentSpec& spec);

/// One CSV row per (cell, metric); columns
/// n,t,r,noise,metric,mean,stderr,reps,nonconverged.
void write_metric_csv(const ExperimentResult& result, const std::string& path,
                      const std::string& metric);

// ---------------------------------------------------------------------------
// Empirical bound monitors (diagnostics, never gates on the solver)

struct MonitorReport {
  // Off-space disturbance mass against the band mass:
  // (1/lambda)||P_Phi_perp H||_* + ||P_Omega_perp H||_1 vs 8 ||D0||_1.
  double offspace_lhs = 0.0;
  double offspace_rhs = 0.0;
  double offspace_ratio = 0.0;
  // Projection separation:
  // ||P_Phi H - P_Omega H||_F^2 vs (delta/4)(||P_Phi H||_F^2 + ||P_Omega H||_F^2).
  double separation_lhs = 0.0;
  double separation_rhs = 0.0;
  bool separation_holds = false;
  double composed_norm = 0.0;         // measured ||P_Omega P_Phi||
  bool separation_sufficient = false; // 1 - ||P_Omega P_Phi|| >= delta/4
  // mse / ((alpha v mu^{8/3} r^2) delta)
  double consistency_mse = 0.0;
  double consistency_scale = 0.0;
  double consistency_ratio = 0.0;
  double alpha_linf = 0.0;  // ||L0||_inf
  double mu_implied = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
};

MonitorReport bound_monitors(const Matrix& l0, const Matrix& z0,
                             const Matrix& l_hat, double delta, double lambda,
                             const TangentSpace& ts, const SupportSet& s);

}  // namespace bpcp
