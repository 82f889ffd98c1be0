#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "bpcp/bernoulli.hpp"
#include "bpcp/certificate.hpp"
#include "bpcp/experiments.hpp"
#include "bpcp/image.hpp"
#include "bpcp/matrix_io.hpp"
#include "bpcp/solver.hpp"

namespace {

using namespace bpcp;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

SvdMode parse_svd_mode(const std::string& s) {
  if (s == "full") return SvdMode::kFull;
  if (s == "truncated") return SvdMode::kTruncated;
  if (s == "validate") return SvdMode::kValidate;
  throw CLI::ValidationError("--svd must be full, truncated or validate");
}

int run_solve(const std::string& input, const std::string& lambda_arg,
              double lambda_scale, const std::string& alpha_arg,
              const std::string& nu_arg, double tol_feas, double tol_prog,
              int max_iters, const std::string& out_l, const std::string& out_z,
              const std::string& log_path, const std::string& svd_arg,
              bool clip) {
  Matrix y;
  try {
    y = read_matrix(input);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  SolverConfig config;
  config.lambda = lambda_arg == "auto"
                      ? default_lambda(static_cast<int>(y.rows()),
                                       static_cast<int>(y.cols()), lambda_scale)
                      : std::stod(lambda_arg);
  if (alpha_arg != "inf") config.alpha = std::stod(alpha_arg);
  if (nu_arg != "auto") config.nu = std::stod(nu_arg);
  config.tol_feasibility = tol_feas;
  config.tol_progress = tol_prog;
  config.max_iters = max_iters;
  config.svd_mode = parse_svd_mode(svd_arg);
  config.clip_to_alpha = clip;

  const SolveResult sol = solve_bpcp(y, config);

  try {
    if (!out_l.empty()) write_matrix(sol.l_hat, out_l);
    if (!out_z.empty()) write_matrix(sol.z_hat, out_z);
    if (!log_path.empty()) {
      std::FILE* f = std::fopen(log_path.c_str(), "w");
      if (!f) throw IoError("cannot open for writing: " + log_path);
      std::fprintf(f,
                   "iter,objective,feasibility,progress,al_value,"
                   "al_block_delta\n");
      for (const auto& r : sol.per_iteration_log) {
        std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter,
                     r.objective, r.feasibility, r.progress, r.al_value,
                     r.al_block_delta);
      }
      std::fclose(f);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::printf("iterations=%d converged=%d feasibility=%.6g progress=%.6g "
              "objective=%.10g alpha_satisfied=%d nu=%.6g lambda=%.6g\n",
              sol.iterations, sol.converged ? 1 : 0, sol.feasibility_residual,
              sol.progress_residual, sol.objective, sol.alpha_satisfied ? 1 : 0,
              sol.nu_used, sol.lambda_used);
  return sol.converged ? 0 : 2;
}

int run_device(const std::string& model_arg, double delta, bool delta_auto,
               double mu, int rank, double c, const std::string& input,
               const std::string& report_path) {
  Matrix z0;
  try {
    z0 = read_matrix(input);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  NoiseModel model = model_arg == "gaussian" ? NoiseModel::gaussian()
                     : model_arg == "cauchy" ? NoiseModel::cauchy()
                                             : NoiseModel::empirical(z0);
  if (delta_auto) {
    delta = delta_schedule(
        static_cast<int>(std::min(z0.rows(), z0.cols())), mu, rank, c);
  }
  const BernoulliSplit sp = split(z0, model, delta);
  const DeviceReport rep = diagnostics(sp, delta);

  std::FILE* f = report_path.empty() ? stdout
                                     : std::fopen(report_path.c_str(), "w");
  if (!f) {
    std::cerr << "error: cannot open " << report_path << "\n";
    return 1;
  }
  std::fprintf(f, "model,delta,gamma_lo,gamma_hi,mask_fraction,max_abs_d0,"
                  "ratio_max_d0_delta,l1_d0,ratio_l1_ntdelta2,n_zero,n_plus,"
                  "n_minus,chi_square\n");
  std::fprintf(f, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%lld,"
                  "%lld,%lld,%.17g\n",
               model_arg.c_str(), delta, sp.gamma_lo, sp.gamma_hi,
               rep.mask_fraction, rep.max_abs_d0, rep.ratio_max_d0, rep.l1_d0,
               rep.ratio_l1_d0, static_cast<long long>(rep.n_zero),
               static_cast<long long>(rep.n_plus),
               static_cast<long long>(rep.n_minus), rep.chi_square);
  if (f != stdout) std::fclose(f);
  return 0;
}

int run_certify(int n, int t, int r, double delta, const std::string& lambda_arg,
                int seeds, std::uint64_t seed_base,
                const std::string& report_path) {
  std::FILE* f = report_path.empty() ? stdout
                                     : std::fopen(report_path.c_str(), "w");
  if (!f) {
    std::cerr << "error: cannot open " << report_path << "\n";
    return 1;
  }
  std::fprintf(f, "seed,lambda,delta,q,mu_implied,norm_w,cond1_residual,"
                  "cond3_lhs,cond3_bound,cond4_lhs,cond4_bound,composed_sq,"
                  "composed_bound,pass_cond1,pass_cond2,pass_cond3,pass_cond4,"
                  "pass_composed,empty_batches\n");
  const double q = golfing_q(delta);
  for (int s = 0; s < seeds; ++s) {
    RngStream rng(seed_base, static_cast<std::uint64_t>(s));
    RngStream rng_model = rng.derive(0);
    RngStream rng_batches = rng.derive(1);
    RngStream rng_signs = rng.derive(2);
    const TangentSpace ts = random_orthogonal_model(n, t, r, rng_model);
    const auto batches = sample_batches(n, t, 4, q, rng_batches);
    const SupportSet omega = support_from_batches(batches);
    const Matrix e = rademacher_on(omega, rng_signs);
    const double lambda =
        lambda_arg == "auto" ? rates(n, implied_mu(ts), r).lambda
                             : std::stod(lambda_arg);
    const GolfingResult gr = golfing_wl(ts, batches, q);
    const Matrix ws = neumann_ws(ts, omega, e, lambda);
    const CertificateReport rep =
        verify_certificate(ts, omega, e, gr.w_l + ws, lambda, delta);
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                    "%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d,%d,%d\n",
                 s, lambda, delta, q, rep.mu_implied, rep.norm_w,
                 rep.cond1_residual, rep.cond3_lhs, rep.cond3_bound,
                 rep.cond4_lhs, rep.cond4_bound, rep.composed_sq,
                 rep.composed_bound, rep.pass_cond1, rep.pass_cond2,
                 rep.pass_cond3, rep.pass_cond4, rep.pass_composed,
                 gr.empty_batches);
  }
  if (f != stdout) std::fclose(f);
  return 0;
}

int run_bench(const std::string& sizes_arg, const std::string& ranks_arg,
              const std::string& noise_arg, int reps, std::uint64_t seed,
              const std::string& out_arg, double lambda_scale, int max_iters,
              int threads, const std::string& svd_arg) {
  ExperimentSpec spec;
  for (const auto& s : split_csv(sizes_arg)) {
    const int n = std::stoi(s);
    spec.sizes.emplace_back(n, n);
  }
  for (const auto& s : split_csv(ranks_arg)) spec.ranks.push_back(std::stoi(s));
  for (const auto& s : split_csv(noise_arg))
    spec.noises.push_back(noise_kind_from_string(s));
  spec.replications = reps;
  spec.seed = seed;
  spec.lambda_scale = lambda_scale;
  spec.max_iters = max_iters;
  spec.threads = threads;
  spec.svd_mode = parse_svd_mode(svd_arg);

  const auto outs = split_csv(out_arg);
  if (outs.size() != 2) {
    std::cerr << "error: --out expects two paths: table1.csv,table2.csv\n";
    return 1;
  }
  const ExperimentResult result = run_grid(spec);
  write_metric_csv(result, outs[0], "mse_per_entry");
  write_metric_csv(result, outs[1], "rel_error");
  for (const auto& [key, st] : result.cells) {
    std::printf("n=%d t=%d r=%d %s: mse=%.6g (se %.2g) rel=%.6g (se %.2g) "
                "reps=%d nonconverged=%d%s\n",
                key.n, key.t, key.r, to_string(key.noise), st.mse_mean,
                st.mse_stderr, st.rel_mean, st.rel_stderr, st.reps,
                st.nonconverged, st.flagged ? " [flagged]" : "");
  }
  return 0;
}

int run_demo(const std::string& image_path, int frames,
             const std::string& noise_arg, double lambda_scale,
             double noise_scale, std::uint64_t seed, int frame_index,
             int max_iters, const std::string& svd_arg,
             const std::string& outdir) {
  Image img;
  try {
    img = load_pgm(image_path);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  DemoOptions opt;
  opt.frames = frames;
  opt.noise = noise_kind_from_string(noise_arg);
  opt.lambda_scale = lambda_scale;
  opt.noise_scale = noise_scale;
  opt.seed = seed;
  opt.frame_index = frame_index;
  opt.max_iters = max_iters;
  opt.svd_mode = parse_svd_mode(svd_arg);
  const DemoOutput out = demo(img, opt);
  write_demo(out, outdir);
  std::printf("rel_error=%.6g psnr=%.4g sigma_ratio=%.6g "
              "residual_correlation=%.6g iterations=%d converged=%d\n",
              out.rel_error, out.psnr, out.sigma_ratio,
              out.residual_correlation, out.iterations, out.converged ? 1 : 0);
  return out.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded principal component pursuit toolkit"};
  app.require_subcommand(1);

  // solve
  std::string in_path, lambda_arg = "auto", alpha_arg = "inf", nu_arg = "auto";
  std::string out_l, out_z, log_path, svd_arg = "full";
  double lambda_scale = 0.7, tol_feas = 1e-7, tol_prog = 1e-5;
  int max_iters = 1000;
  bool clip = false;
  auto* solve = app.add_subcommand("solve", "Recover (L, Z) from one matrix");
  solve->add_option("--input", in_path, "matrix file (.csv or binary)")
      ->required();
  solve->add_option("--lambda", lambda_arg, "l1 weight or 'auto'");
  solve->add_option("--lambda-scale", lambda_scale,
                    "c in the auto formula c(log(N^T)/NT)^{1/3}");
  solve->add_option("--alpha", alpha_arg, "entrywise bound or 'inf'");
  solve->add_option("--nu", nu_arg, "penalty or 'auto'");
  solve->add_option("--tol-feas", tol_feas, "relative feasibility tolerance");
  solve->add_option("--tol-prog", tol_prog, "absolute progress tolerance");
  solve->add_option("--max-iters", max_iters, "iteration cap");
  solve->add_option("--out-l", out_l, "write recovered L");
  solve->add_option("--out-z", out_z, "write recovered Z");
  solve->add_option("--log", log_path, "per-iteration csv");
  solve->add_option("--svd", svd_arg, "full | truncated | validate");
  solve->add_flag("--clip-alpha", clip, "project L onto [-alpha, alpha]");

  // device
  std::string model_arg = "gaussian", dev_input, dev_report;
  double delta = 0.1, dev_mu = 1.0, dev_c = 1.0;
  int dev_rank = 1;
  bool delta_auto = false;
  auto* device = app.add_subcommand("device", "Split an error matrix");
  device->add_option("--model", model_arg, "gaussian | cauchy | empirical");
  device->add_option("--delta", delta, "band probability");
  device->add_flag("--delta-auto", delta_auto,
                   "use the schedule c mu r / N^{1/3}");
  device->add_option("--mu", dev_mu, "incoherence for --delta-auto");
  device->add_option("--rank", dev_rank, "rank for --delta-auto");
  device->add_option("--c", dev_c, "constant for --delta-auto");
  device->add_option("--input", dev_input, "error matrix file")->required();
  device->add_option("--report", dev_report, "csv report path");

  // certify
  int cn = 60, ct = 60, cr = 1, seeds = 1;
  double cdelta = 0.3;
  std::string clambda = "auto", creport;
  std::uint64_t cseed = 42;
  auto* certify = app.add_subcommand("certify", "Dual-certificate laboratory");
  certify->add_option("--n", cn, "rows");
  certify->add_option("--t", ct, "columns");
  certify->add_option("--r", cr, "rank");
  certify->add_option("--delta", cdelta, "band probability");
  certify->add_option("--lambda", clambda, "weight or 'auto' (rate formula)");
  certify->add_option("--seeds", seeds, "number of seeded draws");
  certify->add_option("--seed", cseed, "base seed");
  certify->add_option("--report", creport, "csv of per-seed reports");

  // bench
  std::string sizes_arg = "200,300,400,500", ranks_arg = "1,3,5";
  std::string noise_arg = "gaussian,cauchy", out_arg = "table1.csv,table2.csv";
  std::string bench_svd = "truncated";
  int reps = 10, bench_iters = 20000, threads = 0;
  double bench_scale = 0.7;
  std::uint64_t bench_seed = 42;
  auto* bench = app.add_subcommand("bench", "Consistency benchmark grid");
  bench->add_option("--sizes", sizes_arg, "comma list of N (=T)");
  bench->add_option("--ranks", ranks_arg, "comma list of ranks");
  bench->add_option("--noise", noise_arg, "comma list of noise kinds");
  bench->add_option("--reps", reps, "replications per cell");
  bench->add_option("--seed", bench_seed, "base seed");
  bench->add_option("--out", out_arg, "table1.csv,table2.csv");
  bench->add_option("--lambda-scale", bench_scale, "c in the lambda formula");
  bench->add_option("--max-iters", bench_iters, "iteration cap per solve");
  bench->add_option("--threads", threads, "worker threads (0 = hardware)");
  bench->add_option("--svd", bench_svd, "full | truncated | validate");

  // demo
  std::string image_path, demo_noise = "cauchy", outdir = "demo_out";
  std::string demo_svd = "truncated";
  int frames = 50, frame_index = 0, demo_iters = 20000;
  double demo_scale = 0.5, noise_scale = 1.0;
  std::uint64_t demo_seed = 42;
  auto* dm = app.add_subcommand("demo", "Image denoising demonstration");
  dm->add_option("--image", image_path, "input PGM (P5)")->required();
  dm->add_option("--frames", frames, "number of duplicated frames");
  dm->add_option("--noise", demo_noise, "gaussian | cauchy");
  dm->add_option("--lambda-scale", demo_scale, "c in the lambda formula");
  dm->add_option("--noise-scale", noise_scale,
                 "noise amplitude relative to [0,1] pixels");
  dm->add_option("--seed", demo_seed, "noise seed");
  dm->add_option("--frame", frame_index, "which frame to emit");
  dm->add_option("--max-iters", demo_iters, "iteration cap");
  dm->add_option("--svd", demo_svd, "full | truncated | validate");
  dm->add_option("--outdir", outdir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      return run_solve(in_path, lambda_arg, lambda_scale, alpha_arg, nu_arg,
                       tol_feas, tol_prog, max_iters, out_l, out_z, log_path,
                       svd_arg, clip);
    }
    if (device->parsed()) {
      return run_device(model_arg, delta, delta_auto, dev_mu, dev_rank, dev_c,
                        dev_input, dev_report);
    }
    if (certify->parsed()) {
      return run_certify(cn, ct, cr, cdelta, clambda, seeds, cseed, creport);
    }
    if (bench->parsed()) {
      return run_bench(sizes_arg, ranks_arg, noise_arg, reps, bench_seed,
                       out_arg, bench_scale, bench_iters, threads, bench_svd);
    }
    if (dm->parsed()) {
      return run_demo(image_path, frames, demo_noise, demo_scale, noise_scale,
                      demo_seed, frame_index, demo_iters, demo_svd, outdir);
    }
  } catch (const bpcp::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
