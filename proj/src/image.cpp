#include "bpcp/image.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "bpcp/matrix_io.hpp"

namespace bpcp {

namespace {

// Next whitespace-delimited token, skipping '#' comments per the PNM spec.
int next_pnm_value(std::istream& is, const std::string& path) {
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (std::isspace(c)) {
      c = is.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c))
    throw IoError("pgm: malformed header in " + path);
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 26) throw IoError("pgm: header value overflow in " + path);
    c = is.get();
  }
  if (c != EOF) is.unget();
  return value;
}

int to_byte(double v) {
  const double scaled = std::floor(v * 255.0 + 0.5);  // round half up
  if (scaled < 0.0) return 0;
  if (scaled > 255.0) return 255;
  return static_cast<int>(scaled);
}

Image render_affine(const Matrix& values, Index height, Index width,
                    double lo, double hi) {
  Image img;
  img.height = height;
  img.width = width;
  img.pixels.resize(height, width);
  const double span = hi - lo;
  for (Index i = 0; i < height; ++i) {
    for (Index j = 0; j < width; ++j) {
      img.pixels(i, j) =
          span > 0.0 ? (values(i, j) - lo) / span : 0.5019607843137255;
    }
  }
  return img;
}

}  // namespace

Image load_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[2] = {0, 0};
  is.read(magic, 2);
  if (!is || magic[0] != 'P' || magic[1] != '5')
    throw IoError("pgm: not a binary PGM (P5): " + path);
  const int width = next_pnm_value(is, path);
  const int height = next_pnm_value(is, path);
  const int maxval = next_pnm_value(is, path);
  if (width < 1 || height < 1) throw IoError("pgm: bad dimensions in " + path);
  if (maxval != 255) throw IoError("pgm: only maxval 255 supported: " + path);
  is.get();  // single whitespace byte before the payload
  std::vector<unsigned char> buf(static_cast<std::size_t>(width) * height);
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!is) throw IoError("pgm: truncated payload in " + path);
  Image img;
  img.height = height;
  img.width = width;
  img.pixels.resize(height, width);
  for (Index i = 0; i < height; ++i)
    for (Index j = 0; j < width; ++j)
      img.pixels(i, j) =
          static_cast<double>(buf[static_cast<std::size_t>(i) * width + j]) /
          255.0;
  return img;
}

void save_pgm(const Image& image, const std::string& path) {
  if (image.height < 1 || image.width < 1)
    throw std::invalid_argument("save_pgm: empty image");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f, "P5\n%lld %lld\n255\n",
               static_cast<long long>(image.width),
               static_cast<long long>(image.height));
  std::vector<unsigned char> buf(
      static_cast<std::size_t>(image.width) * image.height);
  for (Index i = 0; i < image.height; ++i)
    for (Index j = 0; j < image.width; ++j)
      buf[static_cast<std::size_t>(i) * image.width + j] =
          static_cast<unsigned char>(to_byte(image.pixels(i, j)));
  std::fwrite(buf.data(), 1, buf.size(), f);
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

FrameStack stack(const Image& image, int frames) {
  if (frames < 1) throw std::invalid_argument("stack: frames >= 1");
  FrameStack fs;
  fs.height = image.height;
  fs.width = image.width;
  fs.frames = frames;
  fs.matrix.resize(image.height * image.width, frames);
  // Column-by-column vectorization of the image.
  Index row = 0;
  for (Index j = 0; j < image.width; ++j) {
    for (Index i = 0; i < image.height; ++i) {
      const double v = image.pixels(i, j);
      for (Index fcol = 0; fcol < frames; ++fcol) fs.matrix(row, fcol) = v;
      ++row;
    }
  }
  return fs;
}

Image unstack_column(const FrameStack& fs, const Matrix& columns,
                     Index frame_index) {
  if (columns.rows() != fs.height * fs.width || frame_index < 0 ||
      frame_index >= columns.cols())
    throw std::invalid_argument("unstack_column: shape mismatch");
  Image img;
  img.height = fs.height;
  img.width = fs.width;
  img.pixels.resize(fs.height, fs.width);
  Index row = 0;
  for (Index j = 0; j < fs.width; ++j)
    for (Index i = 0; i < fs.height; ++i)
      img.pixels(i, j) = columns(row++, frame_index);
  return img;
}

DemoOutput demo(const Image& image, const DemoOptions& options) {
  require_finite(image.pixels, "demo image");
  const FrameStack fs = stack(image, options.frames);
  Matrix y = fs.matrix;
  if (options.noise_scale != 0.0) {
    y += options.noise_scale *
         gen_noise(static_cast<int>(fs.matrix.rows()), options.frames,
                   options.noise, options.seed);
  }

  SolverConfig config;
  config.lambda = default_lambda(static_cast<int>(fs.matrix.rows()),
                                 options.frames, options.lambda_scale);
  config.max_iters = options.max_iters;
  config.svd_mode = options.svd_mode;
  config.keep_log = false;
  const SolveResult sol = solve_bpcp(y, config);

  DemoOutput out;
  out.iterations = sol.iterations;
  out.converged = sol.converged;
  out.original = image;
  out.rel_error =
      (sol.l_hat - fs.matrix).squaredNorm() / fs.matrix.squaredNorm();

  const SvdFactors f = svd(sol.l_hat);
  out.sigma1 = f.sigma.size() > 0 ? f.sigma(0) : 0.0;
  out.sigma2 = f.sigma.size() > 1 ? f.sigma(1) : 0.0;
  out.sigma_ratio = out.sigma1 > 0.0 ? out.sigma2 / out.sigma1 : 0.0;

  const Index fi = options.frame_index;
  const Image rec_raw = unstack_column(fs, sol.l_hat, fi);
  const Image noisy_raw = unstack_column(fs, y, fi);
  const Image resid_raw = unstack_column(fs, sol.z_hat, fi);

  // PSNR of the recovered frame against the original on the [0,1] scale.
  const double frame_mse =
      (rec_raw.pixels - image.pixels).squaredNorm() /
      static_cast<double>(image.height * image.width);
  out.psnr = frame_mse > 0.0 ? 10.0 * std::log10(1.0 / frame_mse) : HUGE_VAL;

  // Pearson correlation between the residual frame and the original image.
  {
    const auto x = resid_raw.pixels.reshaped();
    const auto g = image.pixels.reshaped();
    const double nx = static_cast<double>(x.size());
    const double mx = x.mean(), mg = g.mean();
    const double sxg = ((x.array() - mx) * (g.array() - mg)).sum();
    const double sxx = (x.array() - mx).square().sum();
    const double sgg = (g.array() - mg).square().sum();
    out.residual_correlation =
        (sxx > 0.0 && sgg > 0.0) ? sxg / std::sqrt(sxx * sgg) : 0.0;
    (void)nx;
  }

  out.noisy_min = noisy_raw.pixels.minCoeff();
  out.noisy_max = noisy_raw.pixels.maxCoeff();
  out.noisy = render_affine(noisy_raw.pixels, fs.height, fs.width,
                            out.noisy_min, out.noisy_max);
  out.recovered_min = rec_raw.pixels.minCoeff();
  out.recovered_max = rec_raw.pixels.maxCoeff();
  out.recovered = render_affine(rec_raw.pixels, fs.height, fs.width,
                                out.recovered_min, out.recovered_max);

  // Symmetric rescale keeps the sign structure visible: zero maps to 128.
  out.residual_absmax = norm_inf(resid_raw.pixels);
  out.residual.height = fs.height;
  out.residual.width = fs.width;
  out.residual.pixels.resize(fs.height, fs.width);
  for (Index i = 0; i < fs.height; ++i) {
    for (Index j = 0; j < fs.width; ++j) {
      const double v = out.residual_absmax > 0.0
                           ? resid_raw.pixels(i, j) / out.residual_absmax
                           : 0.0;
      out.residual.pixels(i, j) = (128.0 + 127.0 * v) / 255.0;
    }
  }
  return out;
}

void write_demo(const DemoOutput& out, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  const std::filesystem::path dir(outdir);
  save_pgm(out.original, (dir / "original.pgm").string());
  save_pgm(out.noisy, (dir / "noisy.pgm").string());
  save_pgm(out.recovered, (dir / "recovered.pgm").string());
  save_pgm(out.residual, (dir / "residual.pgm").string());
  std::FILE* f = std::fopen((dir / "metrics.csv").string().c_str(), "w");
  if (!f) throw IoError("cannot open for writing: metrics.csv");
  std::fprintf(f, "key,value\n");
  std::fprintf(f, "rel_error,%.17g\n", out.rel_error);
  std::fprintf(f, "psnr,%.17g\n", out.psnr);
  std::fprintf(f, "sigma1,%.17g\n", out.sigma1);
  std::fprintf(f, "sigma2,%.17g\n", out.sigma2);
  std::fprintf(f, "sigma_ratio,%.17g\n", out.sigma_ratio);
  std::fprintf(f, "residual_correlation,%.17g\n", out.residual_correlation);
  std::fprintf(f, "recovered_min,%.17g\n", out.recovered_min);
  std::fprintf(f, "recovered_max,%.17g\n", out.recovered_max);
  std::fprintf(f, "residual_absmax,%.17g\n", out.residual_absmax);
  std::fprintf(f, "iterations,%d\n", out.iterations);
  std::fprintf(f, "converged,%d\n", out.converged ? 1 : 0);
  if (std::fclose(f) != 0) throw IoError("write failed: metrics.csv");
}

}  // namespace bpcp
