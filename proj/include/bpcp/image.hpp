#pragma once

#include <cstdint>
#include <string>

#include "bpcp/experiments.hpp"
#include "bpcp/matrix.hpp"
#include "bpcp/solver.hpp"

namespace bpcp {

/// Grayscale image with pixel values in [0, 1].
struct Image {
  Index height = 0;
  Index width = 0;
  Matrix pixels;  // height x width
};

/// Binary PGM (P5) with maxval 255; pixels map to [0,1] by v / 255.
Image load_pgm(const std::string& path);
/// Inverse mapping with round-half-up and clamping to [0, 255]. Writes a
/// canonical header so identical images give identical bytes.
void save_pgm(const Image& image, const std::string& path);

/// Frames-as-columns view of a repeated image: (height*width) x frames,
/// rank one by construction. Columns stack the image column-by-column.
struct FrameStack {
  Index height = 0;
  Index width = 0;
  Index frames = 0;
  Matrix matrix;
};

FrameStack stack(const Image& image, int frames);

/// Reshape a single stacked column back into an image.
Image unstack_column(const FrameStack& fs, const Matrix& columns,
                     Index frame_index);

struct DemoOptions {
  int frames = 50;
  NoiseKind noise = NoiseKind::kCauchy;
  double lambda_scale = 0.5;
  double noise_scale = 1.0;  // noise is unit scale on [0,1] pixels by default
  std::uint64_t seed = 42;
  int frame_index = 0;  // which frame to emit
  int max_iters = 20000;
  SvdMode svd_mode = SvdMode::kTruncated;
};

struct DemoOutput {
  Image original;
  Image noisy;      // the emitted frame, affine-rescaled for display
  Image recovered;  // same
  Image residual;   // symmetric rescale around zero (0 -> gray 128)
  double rel_error = 0.0;  // ||L_hat - L0||_F^2 / ||L0||_F^2
  double psnr = 0.0;       // of the recovered frame against the original
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double sigma_ratio = 0.0;            // sigma2 / sigma1 of L_hat
  double residual_correlation = 0.0;   // Pearson, residual frame vs original
  double recovered_min = 0.0, recovered_max = 0.0;  // rescale range
  double noisy_min = 0.0, noisy_max = 0.0;
  double residual_absmax = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Superimpose noise on the duplicated-frame stack, recover with the solver
/// and reshape the emitted frame back into images.
DemoOutput demo(const Image& image, const DemoOptions& options);

/// Write the four frames plus metrics.csv into a directory.
void write_demo(const DemoOutput& out, const std::string& outdir);

}  // namespace bpcp
