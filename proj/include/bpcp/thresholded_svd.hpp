#pragma once

#include "bpcp/matrix.hpp"

namespace bpcp {

/// All singular triplets of `a` with singular value above `tau`, via
/// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization.
/// May return a few extra triplets at or below tau; every triplet strictly
/// above tau is present and accurate to ~1e-12 * sigma_1. Falls back to the
/// dense decomposition when the threshold cuts too deep into the spectrum.
/// Deterministic: the start vector depends only on the matrix shape.
SvdFactors svd_above(const Matrix& a, double tau, int rank_guess);

}  // namespace bpcp
