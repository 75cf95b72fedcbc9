#pragma once

#include <string>

#include "voxflow/core/image.hpp"
#include "voxflow/ops/sampling.hpp"

namespace voxflow::reg {

enum class Normalization { ZScore, MinMax };
Normalization normalization_from_string(const std::string &name);

struct FusionConfig {
  double w1 = 0.5;
  double w2 = 0.5;
  Normalization normalization = Normalization::ZScore;
  ops::Interpolation interpolation = ops::Interpolation::Trilinear;
};

// z-score uses the population standard deviation over all voxels.
// Throws ZeroVariance for constant input.
ImageVolume normalize(const ImageVolume &v, Normalization n);

// `b` is resampled onto a's grid first, then both are normalised there.
ImageVolume fuse_weighted(const ImageVolume &a, const ImageVolume &b, const FusionConfig &cfg);
// Undecimated single-level haar: approximation averaged, each detail
// coefficient taken from the input with larger magnitude (ties from a).
// With unit-DC haar filters the subbands sum back to the input exactly up
// to rounding, which is the reconstruction used here.
ImageVolume fuse_wavelet(const ImageVolume &a, const ImageVolume &b, const FusionConfig &cfg);
// Weights from the leading eigenvector of the 2x2 covariance, sign chosen
// so that v1 + v2 > 0.
struct PcaWeights {
  double v1 = 0;
  double v2 = 0;
};
PcaWeights pca_fusion_weights(const ImageVolume &na, const ImageVolume &nb);
ImageVolume fuse_pca(const ImageVolume &a, const ImageVolume &b, const FusionConfig &cfg);

} // namespace voxflow::reg
