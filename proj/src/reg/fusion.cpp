#include "voxflow/reg/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "voxflow/core/cancel.hpp"
#include "voxflow/core/error.hpp"
#include "voxflow/ops/filters.hpp"

namespace voxflow::reg {

Normalization normalization_from_string(const std::string &name) {
  if (name == "zscore") return Normalization::ZScore;
  if (name == "minmax") return Normalization::MinMax;
  fail("ParamSchemaViolation", "normalization '" + name + "'");
}

namespace {

void check_weights(const FusionConfig &cfg) {
  if (cfg.w1 < 0 || cfg.w2 < 0 || std::abs(cfg.w1 + cfg.w2 - 1.0) > 1e-12)
    fail("ParamSchemaViolation", "fusion weights must be nonnegative and sum to 1");
}

ImageVolume on_grid(const ImageVolume &b, const Geometry &g, ops::Interpolation interp) {
  ops::ResampleSpec spec;
  spec.target_grid = g;
  spec.interpolation = interp;
  return ops::resample(b, spec);
}

bool is_constant(const ImageVolume &v) {
  const auto [lo, hi] = std::minmax_element(v.voxels.begin(), v.voxels.end());
  return *lo == *hi;
}

} // namespace

ImageVolume normalize(const ImageVolume &v, Normalization n) {
  if (v.voxels.empty()) fail("ZeroVariance", "empty image");
  ImageVolume out = v;
  if (n == Normalization::MinMax) {
    const auto [lo, hi] = std::minmax_element(v.voxels.begin(), v.voxels.end());
    const double l = *lo, range = *hi - *lo;
    if (!(range > 0)) fail("ZeroVariance", "min-max normalization of a constant image");
    for (double &x : out.voxels) x = (x - l) / range;
    return out;
  }
  double mean = 0;
  for (double x : v.voxels) mean += x;
  mean /= static_cast<double>(v.voxels.size());
  double var = 0;
  for (double x : v.voxels) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.voxels.size());
  if (!(var > 0)) fail("ZeroVariance", "z-score normalization of a constant image");
  const double sd = std::sqrt(var);
  for (double &x : out.voxels) x = (x - mean) / sd;
  return out;
}

ImageVolume fuse_weighted(const ImageVolume &a, const ImageVolume &b, const FusionConfig &cfg) {
  check_weights(cfg);
  const ImageVolume na = normalize(a, cfg.normalization);
  const ImageVolume nb = normalize(on_grid(b, a.geometry, cfg.interpolation), cfg.normalization);
  ImageVolume out(a.geometry);
  for (std::size_t i = 0; i < out.voxels.size(); ++i) out.voxels[i] = cfg.w1 * na.voxels[i] + cfg.w2 * nb.voxels[i];
  return out;
}

ImageVolume fuse_wavelet(const ImageVolume &a, const ImageVolume &b, const FusionConfig &cfg) {
  const ImageVolume na = normalize(a, cfg.normalization);
  const ImageVolume nb = normalize(on_grid(b, a.geometry, cfg.interpolation), cfg.normalization);
  ImageVolume out(a.geometry);
  static const char *bands[] = {"LLL", "HLL", "LHL", "HHL", "LLH", "HLH", "LHH", "HHH"};
  for (const char *band : bands) {
    check_cancelled();
    const ImageVolume ca = ops::wavelet_decompose(na, ops::WaveletFamily::Haar, band);
    const ImageVolume cb = ops::wavelet_decompose(nb, ops::WaveletFamily::Haar, band);
    const bool approx = std::string(band) == "LLL";
    for (std::size_t i = 0; i < out.voxels.size(); ++i) {
      const double x = ca.voxels[i], y = cb.voxels[i];
      out.voxels[i] += approx ? 0.5 * (x + y) : (std::abs(y) > std::abs(x) ? y : x);
    }
  }
  return out;
}

PcaWeights pca_fusion_weights(const ImageVolume &na, const ImageVolume &nb) {
  const std::size_t n = na.voxels.size();
  if (n == 0 || nb.voxels.size() != n) fail("GeometryMismatch", "PCA fusion needs two images on one grid");
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += na.voxels[i];
    mb += nb.voxels[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = na.voxels[i] - ma, db = nb.voxels[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (!(saa > 0) && !(sbb > 0)) fail("DegenerateCovariance", "both fusion inputs are constant");

  // leading eigenvector of [[saa, sab], [sab, sbb]] in closed form
  const double half = 0.5 * (saa - sbb);
  const double lambda = 0.5 * (saa + sbb) + std::sqrt(half * half + sab * sab);
  double v1, v2;
  if (sab == 0.0) {
    v1 = saa >= sbb ? 1.0 : 0.0;
    v2 = saa >= sbb ? 0.0 : 1.0;
  } else if (saa >= sbb) {
    v1 = lambda - sbb;
    v2 = sab;
  } else {
    v1 = sab;
    v2 = lambda - saa;
  }
  const double len = std::hypot(v1, v2);
  v1 /= len;
  v2 /= len;
  if (v1 + v2 < 0 || (std::abs(v1 + v2) < 1e-12 && v1 < 0)) {
    v1 = -v1;
    v2 = -v2;
  }
  return {v1, v2};
}

ImageVolume fuse_pca(const ImageVolume &a, const ImageVolume &b, const FusionConfig &cfg) {
  const ImageVolume rb = on_grid(b, a.geometry, cfg.interpolation);
  const bool ca = is_constant(a), cb = is_constant(rb);
  if (ca && cb) fail("DegenerateCovariance", "both fusion inputs are constant");
  // a single constant input carries no variance and gets zero weight
  const ImageVolume na = ca ? ImageVolume(a.geometry, 0.0) : normalize(a, cfg.normalization);
  const ImageVolume nb = cb ? ImageVolume(a.geometry, 0.0) : normalize(rb, cfg.normalization);
  const PcaWeights w = pca_fusion_weights(na, nb);
  // v1 + v2 vanishes for perfectly anti-correlated inputs; fall back to |v1| + |v2|
  const double sum = w.v1 + w.v2;
  const double denom = std::abs(sum) < 1e-12 ? std::abs(w.v1) + std::abs(w.v2) : sum;
  ImageVolume out(a.geometry);
  for (std::size_t i = 0; i < out.voxels.size(); ++i) out.voxels[i] = (w.v1 * na.voxels[i] + w.v2 * nb.voxels[i]) / denom;
  return out;
}

} // namespace voxflow::reg
