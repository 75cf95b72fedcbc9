#pragma once

#include <string>
#include <vector>

#include "voxflow/core/image.hpp"

namespace voxflow::ops {

// Padding rule for samples outside the grid. Mirror is half-sample
// symmetric (-1 -> 0, n -> n-1). Periodic exists for transform identities
// in tests and is not offered in node schemas.
enum class Boundary { Mirror, Nearest, Zero, Periodic };
Boundary boundary_from_string(const std::string &name);
const char *to_string(Boundary b);

// Maps an out-of-range index onto [0, n); returns -1 for zero padding.
long pad_index(long idx, long n, Boundary b);

// 1D kernel convention: y[n] = sum_k h[k] * x[n + origin - k] with
// origin = (L - 1) / 2 (integer division).
ImageVolume convolve_axis(const ImageVolume &v, int axis, const std::vector<double> &h, Boundary b);
ImageVolume convolve_separable(const ImageVolume &v, const std::vector<double> &hx, const std::vector<double> &hy,
                               const std::vector<double> &hz, Boundary b);

// Dense 3D kernel, x-fastest, same origin convention per axis.
struct Kernel3 {
  Index3 size{1, 1, 1};
  std::vector<double> w;
  double &at(std::size_t i, std::size_t j, std::size_t k) { return w[i + size[0] * (j + size[1] * k)]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return w[i + size[0] * (j + size[1] * k)]; }
};
ImageVolume convolve3d(const ImageVolume &v, const Kernel3 &k, Boundary b);

ImageVolume mean_filter(const ImageVolume &v, int size, Boundary b = Boundary::Mirror);

Kernel3 log_kernel(const Vec3 &spacing, double sigma_mm, double truncation = 4.0);
ImageVolume log_filter(const ImageVolume &v, double sigma_mm, double truncation = 4.0, Boundary b = Boundary::Mirror);

// Laws 1D kernels; kernels with a nonzero coefficient sum are divided by it.
std::vector<double> laws_kernel(const std::string &token);
struct LawsParams {
  std::string kernel = "L5E5S5";
  bool energy = false;
  int delta = 7;
  bool rot_invariant = false;
  Boundary boundary = Boundary::Mirror;
};
ImageVolume laws_filter(const ImageVolume &v, const LawsParams &p);

struct GaborParams {
  double sigma_mm = 2.0;
  double lambda_mm = 4.0;
  double gamma = 1.0;
  double theta = 0.0;
  double theta_step = 0.0; // > 0 averages over [0, pi) in this step
  Boundary boundary = Boundary::Mirror;
};
// Real-part 2D kernel in the axial plane, DC-subtracted, truncated at 4 sigma.
Kernel3 gabor_kernel(const Vec3 &spacing, double sigma_mm, double lambda_mm, double gamma, double theta);
ImageVolume gabor_filter(const ImageVolume &v, const GaborParams &p);

enum class WaveletFamily { Haar, Db2 };
WaveletFamily wavelet_family_from_string(const std::string &name);
// Low/high decomposition filters scaled to unit DC gain (orthonormal pair
// divided by sqrt 2), so LLL of a constant is the constant and the eight
// undecimated subbands preserve energy under periodic padding.
std::vector<double> wavelet_lowpass(WaveletFamily f);
std::vector<double> wavelet_highpass(WaveletFamily f);
ImageVolume wavelet_decompose(const ImageVolume &v, WaveletFamily f, const std::string &subband,
                              Boundary b = Boundary::Mirror);

} // namespace voxflow::ops
