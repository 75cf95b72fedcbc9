#include "voxflow/ops/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "voxflow/core/cancel.hpp"
#include "voxflow/core/error.hpp"

namespace voxflow::ops {

Boundary boundary_from_string(const std::string &name) {
  if (name == "mirror" || name == "reflect") return Boundary::Mirror;
  if (name == "nearest") return Boundary::Nearest;
  if (name == "zero" || name == "constant") return Boundary::Zero;
  if (name == "periodic") return Boundary::Periodic;
  fail("ParamSchemaViolation", "boundary '" + name + "'");
}

const char *to_string(Boundary b) {
  switch (b) {
  case Boundary::Mirror: return "mirror";
  case Boundary::Nearest: return "nearest";
  case Boundary::Zero: return "zero";
  case Boundary::Periodic: return "periodic";
  }
  return "mirror";
}

long pad_index(long idx, long n, Boundary b) {
  if (idx >= 0 && idx < n) return idx;
  switch (b) {
  case Boundary::Zero: return -1;
  case Boundary::Nearest: return idx < 0 ? 0 : n - 1;
  case Boundary::Periodic: return ((idx % n) + n) % n;
  case Boundary::Mirror: {
    const long period = 2 * n;
    long m = ((idx % period) + period) % period;
    return m < n ? m : period - 1 - m;
  }
  }
  return -1;
}

ImageVolume convolve_axis(const ImageVolume &v, int axis, const std::vector<double> &h, Boundary b) {
  const auto &d = v.geometry.dims;
  const auto ax = static_cast<std::size_t>(axis);
  const long n = static_cast<long>(d[ax]);
  const long L = static_cast<long>(h.size());
  const long origin = (L - 1) / 2;
  std::size_t stride = 1;
  for (std::size_t a = 0; a < ax; ++a) stride *= d[a];

  // Precomputed source index (or -1) for every (position, tap) pair.
  std::vector<long> src(static_cast<std::size_t>(n * L));
  for (long p = 0; p < n; ++p)
    for (long t = 0; t < L; ++t) src[static_cast<std::size_t>(p * L + t)] = pad_index(p + origin - t, n, b);

  ImageVolume out(v.geometry);
  out.meta = v.meta;
  const std::size_t total = v.voxels.size();
  std::vector<double> line(static_cast<std::size_t>(n));
  for (std::size_t base = 0; base < total; ++base) {
    // visit each line once via its first element
    if ((base / stride) % static_cast<std::size_t>(n) != 0) continue;
    if (base % (stride * static_cast<std::size_t>(n)) == 0) check_cancelled();
    for (long p = 0; p < n; ++p) line[static_cast<std::size_t>(p)] = v.voxels[base + static_cast<std::size_t>(p) * stride];
    for (long p = 0; p < n; ++p) {
      double acc = 0.0;
      for (long t = 0; t < L; ++t) {
        const long s = src[static_cast<std::size_t>(p * L + t)];
        if (s >= 0) acc += h[static_cast<std::size_t>(t)] * line[static_cast<std::size_t>(s)];
      }
      out.voxels[base + static_cast<std::size_t>(p) * stride] = acc;
    }
  }
  return out;
}

ImageVolume convolve_separable(const ImageVolume &v, const std::vector<double> &hx, const std::vector<double> &hy,
                               const std::vector<double> &hz, Boundary b) {
  return convolve_axis(convolve_axis(convolve_axis(v, 0, hx, b), 1, hy, b), 2, hz, b);
}

ImageVolume convolve3d(const ImageVolume &v, const Kernel3 &ker, Boundary b) {
  const auto &d = v.geometry.dims;
  ImageVolume out(v.geometry);
  out.meta = v.meta;
  long origin[3], len[3], n[3];
  for (std::size_t a = 0; a < 3; ++a) {
    len[a] = static_cast<long>(ker.size[a]);
    origin[a] = (len[a] - 1) / 2;
    n[a] = static_cast<long>(d[a]);
  }
  // Per-axis source tables as in convolve_axis.
  std::vector<long> src[3];
  for (std::size_t a = 0; a < 3; ++a) {
    src[a].resize(static_cast<std::size_t>(n[a] * len[a]));
    for (long p = 0; p < n[a]; ++p)
      for (long t = 0; t < len[a]; ++t)
        src[a][static_cast<std::size_t>(p * len[a] + t)] = pad_index(p + origin[a] - t, n[a], b);
  }
  for (long z = 0; z < n[2]; ++z) {
    check_cancelled();
    for (long y = 0; y < n[1]; ++y)
      for (long x = 0; x < n[0]; ++x) {
        double acc = 0.0;
        for (long tz = 0; tz < len[2]; ++tz) {
          const long sz = src[2][static_cast<std::size_t>(z * len[2] + tz)];
          if (sz < 0) continue;
          for (long ty = 0; ty < len[1]; ++ty) {
            const long sy = src[1][static_cast<std::size_t>(y * len[1] + ty)];
            if (sy < 0) continue;
            const std::size_t row = static_cast<std::size_t>(sy) * d[0] + static_cast<std::size_t>(sz) * d[0] * d[1];
            const std::size_t krow = static_cast<std::size_t>(ty) * ker.size[0] + static_cast<std::size_t>(tz) * ker.size[0] * ker.size[1];
            for (long tx = 0; tx < len[0]; ++tx) {
              const long sx = src[0][static_cast<std::size_t>(x * len[0] + tx)];
              if (sx < 0) continue;
              acc += ker.w[krow + static_cast<std::size_t>(tx)] * v.voxels[row + static_cast<std::size_t>(sx)];
            }
          }
        }
        out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), static_cast<std::size_t>(z)) = acc;
      }
  }
  return out;
}

ImageVolume mean_filter(const ImageVolume &v, int size, Boundary b) {
  if (size < 3 || size % 2 == 0) fail("BadKernelSize", "mean filter size must be odd and at least 3");
  const std::vector<double> h(static_cast<std::size_t>(size), 1.0 / size);
  return convolve_separable(v, h, h, h, b);
}

Kernel3 log_kernel(const Vec3 &spacing, double sigma_mm, double truncation) {
  if (!(sigma_mm > 0) || !(truncation > 0)) fail("SigmaTooSmall", "sigma and truncation must be positive");
  Kernel3 k;
  long radius[3];
  for (std::size_t a = 0; a < 3; ++a) {
    const double s_ax = sigma_mm / spacing[a];
    if (s_ax < 0.25) fail("SigmaTooSmall", "sigma is below a quarter voxel along axis " + std::to_string(a));
    radius[a] = static_cast<long>(std::ceil(truncation * s_ax));
    k.size[a] = static_cast<std::size_t>(2 * radius[a] + 1);
  }
  k.w.assign(k.size[0] * k.size[1] * k.size[2], 0.0);
  const double s2 = sigma_mm * sigma_mm;
  const double norm = 1.0 / (std::pow(2.0 * std::numbers::pi * s2, 1.5));
  const double voxel_volume = spacing[0] * spacing[1] * spacing[2];
  double sum = 0.0;
  for (long z = -radius[2]; z <= radius[2]; ++z)
    for (long y = -radius[1]; y <= radius[1]; ++y)
      for (long x = -radius[0]; x <= radius[0]; ++x) {
        const double px = static_cast<double>(x) * spacing[0], py = static_cast<double>(y) * spacing[1],
                     pz = static_cast<double>(z) * spacing[2];
        const double r2 = px * px + py * py + pz * pz;
        const double g = norm * std::exp(-r2 / (2.0 * s2));
        const double w = voxel_volume * g * (r2 / (s2 * s2) - 3.0 / s2);
        k.at(static_cast<std::size_t>(x + radius[0]), static_cast<std::size_t>(y + radius[1]),
             static_cast<std::size_t>(z + radius[2])) = w;
        sum += w;
      }
  const double mean = sum / static_cast<double>(k.w.size());
  for (double &w : k.w) w -= mean;
  return k;
}

ImageVolume log_filter(const ImageVolume &v, double sigma_mm, double truncation, Boundary b) {
  return convolve3d(v, log_kernel(v.geometry.spacing, sigma_mm, truncation), b);
}

std::vector<double> laws_kernel(const std::string &token) {
  std::vector<double> h;
  if (token == "L5") h = {1, 4, 6, 4, 1};
  else if (token == "E5") h = {-1, -2, 0, 2, 1};
  else if (token == "S5") h = {-1, 0, 2, 0, -1};
  else if (token == "W5") h = {-1, 2, 0, -2, 1};
  else if (token == "R5") h = {1, -4, 6, -4, 1};
  else if (token == "L3") h = {1, 2, 1};
  else if (token == "E3") h = {-1, 0, 1};
  else if (token == "S3") h = {-1, 2, -1};
  else fail("UnknownKernelToken", "Laws kernel token '" + token + "'");
  double sum = 0.0;
  for (double x : h) sum += x;
  if (sum != 0.0)
    for (double &x : h) x /= sum;
  return h;
}

namespace {

std::vector<std::string> laws_tokens(const std::string &name) {
  if (name.size() != 6) fail("UnknownKernelToken", "Laws kernel name must be three tokens, got '" + name + "'");
  std::vector<std::string> t{name.substr(0, 2), name.substr(2, 2), name.substr(4, 2)};
  for (const auto &tok : t) laws_kernel(tok);
  return t;
}

} // namespace

ImageVolume laws_filter(const ImageVolume &v, const LawsParams &p) {
  auto tokens = laws_tokens(p.kernel);
  ImageVolume response;
  if (p.rot_invariant) {
    std::sort(tokens.begin(), tokens.end());
    bool first = true;
    do {
      check_cancelled();
      ImageVolume r = convolve_separable(v, laws_kernel(tokens[0]), laws_kernel(tokens[1]), laws_kernel(tokens[2]),
                                         p.boundary);
      if (first) {
        response = std::move(r);
        first = false;
      } else {
        for (std::size_t i = 0; i < r.voxels.size(); ++i) response.voxels[i] = std::max(response.voxels[i], r.voxels[i]);
      }
    } while (std::next_permutation(tokens.begin(), tokens.end()));
  } else {
    response = convolve_separable(v, laws_kernel(tokens[0]), laws_kernel(tokens[1]), laws_kernel(tokens[2]), p.boundary);
  }
  if (!p.energy) return response;
  if (p.delta < 0) fail("ParamSchemaViolation", "Laws energy delta must be non-negative");
  for (double &x : response.voxels) x = std::abs(x);
  const std::vector<double> box(static_cast<std::size_t>(2 * p.delta + 1), 1.0 / (2 * p.delta + 1));
  return convolve_separable(response, box, box, box, p.boundary);
}

Kernel3 gabor_kernel(const Vec3 &spacing, double sigma_mm, double lambda_mm, double gamma, double theta) {
  if (!(sigma_mm > 0) || !(lambda_mm > 0) || !(gamma > 0) || gamma > 1)
    fail("BadGaborParams", "need sigma > 0, lambda > 0 and 0 < gamma <= 1");
  const long rx = static_cast<long>(std::ceil(4.0 * sigma_mm / spacing[0]));
  const long ry = static_cast<long>(std::ceil(4.0 * sigma_mm / spacing[1]));
  Kernel3 k;
  k.size = {static_cast<std::size_t>(2 * rx + 1), static_cast<std::size_t>(2 * ry + 1), 1};
  k.w.assign(k.size[0] * k.size[1], 0.0);
  const double c = std::cos(theta), s = std::sin(theta);
  double sum = 0.0;
  for (long y = -ry; y <= ry; ++y)
    for (long x = -rx; x <= rx; ++x) {
      const double px = static_cast<double>(x) * spacing[0], py = static_cast<double>(y) * spacing[1];
      const double xr = px * c + py * s;
      const double yr = -px * s + py * c;
      const double w = std::exp(-(xr * xr + gamma * gamma * yr * yr) / (2.0 * sigma_mm * sigma_mm)) *
                       std::cos(2.0 * std::numbers::pi * xr / lambda_mm);
      k.at(static_cast<std::size_t>(x + rx), static_cast<std::size_t>(y + ry), 0) = w;
      sum += w;
    }
  const double mean = sum / static_cast<double>(k.w.size());
  for (double &w : k.w) w -= mean;
  return k;
}

ImageVolume gabor_filter(const ImageVolume &v, const GaborParams &p) {
  if (p.theta_step < 0) fail("BadGaborParams", "theta_step must be non-negative");
  if (p.theta_step == 0) return convolve3d(v, gabor_kernel(v.geometry.spacing, p.sigma_mm, p.lambda_mm, p.gamma, p.theta), p.boundary);
  const int steps = static_cast<int>(std::llround(std::numbers::pi / p.theta_step));
  if (steps < 1 || std::abs(steps * p.theta_step - std::numbers::pi) > 1e-9)
    fail("BadGaborParams", "theta_step must divide pi");
  ImageVolume acc(v.geometry);
  acc.meta = v.meta;
  for (int s = 0; s < steps; ++s) {
    const ImageVolume r =
        convolve3d(v, gabor_kernel(v.geometry.spacing, p.sigma_mm, p.lambda_mm, p.gamma, s * p.theta_step), p.boundary);
    for (std::size_t i = 0; i < r.voxels.size(); ++i) acc.voxels[i] += r.voxels[i];
  }
  for (double &x : acc.voxels) x /= steps;
  return acc;
}

WaveletFamily wavelet_family_from_string(const std::string &name) {
  if (name == "haar") return WaveletFamily::Haar;
  if (name == "db2") return WaveletFamily::Db2;
  fail("ParamSchemaViolation", "wavelet family '" + name + "' (supported: haar, db2)");
}

std::vector<double> wavelet_lowpass(WaveletFamily f) {
  if (f == WaveletFamily::Haar) return {0.5, 0.5};
  const double r3 = std::sqrt(3.0);
  return {(1 + r3) / 8, (3 + r3) / 8, (3 - r3) / 8, (1 - r3) / 8};
}

std::vector<double> wavelet_highpass(WaveletFamily f) {
  const auto lo = wavelet_lowpass(f);
  const std::size_t L = lo.size();
  std::vector<double> hi(L);
  for (std::size_t k = 0; k < L; ++k) hi[k] = (k % 2 ? -1.0 : 1.0) * lo[L - 1 - k];
  return hi;
}

ImageVolume wavelet_decompose(const ImageVolume &v, WaveletFamily f, const std::string &subband, Boundary b) {
  if (subband.size() != 3 || subband.find_first_not_of("LH") != std::string::npos)
    fail("BadSubband", "subband must be three letters from {L, H}, got '" + subband + "'");
  const auto lo = wavelet_lowpass(f), hi = wavelet_highpass(f);
  return convolve_separable(v, subband[0] == 'L' ? lo : hi, subband[1] == 'L' ? lo : hi, subband[2] == 'L' ? lo : hi, b);
}

} // namespace voxflow::ops
