#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "voxflow/core/rng.hpp"
#include "voxflow/fixtures/phantom.hpp"
#include "voxflow/ops/filters.hpp"
#include "voxflow/ops/sampling.hpp"

using namespace voxflow;
using namespace voxflow::ops;

namespace {

ImageVolume line4(std::vector<double> x) {
  ImageVolume v(fixtures::make_grid({4, 1, 1}));
  v.voxels = std::move(x);
  return v;
}

oracle::Pad to_pad(Boundary b) {
  switch (b) {
  case Boundary::Mirror: return oracle::Pad::Mirror;
  case Boundary::Nearest: return oracle::Pad::Nearest;
  case Boundary::Zero: return oracle::Pad::Zero;
  case Boundary::Periodic: return oracle::Pad::Periodic;
  }
  return oracle::Pad::Mirror;
}

} // namespace

TEST(Boundary, HandComputedLength4) {
  EXPECT_EQ(pad_index(-1, 4, Boundary::Mirror), 0);
  EXPECT_EQ(pad_index(-2, 4, Boundary::Mirror), 1);
  EXPECT_EQ(pad_index(4, 4, Boundary::Mirror), 3);
  EXPECT_EQ(pad_index(5, 4, Boundary::Mirror), 2);
  EXPECT_EQ(pad_index(-1, 4, Boundary::Nearest), 0);
  EXPECT_EQ(pad_index(6, 4, Boundary::Nearest), 3);
  EXPECT_EQ(pad_index(-1, 4, Boundary::Zero), -1);
  EXPECT_EQ(pad_index(-1, 4, Boundary::Periodic), 3);

  // y[n] = x[n+2] + x[n-2] on x = [1, 2, 3, 4]
  const std::vector<double> h{1, 0, 0, 0, 1};
  const auto v = line4({1, 2, 3, 4});
  EXPECT_EQ(convolve_axis(v, 0, h, Boundary::Mirror).voxels, (std::vector<double>{5, 5, 5, 5}));
  EXPECT_EQ(convolve_axis(v, 0, h, Boundary::Nearest).voxels, (std::vector<double>{4, 5, 5, 6}));
  EXPECT_EQ(convolve_axis(v, 0, h, Boundary::Zero).voxels, (std::vector<double>{3, 4, 1, 2}));
  EXPECT_EQ(convolve_axis(v, 0, h, Boundary::Periodic).voxels, (std::vector<double>{6, 8, 2, 4}));
  // y[n] = x[n+1] + 2 x[n] + 3 x[n-1], mirror and zero
  EXPECT_EQ(convolve_axis(v, 0, {1, 2, 3}, Boundary::Mirror).voxels, (std::vector<double>{7, 10, 16, 21}));
  EXPECT_EQ(convolve_axis(v, 0, {1, 2, 3}, Boundary::Zero).voxels, (std::vector<double>{4, 10, 16, 17}));
}

TEST(Resample, IdentityAndConstant) {
  const Geometry g = fixtures::make_grid({6, 5, 4}, {1.5, 1, 2}, {3, -2, 1});
  const ImageVolume v = fixtures::random_volume(g, 3);
  ResampleSpec same;
  same.target_grid = g;
  EXPECT_EQ(resample(v, same).voxels, v.voxels);
  same.target_spacing = g.spacing;
  same.target_grid.reset();
  EXPECT_EQ(resample(v, same).voxels, v.voxels);

  ImageVolume c(g, 7.25);
  ResampleSpec fine;
  fine.target_spacing = Vec3{0.7, 0.45, 1.1};
  for (double x : resample(c, fine).voxels) EXPECT_DOUBLE_EQ(x, 7.25);
}

TEST(Resample, LinearRampIsExactInside) {
  const Geometry g = fixtures::make_grid({8, 8, 8}, {2, 2, 2}, {-5, 1, 0});
  ImageVolume v(g);
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t j = 0; j < 8; ++j)
      for (std::size_t i = 0; i < 8; ++i) v.at(i, j, k) = g.index_to_physical({double(i), double(j), double(k)})[0];
  ResampleSpec spec;
  spec.target_spacing = Vec3{1, 1, 1};
  const ImageVolume r = resample(v, spec);
  EXPECT_EQ(r.dims(), (Index3{16, 16, 16}));
  // the first edge is preserved: origin moves by half the spacing change
  EXPECT_NEAR(r.geometry.origin[0], -5.5, 1e-12);
  std::size_t checked = 0;
  for (std::size_t k = 0; k < 16; ++k)
    for (std::size_t j = 0; j < 16; ++j)
      for (std::size_t i = 0; i < 16; ++i) {
        const Vec3 p = r.geometry.index_to_physical({double(i), double(j), double(k)});
        const Vec3 src = g.physical_to_index(p);
        if (src[0] < 0 || src[0] > 7) continue; // beyond the outermost centres values clamp
        EXPECT_NEAR(r.at(i, j, k), p[0], 1e-9);
        ++checked;
      }
  EXPECT_GT(checked, 3000u);
}

TEST(Resample, TrilinearWithinNeighbourRange) {
  const Geometry g = fixtures::make_grid({5, 5, 5});
  const ImageVolume v = fixtures::random_volume(g, 9);
  Rng rng(1);
  for (int s = 0; s < 500; ++s) {
    const Vec3 p{rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0, 4)};
    double lo = INFINITY, hi = -INFINITY;
    for (int c = 0; c < 8; ++c) {
      const double x = v.at(std::size_t(std::floor(p[0])) + (c & 1), std::size_t(std::floor(p[1])) + ((c >> 1) & 1),
                            std::size_t(std::floor(p[2])) + ((c >> 2) & 1));
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    const double s_val = sample(v, p, Interpolation::Trilinear);
    EXPECT_GE(s_val, lo - 1e-15);
    EXPECT_LE(s_val, hi + 1e-15);
  }
  EXPECT_EQ(sample(v, {-0.6, 0, 0}, Interpolation::Trilinear, -1.0), -1.0);
}

TEST(Resample, DegenerateGrid) {
  const ImageVolume v(fixtures::make_grid({4, 4, 4}));
  ResampleSpec bad;
  bad.target_spacing = Vec3{1, 0, 1};
  EXPECT_ERROR_KIND(resample(v, bad), "DegenerateGrid");
  ResampleSpec none;
  EXPECT_ERROR_KIND(resample(v, none), "DegenerateGrid");
}

TEST(MeanFilter, ConstantImpulseAndOracle) {
  const Geometry g = fixtures::make_grid({8, 8, 8});
  ImageVolume c(g, 3.5);
  for (double x : mean_filter(c, 5).voxels) EXPECT_NEAR(x, 3.5, 1e-12);

  ImageVolume imp(g);
  imp.at(4, 4, 4) = 1.0;
  const ImageVolume r = mean_filter(imp, 3, Boundary::Zero);
  double total = 0;
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t j = 0; j < 8; ++j)
      for (std::size_t i = 0; i < 8; ++i) {
        const bool in = i >= 3 && i <= 5 && j >= 3 && j <= 5 && k >= 3 && k <= 5;
        EXPECT_NEAR(r.at(i, j, k), in ? 1.0 / 27 : 0.0, 1e-15);
        total += r.at(i, j, k);
      }
  EXPECT_NEAR(total, 1.0, 1e-14);

  for (Boundary b : {Boundary::Mirror, Boundary::Nearest, Boundary::Zero}) {
    const ImageVolume v = fixtures::random_volume(g, 17);
    const std::vector<double> h(5, 1.0 / 5);
    EXPECT_LT(oracle::max_abs_diff(mean_filter(v, 5, b).voxels, oracle::separable_direct(v, h, h, h, to_pad(b)).voxels),
              1e-12);
  }
  EXPECT_ERROR_KIND(mean_filter(c, 4), "BadKernelSize");
}

TEST(LogFilter, ConstantGivesZero) {
  const ImageVolume c(fixtures::make_grid({12, 12, 12}, {1, 1.2, 2}), 1234.5);
  for (Boundary b : {Boundary::Mirror, Boundary::Nearest})
    for (double x : log_filter(c, 2.0, 4.0, b).voxels) EXPECT_LE(std::abs(x), 1e-9);
}

TEST(LogFilter, AnisotropicKernelRadius) {
  const Kernel3 k = log_kernel({1, 1, 3}, 3.0);
  EXPECT_EQ(k.size, (Index3{25, 25, 9}));
  double sum = 0;
  for (double w : k.w) sum += w;
  EXPECT_NEAR(sum, 0.0, 1e-12);
  EXPECT_ERROR_KIND(log_kernel({1, 1, 1}, 0.2), "SigmaTooSmall");
}

TEST(LogFilter, BlobSignPattern) {
  const Geometry g = fixtures::make_grid({33, 33, 33});
  ImageVolume blob(g);
  const double sb = 3.0;
  for (std::size_t k = 0; k < 33; ++k)
    for (std::size_t j = 0; j < 33; ++j)
      for (std::size_t i = 0; i < 33; ++i) {
        const double r2 = std::pow(double(i) - 16, 2) + std::pow(double(j) - 16, 2) + std::pow(double(k) - 16, 2);
        blob.at(i, j, k) = std::exp(-r2 / (2 * sb * sb));
      }
  const ImageVolume r = log_filter(blob, 2.0);
  // LoG * Gaussian is a scaled LoG of width sqrt(sb^2 + s^2); it changes sign
  // at radius sqrt(3) * that width.
  const double w = std::sqrt(sb * sb + 4.0);
  EXPECT_LT(r.at(16, 16, 16), 0.0);
  const std::size_t ring = 16 + static_cast<std::size_t>(std::ceil(std::sqrt(3.0) * w + 0.5));
  EXPECT_GT(r.at(ring, 16, 16), 0.0);
  EXPECT_GT(r.at(16, 16, 32 - ring), 0.0);
}

TEST(LawsFilter, KernelsAndConstants) {
  EXPECT_EQ(laws_kernel("L5"), (std::vector<double>{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16}));
  EXPECT_EQ(laws_kernel("E5"), (std::vector<double>{-1, -2, 0, 2, 1}));
  EXPECT_ERROR_KIND(laws_kernel("Q5"), "UnknownKernelToken");
  const ImageVolume c(fixtures::make_grid({7, 7, 7}), 2.5);
  LawsParams p;
  p.kernel = "E5L5L5";
  for (double x : laws_filter(c, p).voxels) EXPECT_EQ(x, 0.0);
  p.kernel = "L5L5L5";
  for (double x : laws_filter(c, p).voxels) EXPECT_NEAR(x, 2.5, 1e-14);
  p.kernel = "L5E5";
  EXPECT_ERROR_KIND(laws_filter(c, p), "UnknownKernelToken");
}

TEST(LawsFilter, SeparableMatchesNaive) {
  const ImageVolume v = fixtures::random_volume(fixtures::make_grid({6, 6, 6}), 5);
  for (const std::string name : {"L5E5S5", "W5R5L3", "E3S3L5"}) {
    LawsParams p;
    p.kernel = name;
    const auto naive = oracle::separable_direct(v, laws_kernel(name.substr(0, 2)), laws_kernel(name.substr(2, 2)),
                                                laws_kernel(name.substr(4, 2)), oracle::Pad::Mirror);
    EXPECT_LT(oracle::max_abs_diff(laws_filter(v, p).voxels, naive.voxels), 1e-12) << name;
  }
}

TEST(LawsFilter, RotationInvariantIsMaxOverPermutations) {
  const ImageVolume v = fixtures::random_volume(fixtures::make_grid({6, 6, 6}), 6);
  LawsParams p;
  p.kernel = "E5L5S5";
  p.rot_invariant = true;
  const ImageVolume ri = laws_filter(v, p);
  std::string tok[3] = {"E5", "L5", "S5"};
  std::vector<double> best(v.voxels.size(), -INFINITY);
  std::sort(tok, tok + 3);
  do {
    const auto r = oracle::separable_direct(v, laws_kernel(tok[0]), laws_kernel(tok[1]), laws_kernel(tok[2]),
                                            oracle::Pad::Mirror);
    for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::max(best[i], r.voxels[i]);
  } while (std::next_permutation(tok, tok + 3));
  EXPECT_LT(oracle::max_abs_diff(ri.voxels, best), 1e-12);

  p.rot_invariant = false;
  p.energy = true;
  p.delta = 1;
  const ImageVolume e = laws_filter(v, p);
  auto raw = oracle::separable_direct(v, laws_kernel("E5"), laws_kernel("L5"), laws_kernel("S5"), oracle::Pad::Mirror);
  for (double &x : raw.voxels) x = std::abs(x);
  const std::vector<double> box(3, 1.0 / 3);
  EXPECT_LT(oracle::max_abs_diff(e.voxels, oracle::separable_direct(raw, box, box, box, oracle::Pad::Mirror).voxels),
            1e-12);
}

TEST(GaborFilter, ConstantGivesZero) {
  const ImageVolume c(fixtures::make_grid({16, 16, 3}), 42.0);
  GaborParams p;
  p.sigma_mm = 2;
  p.lambda_mm = 5;
  p.gamma = 0.5;
  p.theta = 0.3;
  for (double x : gabor_filter(c, p).voxels) EXPECT_LE(std::abs(x), 1e-9);
  p.gamma = 1.5;
  EXPECT_ERROR_KIND(gabor_filter(c, p), "BadGaborParams");
}

TEST(GaborFilter, OrientationSelectivity) {
  const double lambda = 6.0;
  ImageVolume grating(fixtures::make_grid({48, 48, 1}));
  for (std::size_t j = 0; j < 48; ++j)
    for (std::size_t i = 0; i < 48; ++i) grating.at(i, j, 0) = std::cos(2 * std::numbers::pi * double(i) / lambda);
  GaborParams p;
  p.sigma_mm = 4;
  p.lambda_mm = lambda;
  p.gamma = 1;
  auto peak = [&](double theta) {
    p.theta = theta;
    const ImageVolume r = gabor_filter(grating, p);
    double m = 0;
    for (std::size_t j = 16; j < 32; ++j)
      for (std::size_t i = 16; i < 32; ++i) m = std::max(m, std::abs(r.at(i, j, 0)));
    return m;
  };
  EXPECT_GT(peak(0.0), 10.0 * peak(std::numbers::pi / 2));
}

TEST(GaborFilter, ThetaAveragedRotationInvariance) {
  const std::size_t n = 25;
  ImageVolume img(fixtures::make_grid({n, n, 1}));
  Rng rng(8);
  for (auto &x : img.voxels) x = rng.uniform();
  // rotate by 90 degrees in-plane: (i, j) -> (n-1-j, i)
  ImageVolume rot(img.geometry);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) rot.at(n - 1 - j, i, 0) = img.at(i, j, 0);
  GaborParams p;
  p.sigma_mm = 2;
  p.lambda_mm = 4;
  p.gamma = 0.7;
  p.theta_step = std::numbers::pi / 4;
  const ImageVolume a = gabor_filter(img, p), b = gabor_filter(rot, p);
  double m = 0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(b.at(n - 1 - j, i, 0) - a.at(i, j, 0)));
  EXPECT_LE(m, 1e-6);
}

TEST(Wavelet, ConstantSubbandsExact) {
  const ImageVolume c(fixtures::make_grid({6, 6, 6}), 3.75);
  for (double x : wavelet_decompose(c, WaveletFamily::Haar, "LLL").voxels) EXPECT_EQ(x, 3.75);
  for (double x : wavelet_decompose(c, WaveletFamily::Haar, "HLL").voxels) EXPECT_EQ(x, 0.0);
  for (double x : wavelet_decompose(c, WaveletFamily::Db2, "LLL").voxels) EXPECT_NEAR(x, 3.75, 1e-14);
  for (double x : wavelet_decompose(c, WaveletFamily::Db2, "LHL").voxels) EXPECT_NEAR(x, 0.0, 1e-14);
  EXPECT_ERROR_KIND(wavelet_decompose(c, WaveletFamily::Haar, "LLX"), "BadSubband");
  EXPECT_ERROR_KIND(wavelet_family_from_string("coif1"), "ParamSchemaViolation");
}

TEST(Wavelet, EnergyPreservedPeriodic) {
  for (auto fam : {WaveletFamily::Haar, WaveletFamily::Db2}) {
    const ImageVolume v = fixtures::random_volume(fixtures::make_grid({4, 4, 4}), 12);
    double input = 0, bands = 0;
    for (double x : v.voxels) input += x * x;
    for (const char *sb : {"LLL", "LLH", "LHL", "LHH", "HLL", "HLH", "HHL", "HHH"}) {
      const auto lo = wavelet_lowpass(fam), hi = wavelet_highpass(fam);
      const auto r = oracle::separable_direct(v, sb[0] == 'L' ? lo : hi, sb[1] == 'L' ? lo : hi, sb[2] == 'L' ? lo : hi,
                                              oracle::Pad::Periodic);
      for (double x : r.voxels) bands += x * x;
    }
    EXPECT_NEAR(bands, input, 1e-12 * input);
  }
}

TEST(Wavelet, SeparableMatchesNaive) {
  const ImageVolume v = fixtures::random_volume(fixtures::make_grid({8, 8, 8}), 13);
  for (auto fam : {WaveletFamily::Haar, WaveletFamily::Db2})
    for (const char *sb : {"LLL", "HLH", "HHH"}) {
      const auto lo = wavelet_lowpass(fam), hi = wavelet_highpass(fam);
      const auto naive = oracle::separable_direct(v, sb[0] == 'L' ? lo : hi, sb[1] == 'L' ? lo : hi,
                                                  sb[2] == 'L' ? lo : hi, oracle::Pad::Mirror);
      EXPECT_LT(oracle::max_abs_diff(wavelet_decompose(v, fam, sb).voxels, naive.voxels), 1e-12);
    }
}

TEST(FilterProperties, Linearity) {
  const Geometry g = fixtures::make_grid({8, 8, 8});
  const ImageVolume a = fixtures::random_volume(g, 1), b = fixtures::random_volume(g, 2);
  ImageVolume mix(g);
  for (std::size_t i = 0; i < mix.voxels.size(); ++i) mix.voxels[i] = 2.5 * a.voxels[i] - 1.5 * b.voxels[i];
  auto check = [&](auto f) {
    const auto fa = f(a), fb = f(b), fm = f(mix);
    for (std::size_t i = 0; i < fm.voxels.size(); ++i)
      ASSERT_NEAR(fm.voxels[i], 2.5 * fa.voxels[i] - 1.5 * fb.voxels[i], 1e-9);
  };
  check([](const ImageVolume &v) { return mean_filter(v, 3); });
  check([](const ImageVolume &v) { return log_filter(v, 1.0); });
  check([](const ImageVolume &v) { return laws_filter(v, LawsParams{"L5E5S5"}); });
  check([](const ImageVolume &v) { return wavelet_decompose(v, WaveletFamily::Db2, "HLH"); });
  check([](const ImageVolume &v) {
    GaborParams p;
    p.sigma_mm = 1;
    return gabor_filter(v, p);
  });
}

TEST(FilterProperties, ShiftCovarianceInterior) {
  const Geometry g = fixtures::make_grid({16, 16, 16});
  const ImageVolume v = fixtures::random_volume(g, 3);
  ImageVolume s(g);
  const std::size_t dx = 2, dy = 1, dz = 3;
  for (std::size_t k = 0; k + dz < 16; ++k)
    for (std::size_t j = 0; j + dy < 16; ++j)
      for (std::size_t i = 0; i + dx < 16; ++i) s.at(i + dx, j + dy, k + dz) = v.at(i, j, k);
  const ImageVolume fv = log_filter(v, 1.0), fs = log_filter(s, 1.0);
  const std::size_t r = 4;
  for (std::size_t k = r; k + dz + r < 16; ++k)
    for (std::size_t j = r; j + dy + r < 16; ++j)
      for (std::size_t i = r; i + dx + r < 16; ++i) ASSERT_NEAR(fs.at(i + dx, j + dy, k + dz), fv.at(i, j, k), 1e-12);
}
