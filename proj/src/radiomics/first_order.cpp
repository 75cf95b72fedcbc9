#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "voxflow/core/error.hpp"
#include "voxflow/radiomics/features.hpp"

namespace voxflow::radiomics {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Nearest-rank percentile on sorted data: element ceil(p/100 * n), 1-based.
double percentile(const std::vector<double> &sorted, int p) {
  const std::size_t n = sorted.size();
  const std::size_t rank = std::max<std::size_t>(1, (static_cast<std::size_t>(p) * n + 99) / 100);
  return sorted[rank - 1];
}

double median(const std::vector<double> &sorted) {
  const std::size_t n = sorted.size();
  return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double ratio(double num, double den) { return den != 0.0 ? num / den : kMissing; }

struct Moments {
  double mean = 0, variance = 0, skewness = 0, kurtosis = 0;
};

Moments moments(const std::vector<double> &x) {
  const double n = static_cast<double>(x.size());
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2;
  m.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : kMissing;
  m.kurtosis = m2 > 0 ? m4 / (m2 * m2) - 3.0 : kMissing;
  return m;
}

// Statistics shared by the intensity and intensity-histogram families.
struct Common {
  Moments mom;
  double median, minimum, p10, p90, maximum, iqr, range, mad, rmad, medad, cov, qcd;
};

Common common_stats(const std::vector<double> &x) {
  std::vector<double> s = x;
  std::sort(s.begin(), s.end());
  Common c;
  c.mom = moments(x);
  c.median = median(s);
  c.minimum = s.front();
  c.maximum = s.back();
  c.p10 = percentile(s, 10);
  c.p90 = percentile(s, 90);
  const double p25 = percentile(s, 25), p75 = percentile(s, 75);
  c.iqr = p75 - p25;
  c.range = c.maximum - c.minimum;
  double mad = 0, medad = 0;
  for (double v : x) {
    mad += std::abs(v - c.mom.mean);
    medad += std::abs(v - c.median);
  }
  c.mad = mad / double(x.size());
  c.medad = medad / double(x.size());
  double rsum = 0;
  std::size_t rn = 0;
  for (double v : x)
    if (v >= c.p10 && v <= c.p90) rsum += v, ++rn;
  const double rmean = rsum / double(rn);
  double rmad = 0;
  for (double v : x)
    if (v >= c.p10 && v <= c.p90) rmad += std::abs(v - rmean);
  c.rmad = rmad / double(rn);
  c.cov = ratio(std::sqrt(c.mom.variance), c.mom.mean);
  c.qcd = ratio(p75 - p25, p75 + p25);
  return c;
}

} // namespace

FeatureVector intensity_stats(const std::vector<double> &values) {
  if (values.empty()) fail("EmptyRoi", "ROI has no voxels");
  const Common c = common_stats(values);
  double energy = 0;
  for (double v : values) energy += v * v;
  return {{"stat_mean", c.mom.mean},
          {"stat_variance", c.mom.variance},
          {"stat_skewness", c.mom.skewness},
          {"stat_kurtosis", c.mom.kurtosis},
          {"stat_median", c.median},
          {"stat_minimum", c.minimum},
          {"stat_p10", c.p10},
          {"stat_p90", c.p90},
          {"stat_maximum", c.maximum},
          {"stat_iqr", c.iqr},
          {"stat_range", c.range},
          {"stat_mad", c.mad},
          {"stat_rmad", c.rmad},
          {"stat_medad", c.medad},
          {"stat_cov", c.cov},
          {"stat_qcd", c.qcd},
          {"stat_energy", energy},
          {"stat_rms", std::sqrt(energy / double(values.size()))}};
}

FeatureVector histogram_features(const DiscretizedRoi &d) {
  if (d.levels.empty()) fail("EmptyRoi", "ROI has no voxels");
  const std::vector<double> x(d.levels.begin(), d.levels.end());
  const Common c = common_stats(x);
  std::map<int, std::size_t> counts;
  for (int l : d.levels) ++counts[l];
  int mode = 0;
  std::size_t best = 0;
  for (const auto &[l, n] : counts)
    if (n > best) best = n, mode = l; // ascending scan keeps the lowest level on ties
  double entropy = 0, uniformity = 0;
  for (const auto &[l, n] : counts) {
    const double p = double(n) / double(x.size());
    entropy -= p * std::log2(p);
    uniformity += p * p;
  }
  return {{"ih_mean", c.mom.mean},       {"ih_variance", c.mom.variance}, {"ih_skewness", c.mom.skewness},
          {"ih_kurtosis", c.mom.kurtosis}, {"ih_median", c.median},       {"ih_minimum", c.minimum},
          {"ih_p10", c.p10},             {"ih_p90", c.p90},               {"ih_maximum", c.maximum},
          {"ih_mode", double(mode)},     {"ih_iqr", c.iqr},               {"ih_range", c.range},
          {"ih_mad", c.mad},             {"ih_rmad", c.rmad},             {"ih_cov", c.cov},
          {"ih_qcd", c.qcd},             {"ih_entropy", entropy},   {"ih_uniformity", uniformity}};
}

FeatureVector morphology_features(const std::vector<Index3> &coords, const Vec3 &spacing) {
  if (coords.empty()) fail("EmptyRoi", "ROI has no voxels");
  const DiscretizedRoi box = make_discretized(coords, std::vector<int>(coords.size(), 1), 1, spacing);
  const double sx = spacing[0], sy = spacing[1], sz = spacing[2];
  const double volume = double(coords.size()) * sx * sy * sz;

  // exposed faces, and the centres of voxels owning at least one
  const double face_area[3] = {sy * sz, sx * sz, sx * sy};
  double area = 0;
  std::vector<Vec3> surface;
  for (const auto &c : box.coords) {
    const long i = long(c[0]), j = long(c[1]), k = long(c[2]);
    bool exposed = false;
    for (int a = 0; a < 3; ++a)
      for (int s : {-1, 1}) {
        const int di = a == 0 ? s : 0, dj = a == 1 ? s : 0, dk = a == 2 ? s : 0;
        if (!box.at(i + di, j + dj, k + dk)) {
          area += face_area[a];
          exposed = true;
        }
      }
    if (exposed) surface.push_back({double(i) * sx, double(j) * sy, double(k) * sz});
  }
  double diameter2 = 0;
  for (std::size_t a = 0; a < surface.size(); ++a)
    for (std::size_t b = a + 1; b < surface.size(); ++b) {
      const Vec3 d = surface[a] - surface[b];
      diameter2 = std::max(diameter2, dot(d, d));
    }

  // principal axes from the covariance of voxel centres in mm
  Vec3 mean{0, 0, 0};
  for (const auto &c : box.coords) mean = mean + Vec3{double(c[0]) * sx, double(c[1]) * sy, double(c[2]) * sz};
  mean = (1.0 / double(coords.size())) * mean;
  linalg::Dense cov(3, 3, 0.0);
  for (const auto &c : box.coords) {
    const Vec3 d = Vec3{double(c[0]) * sx, double(c[1]) * sy, double(c[2]) * sz} - mean;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t q = 0; q < 3; ++q) cov(r, q) += d[r] * d[q] / double(coords.size());
  }
  const auto eig = linalg::symmetric_eigen(cov);
  const double l1 = std::max(eig.values[0], 0.0), l2 = std::max(eig.values[1], 0.0), l3 = std::max(eig.values[2], 0.0);

  const double pi = std::numbers::pi;
  const double sphere = std::cbrt(36.0 * pi * volume * volume);
  return {{"morph_volume", volume},
          {"morph_surface_area", area},
          {"morph_surface_to_volume", area / volume},
          {"morph_compactness1", volume / (std::sqrt(pi) * std::pow(area, 1.5))},
          {"morph_compactness2", 36.0 * pi * volume * volume / (area * area * area)},
          {"morph_sphericity", sphere / area},
          {"morph_spherical_disproportion", area / sphere},
          {"morph_max_3d_diameter", std::sqrt(diameter2)},
          {"morph_major_axis", 4.0 * std::sqrt(l1)},
          {"morph_minor_axis", 4.0 * std::sqrt(l2)},
          {"morph_least_axis", 4.0 * std::sqrt(l3)},
          {"morph_elongation", l1 > 0 ? std::sqrt(l2 / l1) : kMissing},
          {"morph_flatness", l1 > 0 ? std::sqrt(l3 / l1) : kMissing}};
}

} // namespace voxflow::radiomics
