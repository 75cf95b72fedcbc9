#include "voxflow/radiomics/roi.hpp"

#include <algorithm>
#include <cmath>

#include "voxflow/core/error.hpp"
#include "voxflow/ops/sampling.hpp"

namespace voxflow::radiomics {

Family family_from_string(const std::string &name) {
  static const std::pair<const char *, Family> table[] = {
      {"morphology", Family::Morphology}, {"intensity", Family::Intensity}, {"histogram", Family::Histogram},
      {"glcm", Family::Glcm},             {"glrlm", Family::Glrlm},         {"glszm", Family::Glszm},
      {"ngtdm", Family::Ngtdm}};
  for (const auto &[n, f] : table)
    if (name == n) return f;
  fail("ParamSchemaViolation", "feature family '" + name + "'");
}

const char *to_string(Family f) {
  switch (f) {
  case Family::Morphology: return "morphology";
  case Family::Intensity: return "intensity";
  case Family::Histogram: return "histogram";
  case Family::Glcm: return "glcm";
  case Family::Glrlm: return "glrlm";
  case Family::Glszm: return "glszm";
  case Family::Ngtdm: return "ngtdm";
  }
  return "?";
}

std::set<Family> all_families() {
  return {Family::Morphology, Family::Intensity, Family::Histogram, Family::Glcm,
          Family::Glrlm,      Family::Glszm,     Family::Ngtdm};
}

void RoiExtractionConfig::validate() const {
  if (resample_spacing && !(*resample_spacing > 0)) fail("ParamSchemaViolation", "resample spacing must be positive");
  if (resegment_range && !(resegment_range->first <= resegment_range->second))
    fail("ParamSchemaViolation", "resegmentation range is empty");
  if (discretization.method == BinMethod::Fbn &&
      !(discretization.value >= 2 && discretization.value == std::floor(discretization.value)))
    fail("ParamSchemaViolation", "FBN bin count must be an integer >= 2");
  if (discretization.method == BinMethod::Fbs && !(discretization.value > 0))
    fail("ParamSchemaViolation", "FBS bin width must be positive");
  if (families.empty()) fail("ParamSchemaViolation", "no feature family enabled");
}

RoiVoxels preprocess_roi(const ImageVolume &v, const LabelMask &m, const std::set<std::uint32_t> &labels,
                         const RoiExtractionConfig &cfg) {
  cfg.validate();
  if (!same_geometry(v.geometry, m.geometry)) fail("GeometryMismatch", "image and mask grids differ");
  ImageVolume img = v;
  LabelMask mask = m;
  if (cfg.resample_spacing) {
    const double s = *cfg.resample_spacing;
    const Geometry g = ops::grid_with_spacing(v.geometry, {s, s, s});
    ops::ResampleSpec spec;
    spec.target_grid = g;
    img = ops::resample(v, spec);
    mask = ops::resample_mask(m, g);
  }

  RoiVoxels roi;
  roi.spacing = img.geometry.spacing;
  const Index3 &d = img.geometry.dims;
  for (std::size_t k = 0; k < d[2]; ++k)
    for (std::size_t j = 0; j < d[1]; ++j)
      for (std::size_t i = 0; i < d[0]; ++i) {
        if (!labels.count(mask.at(i, j, k))) continue;
        roi.morph_coords.push_back({i, j, k});
        const double x = img.at(i, j, k);
        if (cfg.resegment_range && (x < cfg.resegment_range->first || x > cfg.resegment_range->second)) continue;
        roi.coords.push_back({i, j, k});
        roi.values.push_back(x);
      }
  if (roi.morph_coords.empty()) fail("LabelAbsent", "selected label is not present in the mask");
  if (roi.values.empty()) fail("EmptyRoiAfterResegmentation", "no ROI voxel lies inside the resegmentation range");
  return roi;
}

DiscretizedRoi make_discretized(const std::vector<Index3> &coords, const std::vector<int> &levels, int ng,
                                Vec3 spacing) {
  if (coords.empty()) fail("EmptyRoi", "ROI has no voxels");
  Index3 lo = coords[0], hi = coords[0];
  for (const auto &c : coords)
    for (std::size_t a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  DiscretizedRoi d;
  d.ng = ng;
  d.spacing = spacing;
  d.levels = levels;
  d.dims = {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
  d.grid.assign(d.dims[0] * d.dims[1] * d.dims[2], 0);
  d.coords.reserve(coords.size());
  for (std::size_t n = 0; n < coords.size(); ++n) {
    const Index3 c{coords[n][0] - lo[0], coords[n][1] - lo[1], coords[n][2] - lo[2]};
    if (levels[n] < 1 || levels[n] > ng) fail("InvalidDiscretization", "level outside 1..ng");
    d.coords.push_back(c);
    d.grid[c[0] + d.dims[0] * (c[1] + d.dims[1] * c[2])] = levels[n];
  }
  return d;
}

DiscretizedRoi discretize(const RoiVoxels &roi, const Discretization &disc,
                          const std::optional<std::pair<double, double>> &resegment) {
  if (roi.values.empty()) fail("EmptyRoi", "ROI has no voxels");
  const auto [mn, mx] = std::minmax_element(roi.values.begin(), roi.values.end());
  std::vector<int> levels(roi.values.size());
  int ng = 1;
  if (disc.method == BinMethod::Fbn) {
    const int n = static_cast<int>(disc.value);
    if (*mx > *mn) {
      ng = n;
      const double range = *mx - *mn;
      for (std::size_t i = 0; i < levels.size(); ++i)
        levels[i] = std::min(n, static_cast<int>(std::floor(n * (roi.values[i] - *mn) / range)) + 1);
    } else {
      std::fill(levels.begin(), levels.end(), 1);
    }
  } else {
    const double origin = disc.fbs_origin ? *disc.fbs_origin : resegment ? resegment->first : *mn;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      // values below an explicit origin fall into the first bin
      levels[i] = std::max(1, static_cast<int>(std::floor((roi.values[i] - origin) / disc.value)) + 1);
      ng = std::max(ng, levels[i]);
    }
  }
  return make_discretized(roi.coords, levels, ng, roi.spacing);
}

} // namespace voxflow::radiomics
