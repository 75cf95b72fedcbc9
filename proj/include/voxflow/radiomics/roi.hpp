#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "voxflow/core/image.hpp"

namespace voxflow::radiomics {

enum class Family { Morphology, Intensity, Histogram, Glcm, Glrlm, Glszm, Ngtdm };
Family family_from_string(const std::string &name);
const char *to_string(Family f);
std::set<Family> all_families();

enum class BinMethod { Fbn, Fbs };
enum class MissingPolicy { EmitNan, OmitRow };

struct Discretization {
  BinMethod method = BinMethod::Fbn;
  double value = 32;                // bin count (FBN) or bin width (FBS)
  std::optional<double> fbs_origin; // default: resegmentation low, else ROI min
};

struct RoiExtractionConfig {
  std::optional<double> resample_spacing; // isotropic mm
  std::optional<std::pair<double, double>> resegment_range;
  Discretization discretization;
  std::set<Family> families = all_families();
  MissingPolicy missing = MissingPolicy::EmitNan;

  // Throws ParamSchemaViolation.
  void validate() const;
};

// Voxels of one ROI after preprocessing. The morphological mask is the
// (resampled) label support; the intensity mask additionally drops voxels
// outside the resegmentation range.
struct RoiVoxels {
  Vec3 spacing{1, 1, 1};
  std::vector<Index3> morph_coords;
  std::vector<Index3> coords; // intensity mask, x-fastest scan order
  std::vector<double> values; // parallel to coords
};

// `labels` selects the union of those labels. Throws LabelAbsent,
// GeometryMismatch, EmptyRoiAfterResegmentation.
RoiVoxels preprocess_roi(const ImageVolume &v, const LabelMask &m, const std::set<std::uint32_t> &labels,
                         const RoiExtractionConfig &cfg);

// Gray levels 1..ng on a zero-padded bounding box (0 = outside the ROI).
struct DiscretizedRoi {
  Index3 dims{0, 0, 0};
  std::vector<int> grid;
  std::vector<Index3> coords; // box coordinates of ROI voxels
  std::vector<int> levels;    // parallel to coords
  int ng = 1;
  Vec3 spacing{1, 1, 1};

  int at(long i, long j, long k) const {
    if (i < 0 || j < 0 || k < 0 || i >= long(dims[0]) || j >= long(dims[1]) || k >= long(dims[2])) return 0;
    return grid[std::size_t(i) + dims[0] * (std::size_t(j) + dims[1] * std::size_t(k))];
  }
};

DiscretizedRoi discretize(const RoiVoxels &roi, const Discretization &d,
                          const std::optional<std::pair<double, double>> &resegment = std::nullopt);

// Builds a discretized ROI straight from integer levels (tests, oracles).
DiscretizedRoi make_discretized(const std::vector<Index3> &coords, const std::vector<int> &levels, int ng,
                                Vec3 spacing = {1, 1, 1});

} // namespace voxflow::radiomics
