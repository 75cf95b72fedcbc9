#pragma once

#include <string>
#include <utility>
#include <vector>

#include "voxflow/core/linalg.hpp"
#include "voxflow/core/table.hpp"
#include "voxflow/radiomics/roi.hpp"

namespace voxflow::radiomics {

// Ordered (name, value) pairs; NaN marks a missing feature.
using FeatureVector = std::vector<std::pair<std::string, double>>;

// The 13 unique neighbour offsets at Chebyshev distance 1.
const std::vector<std::array<int, 3>> &unique_directions();

FeatureVector intensity_stats(const std::vector<double> &values);
FeatureVector histogram_features(const DiscretizedRoi &d);
FeatureVector morphology_features(const std::vector<Index3> &coords, const Vec3 &spacing);

// Texture matrices (raw counts). Rows are gray levels 1..ng.
linalg::Dense glcm_matrix(const DiscretizedRoi &d);  // ng x ng, symmetrised, merged over 13 directions
linalg::Dense glrlm_matrix(const DiscretizedRoi &d); // ng x max run length, merged
linalg::Dense glszm_matrix(const DiscretizedRoi &d); // ng x max zone size, 26-connected zones
struct Ngtdm {
  std::vector<double> n; // voxels per level with at least one valid neighbour
  std::vector<double> s; // summed |level - neighbourhood mean|
};
Ngtdm ngtdm_matrix(const DiscretizedRoi &d);

FeatureVector glcm_features(const linalg::Dense &counts);
FeatureVector glrlm_features(const linalg::Dense &counts, std::size_t roi_voxels);
FeatureVector glszm_features(const linalg::Dense &counts, std::size_t roi_voxels);
FeatureVector ngtdm_features(const Ngtdm &m);

FeatureVector glcm_features(const DiscretizedRoi &d);
FeatureVector glrlm_features(const DiscretizedRoi &d);
FeatureVector glszm_features(const DiscretizedRoi &d);
FeatureVector ngtdm_features(const DiscretizedRoi &d);

// Canonical feature names for the enabled families, in output order.
std::vector<std::string> feature_names(const std::set<Family> &families);

FeatureVector compute_features(const RoiVoxels &roi, const RoiExtractionConfig &cfg);

enum class RoiSelection { PerLabel, MergeLabels, LargestLabel };
RoiSelection roi_selection_from_string(const std::string &name);

struct ExtractionResult {
  Table table; // patient_id, roi, label, then features
  std::vector<std::string> diagnostics;
};

ExtractionResult extract_features(const ImageVolume &image, const LabelMask &mask, const RoiExtractionConfig &cfg,
                                  RoiSelection selection, const std::string &patient_id = "patient");

} // namespace voxflow::radiomics
