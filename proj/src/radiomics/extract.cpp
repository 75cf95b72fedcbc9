#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "voxflow/core/cancel.hpp"
#include "voxflow/core/error.hpp"
#include "voxflow/radiomics/features.hpp"

namespace voxflow::radiomics {

RoiSelection roi_selection_from_string(const std::string &name) {
  if (name == "per_label") return RoiSelection::PerLabel;
  if (name == "merge_labels") return RoiSelection::MergeLabels;
  if (name == "largest_label") return RoiSelection::LargestLabel;
  fail("ParamSchemaViolation", "roi selection '" + name + "'");
}

namespace {

FeatureVector with_missing(FeatureVector names_from) {
  for (auto &f : names_from) f.second = std::numeric_limits<double>::quiet_NaN();
  return names_from;
}

// Feature vector of a 2x1x1 two-level ROI; used only to enumerate names.
const DiscretizedRoi &probe_roi() {
  static const DiscretizedRoi d = make_discretized({{0, 0, 0}, {1, 0, 0}}, {1, 2}, 2);
  return d;
}

FeatureVector family_features(Family f, const RoiVoxels &roi, const DiscretizedRoi &d) {
  switch (f) {
  case Family::Morphology: return morphology_features(roi.morph_coords, roi.spacing);
  case Family::Intensity: return intensity_stats(roi.values);
  case Family::Histogram: return histogram_features(d);
  case Family::Glcm:
    try {
      return glcm_features(d);
    } catch (const Error &e) {
      if (e.kind() != "NoValidPairs") throw;
      return with_missing(glcm_features(probe_roi()));
    }
  case Family::Glrlm: return glrlm_features(d);
  case Family::Glszm: return glszm_features(d);
  case Family::Ngtdm: return ngtdm_features(d);
  }
  return {};
}

} // namespace

std::vector<std::string> feature_names(const std::set<Family> &families) {
  RoiVoxels roi;
  roi.coords = {{0, 0, 0}, {1, 0, 0}};
  roi.morph_coords = roi.coords;
  roi.values = {1, 2};
  std::vector<std::string> out;
  for (Family f : families)
    for (const auto &[name, value] : family_features(f, roi, probe_roi())) out.push_back(name);
  return out;
}

FeatureVector compute_features(const RoiVoxels &roi, const RoiExtractionConfig &cfg) {
  cfg.validate();
  const DiscretizedRoi d = discretize(roi, cfg.discretization, cfg.resegment_range);
  FeatureVector out;
  for (Family f : cfg.families) {
    check_cancelled();
    const auto part = family_features(f, roi, d);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

ExtractionResult extract_features(const ImageVolume &image, const LabelMask &mask, const RoiExtractionConfig &cfg,
                                  RoiSelection selection, const std::string &patient_id) {
  cfg.validate();
  const auto present = mask.present_labels();
  if (present.empty()) fail("LabelAbsent", "mask has no labelled voxels");

  struct Selected {
    std::string name;
    double label;
    std::set<std::uint32_t> labels;
  };
  auto label_name = [&](std::uint32_t l) {
    const auto it = mask.names.find(l);
    return it != mask.names.end() ? it->second : "label_" + std::to_string(l);
  };
  std::vector<Selected> rois;
  switch (selection) {
  case RoiSelection::PerLabel:
    for (auto l : present) rois.push_back({label_name(l), double(l), {l}});
    break;
  case RoiSelection::MergeLabels:
    rois.push_back({"merged", 0.0, {present.begin(), present.end()}});
    break;
  case RoiSelection::LargestLabel: {
    std::map<std::uint32_t, std::size_t> counts;
    for (auto l : mask.labels)
      if (l) ++counts[l];
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
      if (it->second > best->second) best = it; // ties keep the lower label
    rois.push_back({label_name(best->first), double(best->first), {best->first}});
    break;
  }
  }

  ExtractionResult res;
  Table &t = res.table;
  t.columns = {{"patient_id", ColumnKind::Text}, {"roi", ColumnKind::Categorical}, {"label", ColumnKind::Numeric}};
  for (const auto &n : feature_names(cfg.families)) t.columns.push_back({n, ColumnKind::Numeric});
  for (const auto &r : rois) {
    FeatureVector fv;
    try {
      fv = compute_features(preprocess_roi(image, mask, r.labels, cfg), cfg);
    } catch (const Error &e) {
      res.diagnostics.push_back(r.name + ": " + e.what());
      continue;
    }
    const bool has_missing = std::any_of(fv.begin(), fv.end(), [](const auto &f) { return std::isnan(f.second); });
    if (has_missing && cfg.missing == MissingPolicy::OmitRow) {
      res.diagnostics.push_back(r.name + ": row omitted because of missing feature values");
      continue;
    }
    std::vector<Cell> row{Cell{patient_id}, Cell{r.name}, Cell{r.label}};
    for (const auto &[name, value] : fv) row.push_back(std::isnan(value) ? Cell{} : Cell{value});
    t.rows.push_back(std::move(row));
  }
  return res;
}

} // namespace voxflow::radiomics
