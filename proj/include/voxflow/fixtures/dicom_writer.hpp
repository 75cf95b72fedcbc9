#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voxflow/core/image.hpp"
#include "voxflow/io/bytes.hpp"

// Minimal DICOM encoder for synthetic test data: uncompressed CT-like image
// slices and RTSTRUCT files. Not a general DICOM export path.
namespace voxflow::fixtures {

struct DicomSeriesInfo {
  std::string patient_id = "PHANTOM";
  std::string series_uid = "1.2.826.0.1.3680043.10.1";
  std::string modality = "CT";
  bool explicit_vr = true;
  bool preamble = true;
  double rescale_slope = 1.0;
  double rescale_intercept = 0.0;
};

// One file per slice of `v` (values are stored as int16 after inverting the
// rescale). Returns the written paths in slice order.
std::vector<std::filesystem::path> write_dicom_series(const ImageVolume &v, const std::filesystem::path &dir,
                                                      const DicomSeriesInfo &info, const std::string &stem = "slice");

io::Bytes encode_dicom_slice(const ImageVolume &v, std::size_t k, const DicomSeriesInfo &info, int instance_number);

struct RtContour {
  std::vector<Vec3> points; // patient coordinates, closed planar
};

struct RtRoi {
  int number = 1;
  std::string name;
  std::vector<RtContour> contours;
};

io::Bytes encode_rtstruct(const std::vector<RtRoi> &rois, const std::string &patient_id = "PHANTOM",
                          bool explicit_vr = true);

} // namespace voxflow::fixtures
