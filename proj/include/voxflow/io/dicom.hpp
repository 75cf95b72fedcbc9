#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "voxflow/core/image.hpp"
#include "voxflow/io/bytes.hpp"

namespace voxflow::io {

constexpr std::uint32_t dicom_tag(std::uint16_t group, std::uint16_t element) {
  return (static_cast<std::uint32_t>(group) << 16) | element;
}

struct DicomDataset;

struct DicomElement {
  std::uint32_t tag = 0;
  std::string vr;
  Bytes value;
  std::vector<DicomDataset> items; // sequences only
};

struct DicomDataset {
  std::map<std::uint32_t, DicomElement> elements;

  const DicomElement *find(std::uint32_t tag) const;
  bool has(std::uint32_t tag) const { return find(tag) != nullptr; }
  // Text value with trailing spaces/NULs removed; nullopt when absent.
  std::optional<std::string> string(std::uint32_t tag) const;
  // Backslash-separated decimal strings (DS/IS).
  std::vector<double> numbers(std::uint32_t tag) const;
  std::optional<std::uint16_t> u16(std::uint32_t tag) const;
  const std::vector<DicomDataset> &sequence(std::uint32_t tag) const;
};

struct DicomFile {
  std::string transfer_syntax;
  DicomDataset meta;
  DicomDataset dataset;
};

// Parses a PS3.10 file (128-byte preamble + "DICM") or a headerless implicit
// VR little endian stream. Supported transfer syntaxes: implicit VR LE and
// explicit VR LE. Throws NotDicom, CompressedPixelDataUnsupported or
// UnsupportedTransferSyntax.
DicomFile parse_dicom(std::span<const std::uint8_t> data);

// Groups image files by (PatientID, SeriesInstanceUID) and assembles one
// volume per series, ordered by that key. `inputs` may mix directories
// (non-recursive) and files; non-DICOM files are skipped.
std::vector<ImageVolume> read_dicom_series(const std::vector<std::filesystem::path> &inputs);

// Rasterises an RTSTRUCT onto the reference grid: ROI n in
// StructureSetROISequence order gets label n; later ROIs overwrite earlier.
LabelMask read_rtstruct(const std::filesystem::path &rt_path, const ImageVolume &reference);
LabelMask rasterize_rtstruct(const DicomDataset &rt, const Geometry &reference);

namespace tags {
constexpr auto TransferSyntaxUID = dicom_tag(0x0002, 0x0010);
constexpr auto SOPInstanceUID = dicom_tag(0x0008, 0x0018);
constexpr auto Modality = dicom_tag(0x0008, 0x0060);
constexpr auto PatientID = dicom_tag(0x0010, 0x0020);
constexpr auto SliceThickness = dicom_tag(0x0018, 0x0050);
constexpr auto SeriesInstanceUID = dicom_tag(0x0020, 0x000E);
constexpr auto InstanceNumber = dicom_tag(0x0020, 0x0013);
constexpr auto ImagePositionPatient = dicom_tag(0x0020, 0x0032);
constexpr auto ImageOrientationPatient = dicom_tag(0x0020, 0x0037);
constexpr auto SamplesPerPixel = dicom_tag(0x0028, 0x0002);
constexpr auto Rows = dicom_tag(0x0028, 0x0010);
constexpr auto Columns = dicom_tag(0x0028, 0x0011);
constexpr auto PixelSpacing = dicom_tag(0x0028, 0x0030);
constexpr auto BitsAllocated = dicom_tag(0x0028, 0x0100);
constexpr auto PixelRepresentation = dicom_tag(0x0028, 0x0103);
constexpr auto RescaleIntercept = dicom_tag(0x0028, 0x1052);
constexpr auto RescaleSlope = dicom_tag(0x0028, 0x1053);
constexpr auto PixelData = dicom_tag(0x7FE0, 0x0010);
constexpr auto StructureSetROISequence = dicom_tag(0x3006, 0x0020);
constexpr auto ROINumber = dicom_tag(0x3006, 0x0022);
constexpr auto ROIName = dicom_tag(0x3006, 0x0026);
constexpr auto ROIContourSequence = dicom_tag(0x3006, 0x0039);
constexpr auto ContourSequence = dicom_tag(0x3006, 0x0040);
constexpr auto ContourGeometricType = dicom_tag(0x3006, 0x0042);
constexpr auto NumberOfContourPoints = dicom_tag(0x3006, 0x0046);
constexpr auto ContourData = dicom_tag(0x3006, 0x0050);
constexpr auto ReferencedROINumber = dicom_tag(0x3006, 0x0084);
} // namespace tags

} // namespace voxflow::io
