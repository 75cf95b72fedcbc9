#pragma once

#include <filesystem>
#include <string>

#include "voxflow/core/image.hpp"
#include "voxflow/io/bytes.hpp"

namespace voxflow::io {

// Physical coordinates are LPS (DICOM patient convention). NIfTI's RAS
// world frame is converted on read and write by negating x and y.
// NIfTI geometry precedence: sform (code > 0), then qform, then pixdim with
// identity direction.
ImageVolume read_nifti(const std::filesystem::path &path);
ImageVolume decode_nifti(std::span<const std::uint8_t> data, const std::filesystem::path &path = {});

// NRRD 0001..0005, dimension 3, raw or gzip encoding. Orientation from
// `space directions` / `space origin`, falling back to `spacings`.
ImageVolume read_nrrd(const std::filesystem::path &path);

enum class ImageFormat { Nifti, Nrrd };
ImageFormat image_format_from_string(const std::string &name); // throws UnsupportedFormat
// Guesses from the extension (.nii, .nii.gz, .nrrd, .nhdr).
ImageFormat image_format_from_path(const std::filesystem::path &path);

ImageVolume read_image(const std::filesystem::path &path, ImageFormat format);
// Reads an integer label volume; voxel values must be non-negative integers.
LabelMask read_mask(const std::filesystem::path &path, ImageFormat format);
LabelMask mask_from_volume(const ImageVolume &v);

// Images are written as float64, masks as int32 (NIfTI) / uint16 (NRRD,
// uint32 when a label exceeds 65535). A trailing ".gz" on a NIfTI path, or
// gzip=true for NRRD, compresses the payload.
void write_image(const ImageVolume &v, ImageFormat format, const std::filesystem::path &path, bool gzip = false);
void write_mask(const LabelMask &m, ImageFormat format, const std::filesystem::path &path, bool gzip = false);

Bytes encode_nifti(const ImageVolume &v);
Bytes encode_nifti_mask(const LabelMask &m);
std::string encode_nrrd(const ImageVolume &v, bool gzip);
std::string encode_nrrd_mask(const LabelMask &m, bool gzip);

} // namespace voxflow::io
