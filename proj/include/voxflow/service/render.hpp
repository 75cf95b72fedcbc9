#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "voxflow/core/image.hpp"
#include "voxflow/io/bytes.hpp"
#include "voxflow/seg/segmentation.hpp"

namespace voxflow::service {

using Rgba = std::array<std::uint8_t, 4>;

struct SliceRequest {
  seg::SliceAxis axis = seg::SliceAxis::Axial;
  std::size_t index = 0;
  bool mip = false;
  double window_center = 0;
  double window_width = 1;
  std::map<std::uint32_t, Rgba> colors; // overlay label colours; defaults fill the gaps
};

// Row-major RGBA (or gray when channels == 1) raster; row 0 is v = 0.
struct Raster {
  std::size_t width = 0, height = 0, channels = 1;
  std::vector<std::uint8_t> pixels;
};

// g = clamp((v - (c - w/2)) / w) * 255, rounded to nearest. MIP takes the
// per-ray maximum along the axis first. In-plane axes follow the
// segmentation convention: axial (i, j), sagittal (j, k), coronal (i, k).
// Errors: IndexOutOfRange, GeometryMismatch (overlay), ParamSchemaViolation.
Raster render_slice(const ImageVolume &img, const SliceRequest &req, const LabelMask *overlay = nullptr);

Rgba default_label_color(std::uint32_t label);

// 8-bit gray or RGBA PNG, zlib-compressed, no filtering.
io::Bytes encode_png(const Raster &r);

} // namespace voxflow::service
