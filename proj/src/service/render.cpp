#include "voxflow/service/render.hpp"

#include <algorithm>
#include <cmath>

#include <zlib.h>

#include "voxflow/core/error.hpp"

namespace voxflow::service {

Rgba default_label_color(std::uint32_t label) {
  static const Rgba palette[] = {{230, 25, 25, 128},  {25, 180, 75, 128},  {40, 90, 230, 128},
                                 {245, 200, 20, 128}, {145, 30, 180, 128}, {70, 240, 240, 128}};
  return palette[(label - 1) % std::size(palette)];
}

Raster render_slice(const ImageVolume &img, const SliceRequest &req, const LabelMask *overlay) {
  if (!(req.window_width > 0) || !std::isfinite(req.window_center))
    fail("ParamSchemaViolation", "window width must be positive");
  const Geometry &g = img.geometry;
  const auto shape = seg::slice_shape(g, req.axis);
  const auto depth = seg::slice_count(g, req.axis);
  if (!req.mip && req.index >= depth)
    fail("IndexOutOfRange", "slice " + std::to_string(req.index) + " of " + std::to_string(depth));
  if (overlay && !same_geometry(g, overlay->geometry)) fail("GeometryMismatch", "overlay grid differs from image");

  Raster r;
  r.width = shape.width;
  r.height = shape.height;
  r.channels = overlay ? 4 : 1;
  r.pixels.resize(r.width * r.height * r.channels);
  const double lo = req.window_center - req.window_width / 2;
  for (std::size_t v = 0; v < r.height; ++v)
    for (std::size_t u = 0; u < r.width; ++u) {
      double x = -INFINITY;
      std::uint32_t label = 0;
      if (req.mip) {
        for (std::size_t s = 0; s < depth; ++s) {
          const auto idx = seg::slice_voxel(g, req.axis, s, u, v);
          x = std::max(x, img.voxels[idx]);
          if (overlay && overlay->labels[idx]) label = std::max(label, overlay->labels[idx]);
        }
      } else {
        const auto idx = seg::slice_voxel(g, req.axis, req.index, u, v);
        x = img.voxels[idx];
        if (overlay) label = overlay->labels[idx];
      }
      const double t = std::isnan(x) ? 0.0 : std::clamp((x - lo) / req.window_width, 0.0, 1.0);
      const auto gray = static_cast<std::uint8_t>(std::lround(t * 255));
      std::uint8_t *px = &r.pixels[(v * r.width + u) * r.channels];
      if (r.channels == 1) {
        px[0] = gray;
        continue;
      }
      double rgb[3] = {double(gray), double(gray), double(gray)};
      if (label) {
        const auto it = req.colors.find(label);
        const Rgba c = it != req.colors.end() ? it->second : default_label_color(label);
        const double a = c[3] / 255.0;
        for (int k = 0; k < 3; ++k) rgb[k] = a * c[k] + (1 - a) * rgb[k];
      }
      for (int k = 0; k < 3; ++k) px[k] = static_cast<std::uint8_t>(std::lround(rgb[k]));
      px[3] = 255;
    }
  return r;
}

namespace {

void put_be32(io::Bytes &out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void chunk(io::Bytes &out, const char *type, const io::Bytes &data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  uLong crc = crc32(0, out.data() + start, static_cast<uInt>(out.size() - start));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

} // namespace

io::Bytes encode_png(const Raster &r) {
  if (r.channels != 1 && r.channels != 4) fail("ParamSchemaViolation", "PNG needs 1 or 4 channels");
  io::Bytes raw;
  raw.reserve(r.height * (r.width * r.channels + 1));
  for (std::size_t y = 0; y < r.height; ++y) {
    raw.push_back(0); // filter: none
    const auto *row = &r.pixels[y * r.width * r.channels];
    raw.insert(raw.end(), row, row + r.width * r.channels);
  }
  uLongf len = compressBound(static_cast<uLong>(raw.size()));
  io::Bytes z(len);
  if (compress2(z.data(), &len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    fail("IoFailure", "zlib compression failed");
  z.resize(len);

  io::Bytes out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  io::Bytes ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(r.width));
  put_be32(ihdr, static_cast<std::uint32_t>(r.height));
  ihdr.push_back(8);                               // bit depth
  ihdr.push_back(r.channels == 1 ? 0 : 6);         // gray / RGBA
  ihdr.insert(ihdr.end(), {0, 0, 0});              // deflate, adaptive filtering, no interlace
  chunk(out, "IHDR", ihdr);
  chunk(out, "IDAT", z);
  chunk(out, "IEND", {});
  return out;
}

} // namespace voxflow::service
