#include "voxflow/io/image_io.hpp"

#include <cmath>

#include "voxflow/core/error.hpp"

namespace voxflow::io {

ImageFormat image_format_from_string(const std::string &name) {
  if (name == "nifti" || name == "nii") return ImageFormat::Nifti;
  if (name == "nrrd") return ImageFormat::Nrrd;
  fail("UnsupportedFormat", "image format '" + name + "' (supported: nifti, nrrd)");
}

ImageFormat image_format_from_path(const std::filesystem::path &path) {
  const std::string s = path.filename().string();
  const auto ends = [&s](const std::string &suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends(".nii") || ends(".nii.gz") || ends(".hdr") || ends(".hdr.gz")) return ImageFormat::Nifti;
  if (ends(".nrrd") || ends(".nhdr")) return ImageFormat::Nrrd;
  fail("UnsupportedFormat", "cannot infer image format from '" + s + "'");
}

ImageVolume read_image(const std::filesystem::path &path, ImageFormat format) {
  return format == ImageFormat::Nifti ? read_nifti(path) : read_nrrd(path);
}

LabelMask mask_from_volume(const ImageVolume &v) {
  LabelMask m(v.geometry);
  for (std::size_t i = 0; i < v.voxels.size(); ++i) {
    const double x = v.voxels[i];
    if (!(x >= 0.0) || x != std::floor(x) || x > 4294967295.0)
      fail("InvalidMask", "mask voxels must be non-negative integers");
    m.labels[i] = static_cast<std::uint32_t>(x);
  }
  const std::string prefix = "nrrd:label_name_";
  for (const auto &[key, value] : v.meta)
    if (key.rfind(prefix, 0) == 0) m.names[static_cast<std::uint32_t>(std::stoul(key.substr(prefix.size())))] = value;
  m.ensure_names();
  return m;
}

LabelMask read_mask(const std::filesystem::path &path, ImageFormat format) {
  return mask_from_volume(read_image(path, format));
}

void write_image(const ImageVolume &v, ImageFormat format, const std::filesystem::path &path, bool gzip) {
  if (format == ImageFormat::Nifti) {
    Bytes b = encode_nifti(v);
    if (gzip || path.extension() == ".gz") b = gzip_compress(b);
    write_file(path, b);
  } else {
    write_file(path, encode_nrrd(v, gzip));
  }
}

void write_mask(const LabelMask &m, ImageFormat format, const std::filesystem::path &path, bool gzip) {
  if (format == ImageFormat::Nifti) {
    Bytes b = encode_nifti_mask(m);
    if (gzip || path.extension() == ".gz") b = gzip_compress(b);
    write_file(path, b);
  } else {
    write_file(path, encode_nrrd_mask(m, gzip));
  }
}

} // namespace voxflow::io
