#include <array>
#include <cmath>
#include <cstring>

#include "voxflow/core/error.hpp"
#include "voxflow/io/image_io.hpp"

namespace voxflow::io {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kDefaultVoxOffset = 352;

enum : short {
  DT_UINT8 = 2,
  DT_INT16 = 4,
  DT_INT32 = 8,
  DT_FLOAT32 = 16,
  DT_FLOAT64 = 64,
};

class HeaderReader {
public:
  HeaderReader(const std::uint8_t *p, bool swap) : p_(p), swap_(swap) {}
  template <typename T> T get(std::size_t offset) const {
    T v = load_le<T>(p_ + offset);
    return swap_ ? byteswap_value(v) : v;
  }

private:
  const std::uint8_t *p_;
  bool swap_;
};

// LPS <-> RAS: negate the first two rows.
Mat3 flip_xy(Mat3 m) {
  for (int c = 0; c < 3; ++c) {
    m(0, c) = -m(0, c);
    m(1, c) = -m(1, c);
  }
  return m;
}

void orthonormalize(Mat3 &d) {
  Vec3 cols[3] = {d.column(0), d.column(1), d.column(2)};
  for (int c = 0; c < 3; ++c) {
    for (int prev = 0; prev < c; ++prev) cols[c] = cols[c] - dot(cols[c], cols[prev]) * cols[prev];
    const double n = norm(cols[c]);
    if (n < 1e-12) fail("InvalidGeometry", "degenerate orientation matrix");
    cols[c] = (1.0 / n) * cols[c];
  }
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) d(r, c) = cols[c][static_cast<std::size_t>(r)];
}

Mat3 quaternion_to_matrix(double b, double c, double d) {
  double a = 1.0 - (b * b + c * c + d * d);
  if (a < 1e-7) {
    a = 1.0 / std::sqrt(b * b + c * c + d * d);
    b *= a;
    c *= a;
    d *= a;
    a = 0.0;
  } else {
    a = std::sqrt(a);
  }
  Mat3 r;
  r(0, 0) = a * a + b * b - c * c - d * d;
  r(0, 1) = 2 * (b * c - a * d);
  r(0, 2) = 2 * (b * d + a * c);
  r(1, 0) = 2 * (b * c + a * d);
  r(1, 1) = a * a + c * c - b * b - d * d;
  r(1, 2) = 2 * (c * d - a * b);
  r(2, 0) = 2 * (b * d - a * c);
  r(2, 1) = 2 * (c * d + a * b);
  r(2, 2) = a * a + d * d - c * c - b * b;
  return r;
}

// Inverse of quaternion_to_matrix for a proper rotation.
std::array<double, 3> matrix_to_quaternion(const Mat3 &r) {
  double a = r(0, 0) + r(1, 1) + r(2, 2) + 1.0;
  double b, c, d;
  if (a > 0.5) {
    a = 0.5 * std::sqrt(a);
    b = 0.25 * (r(2, 1) - r(1, 2)) / a;
    c = 0.25 * (r(0, 2) - r(2, 0)) / a;
    d = 0.25 * (r(1, 0) - r(0, 1)) / a;
  } else {
    const double xd = 1.0 + r(0, 0) - (r(1, 1) + r(2, 2));
    const double yd = 1.0 + r(1, 1) - (r(0, 0) + r(2, 2));
    const double zd = 1.0 + r(2, 2) - (r(0, 0) + r(1, 1));
    if (xd > 1.0) {
      b = 0.5 * std::sqrt(xd);
      c = 0.25 * (r(0, 1) + r(1, 0)) / b;
      d = 0.25 * (r(0, 2) + r(2, 0)) / b;
      a = 0.25 * (r(2, 1) - r(1, 2)) / b;
    } else if (yd > 1.0) {
      c = 0.5 * std::sqrt(yd);
      b = 0.25 * (r(0, 1) + r(1, 0)) / c;
      d = 0.25 * (r(1, 2) + r(2, 1)) / c;
      a = 0.25 * (r(0, 2) - r(2, 0)) / c;
    } else {
      d = 0.5 * std::sqrt(zd);
      b = 0.25 * (r(0, 2) + r(2, 0)) / d;
      c = 0.25 * (r(1, 2) + r(2, 1)) / d;
      a = 0.25 * (r(1, 0) - r(0, 1)) / d;
    }
    if (a < 0.0) {
      b = -b;
      c = -c;
      d = -d;
    }
  }
  return {b, c, d};
}

template <typename T>
void convert_voxels(const std::uint8_t *src, std::size_t count, bool swap, std::vector<double> &out) {
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    T v = load_le<T>(src + i * sizeof(T));
    if (swap) v = byteswap_value(v);
    out[i] = static_cast<double>(v);
  }
}

} // namespace

ImageVolume decode_nifti(std::span<const std::uint8_t> raw, const std::filesystem::path &path) {
  Bytes inflated;
  std::span<const std::uint8_t> data = raw;
  if (has_gzip_magic(raw)) {
    inflated = gzip_decompress(raw);
    data = inflated;
  }
  if (data.size() < kHeaderSize) fail("NotNifti", "file shorter than a NIfTI-1 header");

  const std::int32_t sizeof_hdr = load_le<std::int32_t>(data.data());
  bool swap = false;
  if (sizeof_hdr != 348) {
    if (byteswap_value(sizeof_hdr) != 348) fail("NotNifti", "sizeof_hdr is not 348");
    swap = true;
  }
  const char *magic = reinterpret_cast<const char *>(data.data() + 344);
  const bool single_file = std::memcmp(magic, "n+1\0", 4) == 0;
  const bool pair_file = std::memcmp(magic, "ni1\0", 4) == 0;
  if (!single_file && !pair_file) fail("NotNifti", "missing n+1/ni1 magic");

  HeaderReader h(data.data(), swap);
  const int ndim = h.get<std::int16_t>(40);
  if (ndim < 1 || ndim > 7) fail("NotNifti", "dim[0] out of range");
  Index3 dims{1, 1, 1};
  for (int a = 0; a < 3; ++a) {
    const int d = a < ndim ? h.get<std::int16_t>(42 + 2 * static_cast<std::size_t>(a)) : 1;
    if (d < 1) fail("NotNifti", "non-positive dimension");
    dims[static_cast<std::size_t>(a)] = static_cast<std::size_t>(d);
  }
  for (int a = 3; a < ndim; ++a)
    if (h.get<std::int16_t>(42 + 2 * static_cast<std::size_t>(a)) > 1)
      fail("UnsupportedDimension", "only 3D volumes are supported");

  const short datatype = h.get<std::int16_t>(70);
  std::size_t bytes_per_voxel = 0;
  switch (datatype) {
  case DT_UINT8: bytes_per_voxel = 1; break;
  case DT_INT16: bytes_per_voxel = 2; break;
  case DT_INT32: bytes_per_voxel = 4; break;
  case DT_FLOAT32: bytes_per_voxel = 4; break;
  case DT_FLOAT64: bytes_per_voxel = 8; break;
  default: fail("UnsupportedDatatype", "NIfTI datatype code " + std::to_string(datatype));
  }

  float pixdim[8];
  for (std::size_t i = 0; i < 8; ++i) pixdim[i] = h.get<float>(76 + 4 * i);
  const float vox_offset = h.get<float>(108);
  const float slope = h.get<float>(112);
  const float inter = h.get<float>(116);
  const short qform_code = h.get<std::int16_t>(252);
  const short sform_code = h.get<std::int16_t>(254);

  Geometry g;
  g.dims = dims;
  if (sform_code > 0) {
    Mat3 lin;
    Vec3 off;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) lin(r, c) = h.get<float>(280 + 16 * static_cast<std::size_t>(r) + 4 * static_cast<std::size_t>(c));
      off[static_cast<std::size_t>(r)] = h.get<float>(280 + 16 * static_cast<std::size_t>(r) + 12);
    }
    lin = flip_xy(lin);
    off = {-off[0], -off[1], off[2]};
    for (int c = 0; c < 3; ++c) {
      const double s = norm(lin.column(c));
      if (!(s > 0.0)) fail("InvalidGeometry", "sform column has zero length");
      g.spacing[static_cast<std::size_t>(c)] = s;
      for (int r = 0; r < 3; ++r) lin(r, c) /= s;
    }
    orthonormalize(lin);
    g.direction = lin;
    g.origin = off;
  } else if (qform_code > 0) {
    Mat3 r = quaternion_to_matrix(h.get<float>(256), h.get<float>(260), h.get<float>(264));
    const double qfac = pixdim[0] < 0 ? -1.0 : 1.0;
    for (int row = 0; row < 3; ++row) r(row, 2) *= qfac;
    g.direction = flip_xy(r);
    g.origin = {-static_cast<double>(h.get<float>(268)), -static_cast<double>(h.get<float>(272)),
                static_cast<double>(h.get<float>(276))};
    for (std::size_t a = 0; a < 3; ++a) g.spacing[a] = std::abs(pixdim[a + 1]) > 0 ? std::abs(pixdim[a + 1]) : 1.0;
  } else {
    for (std::size_t a = 0; a < 3; ++a) g.spacing[a] = std::abs(pixdim[a + 1]) > 0 ? std::abs(pixdim[a + 1]) : 1.0;
  }
  g.validate();

  const std::size_t count = g.voxel_count();
  const std::size_t payload = count * bytes_per_voxel;
  Bytes pair_payload;
  const std::uint8_t *src = nullptr;
  if (single_file) {
    const auto offset = static_cast<std::size_t>(vox_offset < kHeaderSize ? kDefaultVoxOffset : vox_offset);
    if (data.size() < offset + payload) fail("TruncatedData", "voxel payload shorter than header declares");
    src = data.data() + offset;
  } else {
    std::filesystem::path img = path;
    if (img.extension() == ".gz") img.replace_extension();
    img.replace_extension(".img");
    Bytes raw_img = read_file(img);
    pair_payload = has_gzip_magic(raw_img) ? gzip_decompress(raw_img) : std::move(raw_img);
    const auto offset = static_cast<std::size_t>(vox_offset);
    if (pair_payload.size() < offset + payload) fail("TruncatedData", ".img shorter than header declares");
    src = pair_payload.data() + offset;
  }

  ImageVolume v;
  v.geometry = g;
  switch (datatype) {
  case DT_UINT8: convert_voxels<std::uint8_t>(src, count, swap, v.voxels); break;
  case DT_INT16: convert_voxels<std::int16_t>(src, count, swap, v.voxels); break;
  case DT_INT32: convert_voxels<std::int32_t>(src, count, swap, v.voxels); break;
  case DT_FLOAT32: convert_voxels<float>(src, count, swap, v.voxels); break;
  case DT_FLOAT64: convert_voxels<double>(src, count, swap, v.voxels); break;
  default: break;
  }
  if (slope != 0.0f && std::isfinite(slope)) {
    const double s = slope, b = std::isfinite(inter) ? inter : 0.0f;
    if (s != 1.0 || b != 0.0)
      for (auto &x : v.voxels) x = x * s + b;
  }
  return v;
}

ImageVolume read_nifti(const std::filesystem::path &path) { return decode_nifti(read_file(path), path); }

namespace {

Bytes nifti_header(const Geometry &g, short datatype, short bitpix) {
  Bytes h(kDefaultVoxOffset, 0);
  auto put = [&h](std::size_t offset, auto value) { std::memcpy(h.data() + offset, &value, sizeof(value)); };
  put(0, std::int32_t{348});
  put(40, std::int16_t{3});
  for (std::size_t a = 0; a < 3; ++a) put(42 + 2 * a, static_cast<std::int16_t>(g.dims[a]));
  for (std::size_t a = 3; a < 7; ++a) put(42 + 2 * a, std::int16_t{1});
  put(70, datatype);
  put(72, bitpix);

  const Mat3 ras = flip_xy(g.direction);
  Mat3 rot = ras;
  float qfac = 1.0f;
  if (det(ras) < 0) {
    qfac = -1.0f;
    for (int r = 0; r < 3; ++r) rot(r, 2) = -rot(r, 2);
  }
  put(76, qfac);
  for (std::size_t a = 0; a < 3; ++a) put(80 + 4 * a, static_cast<float>(g.spacing[a]));
  put(108, static_cast<float>(kDefaultVoxOffset));
  put(112, 1.0f);
  put(116, 0.0f);
  put(123, std::uint8_t{2}); // mm
  put(252, std::int16_t{1});
  put(254, std::int16_t{1});
  const auto q = matrix_to_quaternion(rot);
  put(256, static_cast<float>(q[0]));
  put(260, static_cast<float>(q[1]));
  put(264, static_cast<float>(q[2]));
  const Vec3 ras_origin{-g.origin[0], -g.origin[1], g.origin[2]};
  for (std::size_t a = 0; a < 3; ++a) put(268 + 4 * a, static_cast<float>(ras_origin[a]));
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c)
      put(280 + 16 * static_cast<std::size_t>(r) + 4 * static_cast<std::size_t>(c),
          static_cast<float>(ras(r, c) * g.spacing[static_cast<std::size_t>(c)]));
    put(280 + 16 * static_cast<std::size_t>(r) + 12, static_cast<float>(ras_origin[static_cast<std::size_t>(r)]));
  }
  std::memcpy(h.data() + 344, "n+1\0", 4);
  return h;
}

} // namespace

Bytes encode_nifti(const ImageVolume &v) {
  Bytes out = nifti_header(v.geometry, DT_FLOAT64, 64);
  out.reserve(out.size() + v.voxels.size() * 8);
  for (double x : v.voxels) store_le(out, x);
  return out;
}

Bytes encode_nifti_mask(const LabelMask &m) {
  Bytes out = nifti_header(m.geometry, DT_INT32, 32);
  out.reserve(out.size() + m.labels.size() * 4);
  for (auto l : m.labels) {
    if (l > 0x7fffffffu) fail("UnsupportedFormat", "label exceeds int32 range");
    store_le(out, static_cast<std::int32_t>(l));
  }
  return out;
}

} // namespace voxflow::io
