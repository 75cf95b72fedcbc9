#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace voxflow {

using Vec3 = std::array<double, 3>;
using Index3 = std::array<std::size_t, 3>;

// 3x3 matrix, row-major storage. For a direction matrix the columns are the
// patient-space unit vectors of the i, j and k voxel axes.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double &operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }
  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }

  static Mat3 identity() { return {}; }
  Mat3 transposed() const;
  Vec3 column(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }
  friend Mat3 operator*(const Mat3 &a, const Mat3 &b);
  friend Vec3 operator*(const Mat3 &a, const Vec3 &v);
  friend bool operator==(const Mat3 &, const Mat3 &) = default;
};

double det(const Mat3 &a);
Mat3 inverse(const Mat3 &a);

inline Vec3 operator+(const Vec3 &a, const Vec3 &b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3 &a, const Vec3 &b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3 &a) { return {s * a[0], s * a[1], s * a[2]}; }
double dot(const Vec3 &a, const Vec3 &b);
Vec3 cross(const Vec3 &a, const Vec3 &b);
double norm(const Vec3 &a);

// Voxel grid geometry shared by images and masks.
struct Geometry {
  Index3 dims{1, 1, 1};
  Vec3 spacing{1, 1, 1};
  Vec3 origin{0, 0, 0};
  Mat3 direction{};

  std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims[0] * (j + dims[1] * k);
  }
  // origin + direction * diag(spacing) * ijk, for continuous indices.
  Vec3 index_to_physical(const Vec3 &ijk) const;
  Vec3 physical_to_index(const Vec3 &p) const;

  // Throws InvalidGeometry when dims/spacing/direction violate invariants.
  void validate() const;

  friend bool operator==(const Geometry &, const Geometry &) = default;
};

bool same_geometry(const Geometry &a, const Geometry &b, double tol = 1e-6);

struct ImageVolume {
  Geometry geometry;
  std::vector<double> voxels; // x-fastest
  std::map<std::string, std::string> meta;

  ImageVolume() = default;
  explicit ImageVolume(Geometry g, double fill = 0.0)
      : geometry(g), voxels(g.voxel_count(), fill) {}

  const Index3 &dims() const { return geometry.dims; }
  double &at(std::size_t i, std::size_t j, std::size_t k) { return voxels[geometry.index(i, j, k)]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return voxels[geometry.index(i, j, k)]; }

  friend bool operator==(const ImageVolume &, const ImageVolume &) = default;
};

struct LabelMask {
  Geometry geometry;
  std::vector<std::uint32_t> labels;
  std::map<std::uint32_t, std::string> names; // 0 = background, never listed

  LabelMask() = default;
  explicit LabelMask(Geometry g) : geometry(g), labels(g.voxel_count(), 0) {}

  const Index3 &dims() const { return geometry.dims; }
  std::uint32_t &at(std::size_t i, std::size_t j, std::size_t k) { return labels[geometry.index(i, j, k)]; }
  std::uint32_t at(std::size_t i, std::size_t j, std::size_t k) const { return labels[geometry.index(i, j, k)]; }

  // Nonzero labels present in the voxel data, ascending.
  std::vector<std::uint32_t> present_labels() const;
  // Adds "label_<n>" names for present labels that lack one.
  void ensure_names();

  friend bool operator==(const LabelMask &, const LabelMask &) = default;
};

} // namespace voxflow
