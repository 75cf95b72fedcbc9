#include "voxflow/core/image.hpp"

#include <cmath>
#include <set>

#include "voxflow/core/error.hpp"

namespace voxflow {

Mat3 Mat3::transposed() const {
  Mat3 t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
  return t;
}

Mat3 operator*(const Mat3 &a, const Mat3 &b) {
  Mat3 out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(r, k) * b(k, c);
      out(r, c) = s;
    }
  return out;
}

Vec3 operator*(const Mat3 &a, const Vec3 &v) {
  Vec3 out{};
  for (int r = 0; r < 3; ++r)
    out[static_cast<std::size_t>(r)] = a(r, 0) * v[0] + a(r, 1) * v[1] + a(r, 2) * v[2];
  return out;
}

double det(const Mat3 &a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Mat3 inverse(const Mat3 &a) {
  const double d = det(a);
  if (std::abs(d) < 1e-300) fail("SingularTransform", "matrix is not invertible");
  Mat3 inv;
  inv(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
  inv(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
  inv(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
  inv(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
  inv(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
  inv(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
  inv(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
  inv(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
  inv(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
  return inv;
}

double dot(const Vec3 &a, const Vec3 &b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3 &a, const Vec3 &b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3 &a) { return std::sqrt(dot(a, a)); }

Vec3 Geometry::index_to_physical(const Vec3 &ijk) const {
  const Vec3 scaled{ijk[0] * spacing[0], ijk[1] * spacing[1], ijk[2] * spacing[2]};
  return origin + direction * scaled;
}

Vec3 Geometry::physical_to_index(const Vec3 &p) const {
  // direction is orthonormal, so its inverse is its transpose.
  const Vec3 local = direction.transposed() * (p - origin);
  return {local[0] / spacing[0], local[1] / spacing[1], local[2] / spacing[2]};
}

void Geometry::validate() const {
  for (std::size_t a = 0; a < 3; ++a) {
    if (dims[a] == 0) fail("InvalidGeometry", "dimension " + std::to_string(a) + " is zero");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
      fail("InvalidGeometry", "spacing must be strictly positive");
  }
  const Mat3 g = direction.transposed() * direction;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (std::abs(g(r, c) - (r == c ? 1.0 : 0.0)) > 1e-6)
        fail("InvalidGeometry", "direction matrix is not orthonormal");
}

bool same_geometry(const Geometry &a, const Geometry &b, double tol) {
  if (a.dims != b.dims) return false;
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::abs(a.spacing[i] - b.spacing[i]) > tol) return false;
    if (std::abs(a.origin[i] - b.origin[i]) > tol) return false;
  }
  for (std::size_t i = 0; i < 9; ++i)
    if (std::abs(a.direction.m[i] - b.direction.m[i]) > tol) return false;
  return true;
}

std::vector<std::uint32_t> LabelMask::present_labels() const {
  std::set<std::uint32_t> seen;
  for (auto l : labels)
    if (l != 0) seen.insert(l);
  return {seen.begin(), seen.end()};
}

void LabelMask::ensure_names() {
  for (auto l : present_labels())
    if (!names.count(l)) names[l] = "label_" + std::to_string(l);
}

} // namespace voxflow
