#include "voxflow/reg/transform.hpp"

#include <algorithm>
#include <cmath>

#include "voxflow/core/cancel.hpp"
#include "voxflow/core/error.hpp"

namespace voxflow::reg {

TransformKind transform_kind_from_string(const std::string &name) {
  if (name == "rigid") return TransformKind::Rigid;
  if (name == "affine") return TransformKind::Affine;
  if (name == "deformable") return TransformKind::Deformable;
  fail("ParamSchemaViolation", "transform kind '" + name + "'");
}

const char *to_string(TransformKind k) {
  switch (k) {
  case TransformKind::Rigid: return "rigid";
  case TransformKind::Affine: return "affine";
  case TransformKind::Deformable: return "deformable";
  }
  return "rigid";
}

Mat3 euler_to_matrix(const Vec3 &a) {
  const double cx = std::cos(a[0]), sx = std::sin(a[0]);
  const double cy = std::cos(a[1]), sy = std::sin(a[1]);
  const double cz = std::cos(a[2]), sz = std::sin(a[2]);
  Mat3 rx, ry, rz;
  rx.m = {1, 0, 0, 0, cx, -sx, 0, sx, cx};
  ry.m = {cy, 0, sy, 0, 1, 0, -sy, 0, cy};
  rz.m = {cz, -sz, 0, sz, cz, 0, 0, 0, 1};
  return rz * (ry * rx);
}

Vec3 matrix_to_euler(const Mat3 &r) {
  const double sy = std::clamp(-r(2, 0), -1.0, 1.0);
  const double y = std::asin(sy);
  if (std::abs(sy) < 1.0 - 1e-12) return {std::atan2(r(2, 1), r(2, 2)), y, std::atan2(r(1, 0), r(0, 0))};
  // gimbal lock: fold the x rotation into z
  return {0.0, y, std::atan2(-r(0, 1), r(1, 1))};
}

Transform Transform::rigid(const Vec3 &angles, const Vec3 &t, const Vec3 &center) {
  Transform out;
  out.kind = TransformKind::Rigid;
  out.angles = angles;
  out.linear = euler_to_matrix(angles);
  out.translation = t;
  out.center = center;
  return out;
}

Transform Transform::affine(const Mat3 &a, const Vec3 &t, const Vec3 &center) {
  inverse(a); // rejects singular matrices early
  Transform out;
  out.kind = TransformKind::Affine;
  out.linear = a;
  out.translation = t;
  out.center = center;
  return out;
}

Transform Transform::identity_field(const Geometry &grid) {
  Transform out;
  out.kind = TransformKind::Deformable;
  out.grid = grid;
  out.field.assign(grid.voxel_count() * 3, 0.0);
  return out;
}

Vec3 Transform::forward(const Vec3 &x) const {
  if (kind == TransformKind::Deformable) fail("UnsupportedTransform", "deformable fields store only the inverse map");
  return linear * (x - center) + center + translation;
}

namespace {

Vec3 field_at(const Transform &t, const Vec3 &p) {
  const Geometry &g = t.grid;
  Vec3 ijk = g.physical_to_index(p);
  std::size_t i0[3], i1[3];
  double f[3];
  for (std::size_t a = 0; a < 3; ++a) {
    ijk[a] = std::clamp(ijk[a], 0.0, static_cast<double>(g.dims[a] - 1));
    const double fl = std::floor(ijk[a]);
    i0[a] = static_cast<std::size_t>(fl);
    i1[a] = std::min(i0[a] + 1, g.dims[a] - 1);
    f[a] = ijk[a] - fl;
  }
  Vec3 out{0, 0, 0};
  for (int c = 0; c < 8; ++c) {
    const std::size_t ii = (c & 1) ? i1[0] : i0[0], jj = (c & 2) ? i1[1] : i0[1], kk = (c & 4) ? i1[2] : i0[2];
    const double w = ((c & 1) ? f[0] : 1 - f[0]) * ((c & 2) ? f[1] : 1 - f[1]) * ((c & 4) ? f[2] : 1 - f[2]);
    if (w == 0.0) continue;
    const std::size_t idx = 3 * g.index(ii, jj, kk);
    for (std::size_t a = 0; a < 3; ++a) out[a] += w * t.field[idx + a];
  }
  return out;
}

} // namespace

Vec3 Transform::inverse_map(const Vec3 &p) const {
  if (kind == TransformKind::Deformable) return p + field_at(*this, p);
  return inverse(linear) * (p - center - translation) + center;
}

Transform rigid_inverse(const Transform &t) {
  if (t.kind != TransformKind::Rigid) fail("UnsupportedTransform", "parameter-space inverse needs a rigid transform");
  const Mat3 rt = t.linear.transposed();
  const Vec3 tt = rt * t.translation;
  return Transform::rigid(matrix_to_euler(rt), {-tt[0], -tt[1], -tt[2]}, t.center);
}

Transform rigid_compose(const Transform &a, const Transform &b) {
  if (a.kind != TransformKind::Rigid || b.kind != TransformKind::Rigid)
    fail("UnsupportedTransform", "rigid composition needs rigid transforms");
  if (a.center != b.center) fail("UnsupportedTransform", "rigid composition needs a shared center");
  const Mat3 r = a.linear * b.linear;
  return Transform::rigid(matrix_to_euler(r), a.linear * b.translation + a.translation, a.center);
}

namespace {

template <typename Fn> void for_each_voxel(const Geometry &target, Fn fn) {
  for (std::size_t k = 0; k < target.dims[2]; ++k) {
    check_cancelled();
    for (std::size_t j = 0; j < target.dims[1]; ++j)
      for (std::size_t i = 0; i < target.dims[0]; ++i)
        fn(i, j, k, target.index_to_physical({double(i), double(j), double(k)}));
  }
}

void check_transform(const Transform &t) {
  if (t.kind == TransformKind::Deformable) {
    if (t.field.size() != t.grid.voxel_count() * 3) fail("InvalidTransform", "displacement field size mismatch");
  } else {
    inverse(t.linear);
  }
}

} // namespace

ImageVolume apply_transform(const ImageVolume &moving, const Transform &t, const Geometry &target,
                            ops::Interpolation interp) {
  check_transform(t);
  ImageVolume out(target);
  out.meta = moving.meta;
  for_each_voxel(target, [&](std::size_t i, std::size_t j, std::size_t k, const Vec3 &p) {
    out.at(i, j, k) = ops::sample(moving, moving.geometry.physical_to_index(t.inverse_map(p)), interp, 0.0);
  });
  return out;
}

LabelMask apply_transform(const LabelMask &moving, const Transform &t, const Geometry &target) {
  check_transform(t);
  LabelMask out(target);
  out.names = moving.names;
  for_each_voxel(target, [&](std::size_t i, std::size_t j, std::size_t k, const Vec3 &p) {
    out.at(i, j, k) = ops::sample_label(moving, moving.geometry.physical_to_index(t.inverse_map(p)));
  });
  return out;
}

} // namespace voxflow::reg
