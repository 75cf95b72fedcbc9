#pragma once

#include <array>
#include <string>
#include <vector>

#include "voxflow/core/image.hpp"
#include "voxflow/ops/sampling.hpp"

namespace voxflow::reg {

enum class TransformKind { Rigid, Affine, Deformable };
TransformKind transform_kind_from_string(const std::string &name);
const char *to_string(TransformKind k);

// Spatial transform mapping moving-image points to fixed-image points.
// Images are resampled by pulling: out(p) = moving(T^-1(p)).
//
// Rigid:  T(x) = R (x - c) + c + t, R = Rz * Ry * Rx, angles in radians.
// Affine: T(x) = A (x - c) + c + t.
// Deformable: dense field D on `grid` (mm, three values per voxel) with
//   T^-1(p) = p + D(p), trilinearly interpolated between grid points.
struct Transform {
  TransformKind kind = TransformKind::Rigid;
  std::array<double, 3> angles{0, 0, 0};
  Mat3 linear{};
  Vec3 translation{0, 0, 0};
  Vec3 center{0, 0, 0};
  Geometry grid;
  std::vector<double> field;

  static Transform rigid(const Vec3 &angles, const Vec3 &t, const Vec3 &center);
  static Transform affine(const Mat3 &a, const Vec3 &t, const Vec3 &center);
  static Transform identity_field(const Geometry &grid);

  Vec3 forward(const Vec3 &x) const;  // rigid/affine only
  Vec3 inverse_map(const Vec3 &p) const;

  friend bool operator==(const Transform &, const Transform &) = default;
};

Mat3 euler_to_matrix(const Vec3 &angles);
Vec3 matrix_to_euler(const Mat3 &r);

// Parameter-space inverse and composition of rigid transforms sharing a
// center: compose(a, b) = a after b.
Transform rigid_inverse(const Transform &t);
Transform rigid_compose(const Transform &a, const Transform &b);

ImageVolume apply_transform(const ImageVolume &moving, const Transform &t, const Geometry &target,
                            ops::Interpolation interp);
// Masks are always pulled with nearest-neighbour sampling.
LabelMask apply_transform(const LabelMask &moving, const Transform &t, const Geometry &target);

} // namespace voxflow::reg
