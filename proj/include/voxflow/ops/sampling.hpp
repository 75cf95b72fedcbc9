#pragma once

#include <optional>
#include <string>

#include "voxflow/core/image.hpp"

namespace voxflow::ops {

enum class Interpolation { Nearest, Trilinear };
Interpolation interpolation_from_string(const std::string &name);
const char *to_string(Interpolation i);

// Samples at a continuous voxel index. Points farther than half a voxel
// outside the grid return `outside`; points inside that margin clamp to
// the border. Coordinates within 1e-9 of an integer are snapped so that
// sampling on the native lattice is exact.
double sample(const ImageVolume &v, const Vec3 &ijk, Interpolation interp, double outside = 0.0);
std::uint32_t sample_label(const LabelMask &m, const Vec3 &ijk);

struct ResampleSpec {
  std::optional<Vec3> target_spacing;
  std::optional<Geometry> target_grid;
  Interpolation interpolation = Interpolation::Trilinear;
};

// Grid with the requested spacing covering the same physical extent
// (voxel edges) as `g`, same direction, first voxel edge aligned.
Geometry grid_with_spacing(const Geometry &g, const Vec3 &spacing);

// Output voxels beyond the input grid take the nearest border value.
ImageVolume resample(const ImageVolume &v, const ResampleSpec &spec);
LabelMask resample_mask(const LabelMask &m, const Geometry &target);

} // namespace voxflow::ops
