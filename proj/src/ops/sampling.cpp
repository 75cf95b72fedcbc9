#include "voxflow/ops/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "voxflow/core/cancel.hpp"
#include "voxflow/core/error.hpp"

namespace voxflow::ops {

Interpolation interpolation_from_string(const std::string &name) {
  if (name == "nearest") return Interpolation::Nearest;
  if (name == "trilinear" || name == "linear") return Interpolation::Trilinear;
  fail("ParamSchemaViolation", "interpolation '" + name + "'");
}

const char *to_string(Interpolation i) { return i == Interpolation::Nearest ? "nearest" : "trilinear"; }

namespace {

double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < 1e-9 ? r : x;
}

bool inside_extent(const Index3 &dims, Vec3 &ijk) {
  for (std::size_t a = 0; a < 3; ++a) {
    ijk[a] = snap(ijk[a]);
    const double hi = static_cast<double>(dims[a]) - 0.5;
    if (ijk[a] < -0.5 || ijk[a] > hi) return false;
    ijk[a] = std::clamp(ijk[a], 0.0, static_cast<double>(dims[a] - 1));
  }
  return true;
}

} // namespace

double sample(const ImageVolume &v, const Vec3 &ijk_in, Interpolation interp, double outside) {
  Vec3 ijk = ijk_in;
  const Index3 &d = v.geometry.dims;
  if (!inside_extent(d, ijk)) return outside;
  if (interp == Interpolation::Nearest) {
    // halfway rounds up, consistently on every axis
    return v.at(static_cast<std::size_t>(std::floor(ijk[0] + 0.5)), static_cast<std::size_t>(std::floor(ijk[1] + 0.5)),
                static_cast<std::size_t>(std::floor(ijk[2] + 0.5)));
  }
  std::size_t i0[3], i1[3];
  double f[3];
  for (std::size_t a = 0; a < 3; ++a) {
    const double fl = std::floor(ijk[a]);
    i0[a] = static_cast<std::size_t>(fl);
    i1[a] = std::min(i0[a] + 1, d[a] - 1);
    f[a] = ijk[a] - fl;
  }
  auto lerp = [](double a, double b, double t) { return t == 0.0 ? a : (t == 1.0 ? b : a + t * (b - a)); };
  const double c00 = lerp(v.at(i0[0], i0[1], i0[2]), v.at(i1[0], i0[1], i0[2]), f[0]);
  const double c10 = lerp(v.at(i0[0], i1[1], i0[2]), v.at(i1[0], i1[1], i0[2]), f[0]);
  const double c01 = lerp(v.at(i0[0], i0[1], i1[2]), v.at(i1[0], i0[1], i1[2]), f[0]);
  const double c11 = lerp(v.at(i0[0], i1[1], i1[2]), v.at(i1[0], i1[1], i1[2]), f[0]);
  return lerp(lerp(c00, c10, f[1]), lerp(c01, c11, f[1]), f[2]);
}

std::uint32_t sample_label(const LabelMask &m, const Vec3 &ijk_in) {
  Vec3 ijk = ijk_in;
  if (!inside_extent(m.geometry.dims, ijk)) return 0;
  return m.at(static_cast<std::size_t>(std::floor(ijk[0] + 0.5)), static_cast<std::size_t>(std::floor(ijk[1] + 0.5)),
              static_cast<std::size_t>(std::floor(ijk[2] + 0.5)));
}

Geometry grid_with_spacing(const Geometry &g, const Vec3 &spacing) {
  Geometry out = g;
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(spacing[a] > 0) || !std::isfinite(spacing[a])) fail("DegenerateGrid", "target spacing must be positive");
    const double extent = static_cast<double>(g.dims[a]) * g.spacing[a];
    const double n = std::ceil(extent / spacing[a] - 1e-9);
    if (n < 1 || n > 1e5) fail("DegenerateGrid", "target spacing yields an unusable grid");
    out.dims[a] = static_cast<std::size_t>(n);
    out.spacing[a] = spacing[a];
  }
  // Keep the outer edge of voxel 0 in place.
  Vec3 shift{};
  for (std::size_t a = 0; a < 3; ++a) shift[a] = 0.5 * (spacing[a] - g.spacing[a]);
  out.origin = g.origin + g.direction * shift;
  return out;
}

namespace {

// Maps output voxel indices into input continuous indices:
// in = M * out + off.
struct IndexMap {
  Mat3 m;
  Vec3 off;
  IndexMap(const Geometry &from, const Geometry &to) {
    Mat3 s_to, s_from_inv;
    for (int a = 0; a < 3; ++a) {
      s_to(a, a) = to.spacing[static_cast<std::size_t>(a)];
      s_from_inv(a, a) = 1.0 / from.spacing[static_cast<std::size_t>(a)];
    }
    const Mat3 dt = from.direction.transposed();
    m = s_from_inv * (dt * (to.direction * s_to));
    off = s_from_inv * (dt * (to.origin - from.origin));
  }
  Vec3 operator()(std::size_t i, std::size_t j, std::size_t k) const {
    const Vec3 p{static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)};
    return m * p + off;
  }
};

} // namespace

ImageVolume resample(const ImageVolume &v, const ResampleSpec &spec) {
  if (spec.target_spacing.has_value() == spec.target_grid.has_value())
    fail("DegenerateGrid", "exactly one of target spacing and target grid must be set");
  const Geometry target = spec.target_grid ? *spec.target_grid : grid_with_spacing(v.geometry, *spec.target_spacing);
  try {
    target.validate();
  } catch (const Error &e) {
    fail("DegenerateGrid", e.what());
  }
  if (target == v.geometry) {
    ImageVolume copy = v;
    return copy;
  }
  ImageVolume out(target);
  out.meta = v.meta;
  const IndexMap map(v.geometry, target);
  for (std::size_t k = 0; k < target.dims[2]; ++k) {
    check_cancelled();
    for (std::size_t j = 0; j < target.dims[1]; ++j)
      for (std::size_t i = 0; i < target.dims[0]; ++i) {
        // resampling extrapolates by clamping to the border voxels
        Vec3 ijk = map(i, j, k);
        for (std::size_t a = 0; a < 3; ++a) ijk[a] = std::clamp(ijk[a], 0.0, static_cast<double>(v.geometry.dims[a] - 1));
        out.at(i, j, k) = sample(v, ijk, spec.interpolation);
      }
  }
  return out;
}

LabelMask resample_mask(const LabelMask &m, const Geometry &target) {
  target.validate();
  if (target == m.geometry) return m;
  LabelMask out(target);
  out.names = m.names;
  const IndexMap map(m.geometry, target);
  for (std::size_t k = 0; k < target.dims[2]; ++k)
    for (std::size_t j = 0; j < target.dims[1]; ++j)
      for (std::size_t i = 0; i < target.dims[0]; ++i) out.at(i, j, k) = sample_label(m, map(i, j, k));
  return out;
}

} // namespace voxflow::ops
