#include "voxflow/seg/segmentation.hpp"

#include <algorithm>

#include "voxflow/core/error.hpp"

namespace voxflow::seg {

SliceAxis slice_axis_from_string(const std::string &name) {
  if (name == "axial") return SliceAxis::Axial;
  if (name == "sagittal") return SliceAxis::Sagittal;
  if (name == "coronal") return SliceAxis::Coronal;
  fail("ParamSchemaViolation", "slice axis '" + name + "'");
}

const char *to_string(SliceAxis a) {
  switch (a) {
  case SliceAxis::Axial: return "axial";
  case SliceAxis::Sagittal: return "sagittal";
  case SliceAxis::Coronal: return "coronal";
  }
  return "?";
}

namespace {

// (u axis, v axis, slice axis)
std::array<std::size_t, 3> axes(SliceAxis a) {
  switch (a) {
  case SliceAxis::Axial: return {0, 1, 2};
  case SliceAxis::Sagittal: return {1, 2, 0};
  case SliceAxis::Coronal: return {0, 2, 1};
  }
  return {0, 1, 2};
}

void check_slice(const Geometry &g, SliceAxis axis, long s) {
  if (s < 0 || static_cast<std::size_t>(s) >= slice_count(g, axis))
    fail("SliceOutOfRange", std::string(to_string(axis)) + " slice " + std::to_string(s) + " outside the grid");
}

} // namespace

SliceShape slice_shape(const Geometry &g, SliceAxis axis) {
  const auto ax = axes(axis);
  return {g.dims[ax[0]], g.dims[ax[1]]};
}

std::size_t slice_count(const Geometry &g, SliceAxis axis) { return g.dims[axes(axis)[2]]; }

std::size_t slice_voxel(const Geometry &g, SliceAxis axis, std::size_t s, std::size_t u, std::size_t v) {
  const auto ax = axes(axis);
  std::size_t ijk[3];
  ijk[ax[0]] = u;
  ijk[ax[1]] = v;
  ijk[ax[2]] = s;
  return g.index(ijk[0], ijk[1], ijk[2]);
}

LabelMask threshold_segment(const ImageVolume &v, double lower, double upper, std::uint32_t label, bool allow_empty) {
  if (!(lower <= upper)) fail("ParamSchemaViolation", "threshold lower bound exceeds upper bound");
  if (label == 0) fail("ParamSchemaViolation", "label must be positive");
  LabelMask m(v.geometry);
  std::size_t count = 0;
  for (std::size_t i = 0; i < v.voxels.size(); ++i)
    if (v.voxels[i] >= lower && v.voxels[i] <= upper) {
      m.labels[i] = label;
      ++count;
    }
  if (count == 0 && !allow_empty) fail("EmptyResult", "threshold selected no voxels");
  if (count) m.names[label] = "label_" + std::to_string(label);
  return m;
}

LabelMask rasterize_polygons(const std::vector<PolygonRoi> &rois, const Geometry &grid) {
  grid.validate();
  LabelMask m(grid);
  for (const auto &roi : rois) {
    if (roi.label == 0) fail("ParamSchemaViolation", "polygon label must be positive");
    if (distinct_vertex_count(roi.vertices) < 3)
      fail("DegeneratePolygon", "polygon '" + roi.name + "' has fewer than 3 distinct vertices");
    check_slice(grid, roi.slice_axis, roi.slice_index);
    const SliceShape sh = slice_shape(grid, roi.slice_axis);
    const auto s = static_cast<std::size_t>(roi.slice_index);
    even_odd_fill({roi.vertices}, sh.width, sh.height, [&](std::size_t u, std::size_t v) {
      m.labels[slice_voxel(grid, roi.slice_axis, s, u, v)] = roi.label;
    });
    m.names[roi.label] = roi.name.empty() ? "label_" + std::to_string(roi.label) : roi.name;
  }
  // drop names of labels fully overwritten later
  const auto present = m.present_labels();
  for (auto it = m.names.begin(); it != m.names.end();)
    it = std::find(present.begin(), present.end(), it->first) == present.end() ? m.names.erase(it) : std::next(it);
  return m;
}

MaskOp mask_op_from_string(const std::string &name) {
  if (name == "union") return MaskOp::Union;
  if (name == "intersection") return MaskOp::Intersection;
  if (name == "difference") return MaskOp::Difference;
  fail("ParamSchemaViolation", "mask op '" + name + "'");
}

LabelMask mask_algebra(const LabelMask &a, const LabelMask &b, MaskOp op, std::uint32_t out_label) {
  if (!(a.geometry == b.geometry)) fail("GeometryMismatch", "mask algebra needs identical geometry");
  if (out_label == 0) fail("ParamSchemaViolation", "label must be positive");
  LabelMask out(a.geometry);
  bool any = false;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const bool x = a.labels[i] != 0, y = b.labels[i] != 0;
    bool r = false;
    switch (op) {
    case MaskOp::Union: r = x || y; break;
    case MaskOp::Intersection: r = x && y; break;
    case MaskOp::Difference: r = x && !y; break;
    }
    if (r) {
      out.labels[i] = out_label;
      any = true;
    }
  }
  if (any) out.names[out_label] = "label_" + std::to_string(out_label);
  return out;
}

EditMode edit_mode_from_string(const std::string &name) {
  if (name == "paint") return EditMode::Paint;
  if (name == "erase") return EditMode::Erase;
  fail("ParamSchemaViolation", "edit mode '" + name + "'");
}

LabelMask apply_mask_edit(const LabelMask &mask, SliceAxis axis, long slice_index, const Stencil &stencil,
                          EditMode mode, std::uint32_t label) {
  const SliceShape sh = slice_shape(mask.geometry, axis);
  if (stencil.width != sh.width || stencil.height != sh.height)
    fail("StencilDimMismatch", "stencil is " + std::to_string(stencil.width) + "x" + std::to_string(stencil.height) +
                                   ", slice is " + std::to_string(sh.width) + "x" + std::to_string(sh.height));
  check_slice(mask.geometry, axis, slice_index);
  if (mode == EditMode::Paint && label == 0) fail("ParamSchemaViolation", "paint label must be positive");
  const std::size_t area = sh.width * sh.height;
  LabelMask out = mask;
  const auto s = static_cast<std::size_t>(slice_index);
  const std::uint32_t value = mode == EditMode::Paint ? label : 0;
  for (const auto &[start, length] : stencil.runs) {
    if (start > area || length > area - start) fail("StencilDimMismatch", "stencil run exceeds the slice");
    for (std::size_t p = start; p < start + length; ++p)
      out.labels[slice_voxel(mask.geometry, axis, s, p % sh.width, p / sh.width)] = value;
  }
  if (mode == EditMode::Paint) out.names.emplace(label, "label_" + std::to_string(label));
  const auto present = out.present_labels();
  for (auto it = out.names.begin(); it != out.names.end();)
    it = std::find(present.begin(), present.end(), it->first) == present.end() ? out.names.erase(it) : std::next(it);
  return out;
}

} // namespace voxflow::seg
