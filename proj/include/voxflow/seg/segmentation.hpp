#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voxflow/core/image.hpp"
#include "voxflow/core/polygon.hpp"

namespace voxflow::seg {

// Slice planes. Axial slices fix k and hold (i, j); sagittal fix i and hold
// (j, k); coronal fix j and hold (i, k).
enum class SliceAxis { Axial, Sagittal, Coronal };
SliceAxis slice_axis_from_string(const std::string &name);
const char *to_string(SliceAxis a);

struct SliceShape {
  std::size_t width = 0;  // first in-plane axis
  std::size_t height = 0; // second in-plane axis
};
SliceShape slice_shape(const Geometry &g, SliceAxis axis);
std::size_t slice_count(const Geometry &g, SliceAxis axis);
// Flat voxel index of in-plane (u, v) on slice `s`.
std::size_t slice_voxel(const Geometry &g, SliceAxis axis, std::size_t s, std::size_t u, std::size_t v);

// Labels voxels with lower <= value <= upper. Throws EmptyResult when nothing
// is selected unless `allow_empty`.
LabelMask threshold_segment(const ImageVolume &v, double lower, double upper, std::uint32_t label,
                            bool allow_empty = false);

struct PolygonRoi {
  SliceAxis slice_axis = SliceAxis::Axial;
  long slice_index = 0;
  Polygon2 vertices; // continuous voxel coordinates in the slice plane
  std::uint32_t label = 1;
  std::string name;
};

// Even-odd containment of voxel centres; later ROIs overwrite earlier ones.
LabelMask rasterize_polygons(const std::vector<PolygonRoi> &rois, const Geometry &grid);

enum class MaskOp { Union, Intersection, Difference };
MaskOp mask_op_from_string(const std::string &name);
LabelMask mask_algebra(const LabelMask &a, const LabelMask &b, MaskOp op, std::uint32_t out_label = 1);

// Binary slice stencil: (start, length) runs over row-major (v * width + u).
struct Stencil {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::pair<std::size_t, std::size_t>> runs;
};

enum class EditMode { Paint, Erase };
EditMode edit_mode_from_string(const std::string &name);

LabelMask apply_mask_edit(const LabelMask &mask, SliceAxis axis, long slice_index, const Stencil &stencil,
                          EditMode mode, std::uint32_t label = 1);

} // namespace voxflow::seg
