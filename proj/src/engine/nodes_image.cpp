#include <cmath>

#include "node_util.hpp"
#include "voxflow/core/error.hpp"
#include "voxflow/ops/filters.hpp"
#include "voxflow/ops/sampling.hpp"
#include "voxflow/reg/fusion.hpp"
#include "voxflow/reg/registration.hpp"
#include "voxflow/seg/segmentation.hpp"

namespace voxflow::engine {

using namespace spec;

namespace {

const std::vector<std::string> kBoundaries{"mirror", "nearest", "zero", "periodic"};
const std::vector<std::string> kAxes{"axial", "sagittal", "coronal"};

ImageVolume run_filter(const NodeContext &ctx) {
  const auto &img = ctx.in<ImageVolume>("image");
  const auto method = ctx.str("method");
  const auto boundary = ops::boundary_from_string(ctx.str("boundary"));
  if (method == "mean") return ops::mean_filter(img, int(ctx.integer("size")), boundary);
  if (method == "log") return ops::log_filter(img, ctx.num("sigma_mm"), ctx.num("truncation"), boundary);
  if (method == "laws") {
    ops::LawsParams p;
    p.kernel = ctx.str("laws_kernel");
    p.energy = ctx.flag("laws_energy");
    p.delta = int(ctx.integer("laws_delta"));
    p.rot_invariant = ctx.flag("rot_invariant");
    p.boundary = boundary;
    return ops::laws_filter(img, p);
  }
  if (method == "gabor") {
    ops::GaborParams p;
    p.sigma_mm = ctx.num("sigma_mm");
    p.lambda_mm = ctx.num("lambda_mm");
    p.gamma = ctx.num("gamma");
    p.theta = ctx.num("theta");
    p.theta_step = ctx.num("theta_step");
    p.boundary = boundary;
    return ops::gabor_filter(img, p);
  }
  return ops::wavelet_decompose(img, ops::wavelet_family_from_string(ctx.str("wavelet")), ctx.str("subband"), boundary);
}

ParamSpec filter_method() {
  auto p = choice("method", {"mean", "log", "laws", "gabor", "wavelet"}, "mean");
  p.unsupported = {{"riesz", "Riesz transforms are not implemented"},
                   {"nonseparable_wavelet", "only separable wavelets (haar, db2) are implemented"},
                   {"simoncelli", "only separable wavelets (haar, db2) are implemented"}};
  return p;
}

} // namespace

void register_image_nodes(Catalog &c) {
  c.add({.name = "Filter",
         .category = "filtering",
         .description = "Convolution filters: mean, Laplacian of Gaussian, Laws, Gabor, single-level separable wavelet.",
         .inputs = {port("image", PortType::Image)},
         .outputs = {port("image", PortType::Image)},
         .params = {filter_method(),
                    integer("size", 3, 1, {}, "mean: odd support width in voxels"),
                    number("sigma_mm", 1.0, 0, {}, true, "log / gabor"),
                    number("truncation", 4.0, 0, {}, true, "log: kernel radius in sigmas"),
                    text("laws_kernel", "L5E5S5"), boolean("laws_energy", false), integer("laws_delta", 7, 0),
                    boolean("rot_invariant", false), number("lambda_mm", 4.0, 0, {}, true), number("gamma", 1.0, 0, {}, true),
                    number("theta", 0.0), number("theta_step", 0.0, 0), choice("wavelet", {"haar", "db2"}, "haar"),
                    text("subband", "LLL"), choice("boundary", kBoundaries, "mirror")},
         .run = [](NodeContext &ctx) -> Outputs { return {{"image", run_filter(ctx)}}; }});

  c.add({.name = "Resample",
         .category = "filtering",
         .description = "Resamples onto a grid with the given spacing, keeping the physical extent centred.",
         .inputs = {port("image", PortType::Image)},
         .outputs = {port("image", PortType::Image)},
         .params = {numbers("spacing", Json::array({1.0, 1.0, 1.0}), 0),
                    choice("interpolation", {"nearest", "trilinear"}, "trilinear")},
         .run = [](NodeContext &ctx) -> Outputs {
           const auto s = ctx.numbers("spacing");
           if (s.size() != 3) fail("ParamSchemaViolation", "spacing needs three values");
           for (double v : s)
             if (!(v > 0)) fail("ParamSchemaViolation", "spacing must be positive");
           ops::ResampleSpec spec;
           spec.target_spacing = Vec3{s[0], s[1], s[2]};
           spec.interpolation = ops::interpolation_from_string(ctx.str("interpolation"));
           return {{"image", ops::resample(ctx.in<ImageVolume>("image"), spec)}};
         }});

  c.add({.name = "Registration",
         .category = "registration",
         .description = "Rigid / affine (multi-resolution Nelder-Mead) or deformable (demons) registration of moving onto fixed.",
         .inputs = {port("fixed", PortType::Image), port("moving", PortType::Image)},
         .outputs = {port("transform", PortType::Transform), port("registered", PortType::Image)},
         .params = {choice("kind", {"rigid", "affine", "deformable"}, "rigid"), choice("metric", {"msd", "mi"}, "msd"),
                    integer("pyramid_levels", 3, 1, 6), integer("max_iterations", 200, 1), integer("mi_bins", 32, 8, 256),
                    number("convergence_tol", 1e-4, 0, {}, true), integer("demons_iterations", 50, 1)},
         .run = [](NodeContext &ctx) -> Outputs {
           reg::RegistrationConfig cfg;
           cfg.metric = reg::metric_from_string(ctx.str("metric"));
           cfg.pyramid_levels = int(ctx.integer("pyramid_levels"));
           cfg.max_iterations = int(ctx.integer("max_iterations"));
           cfg.mi_bins = int(ctx.integer("mi_bins"));
           cfg.convergence_tol = ctx.num("convergence_tol");
           cfg.demons_iterations = int(ctx.integer("demons_iterations"));
           const auto &fixed = ctx.in<ImageVolume>("fixed");
           const auto &moving = ctx.in<ImageVolume>("moving");
           auto r = reg::register_images(fixed, moving, reg::transform_kind_from_string(ctx.str("kind")), cfg);
           auto registered = reg::apply_transform(moving, r.transform, fixed.geometry, ops::Interpolation::Trilinear);
           return {{"transform", std::move(r.transform)}, {"registered", std::move(registered)}};
         }});

  c.add({.name = "ApplyTransform",
         .category = "registration",
         .description = "Resamples an image through a transform onto the reference grid.",
         .inputs = {port("image", PortType::Image), port("transform", PortType::Transform),
                    port("reference", PortType::Image)},
         .outputs = {port("image", PortType::Image)},
         .params = {choice("interpolation", {"nearest", "trilinear"}, "trilinear")},
         .run = [](NodeContext &ctx) -> Outputs {
           return {{"image", reg::apply_transform(ctx.in<ImageVolume>("image"), ctx.in<reg::Transform>("transform"),
                                                  ctx.in<ImageVolume>("reference").geometry,
                                                  ops::interpolation_from_string(ctx.str("interpolation")))}};
         }});

  c.add({.name = "ApplyTransformMask",
         .category = "registration",
         .description = "Carries a label mask through a transform (nearest neighbour).",
         .inputs = {port("mask", PortType::Mask), port("transform", PortType::Transform),
                    port("reference", PortType::Image)},
         .outputs = {port("mask", PortType::Mask)},
         .run = [](NodeContext &ctx) -> Outputs {
           return {{"mask", reg::apply_transform(ctx.in<LabelMask>("mask"), ctx.in<reg::Transform>("transform"),
                                                 ctx.in<ImageVolume>("reference").geometry)}};
         }});

  c.add({.name = "Fusion",
         .category = "fusion",
         .description = "Fuses two images on the first image's grid: weighted, wavelet (max-abs detail) or PCA weights.",
         .inputs = {port("a", PortType::Image), port("b", PortType::Image)},
         .outputs = {port("image", PortType::Image)},
         .params = {choice("method", {"weighted", "wavelet", "pca"}, "weighted"), number("w1", 0.5, 0),
                    number("w2", 0.5, 0), choice("normalization", {"zscore", "minmax"}, "zscore"),
                    choice("interpolation", {"nearest", "trilinear"}, "trilinear")},
         .run = [](NodeContext &ctx) -> Outputs {
           reg::FusionConfig cfg;
           cfg.w1 = ctx.num("w1");
           cfg.w2 = ctx.num("w2");
           cfg.normalization = reg::normalization_from_string(ctx.str("normalization"));
           cfg.interpolation = ops::interpolation_from_string(ctx.str("interpolation"));
           const auto &a = ctx.in<ImageVolume>("a");
           const auto &b = ctx.in<ImageVolume>("b");
           const auto m = ctx.str("method");
           return {{"image", m == "weighted" ? reg::fuse_weighted(a, b, cfg)
                             : m == "wavelet" ? reg::fuse_wavelet(a, b, cfg)
                                              : reg::fuse_pca(a, b, cfg)}};
         }});

  c.add({.name = "ThresholdSegmentation",
         .category = "segmentation",
         .description = "Labels voxels with lower <= value <= upper. An empty result is reported as a warning.",
         .inputs = {port("image", PortType::Image)},
         .outputs = {port("mask", PortType::Mask)},
         .params = {number("lower", 0.0), number("upper", 1.0), integer("label", 1, 1),
                    boolean("allow_empty", false, "suppress the empty-result warning")},
         .run = [](NodeContext &ctx) -> Outputs {
           auto m = seg::threshold_segment(ctx.in<ImageVolume>("image"), ctx.num("lower"), ctx.num("upper"),
                                           std::uint32_t(ctx.integer("label")), true);
           if (m.present_labels().empty() && !ctx.flag("allow_empty"))
             ctx.warnings.push_back("EmptyResult: no voxel lies inside the threshold window");
           return {{"mask", std::move(m)}};
         }});

  c.add({.name = "PolygonSegmentation",
         .category = "segmentation",
         .description = "Fills one polygon (continuous voxel coordinates, even-odd rule) on a slice of the image grid.",
         .inputs = {port("image", PortType::Image)},
         .outputs = {port("mask", PortType::Mask)},
         .params = {choice("axis", kAxes, "axial"), integer("slice", 0, 0),
                    numbers("vertices", Json::array(), {}, "flattened u, v pairs"), integer("label", 1, 1),
                    text("name", "roi")},
         .run = [](NodeContext &ctx) -> Outputs {
           const auto v = ctx.numbers("vertices");
           if (v.size() < 6 || v.size() % 2) fail("ParamSchemaViolation", "vertices needs at least three u, v pairs");
           seg::PolygonRoi roi;
           roi.slice_axis = seg::slice_axis_from_string(ctx.str("axis"));
           roi.slice_index = ctx.integer("slice");
           for (std::size_t i = 0; i < v.size(); i += 2) roi.vertices.push_back({v[i], v[i + 1]});
           roi.label = std::uint32_t(ctx.integer("label"));
           roi.name = ctx.str("name");
           return {{"mask", seg::rasterize_polygons({roi}, ctx.in<ImageVolume>("image").geometry)}};
         }});

  c.add({.name = "MaskAlgebra",
         .category = "segmentation",
         .description = "Union, intersection or difference of two masks on the same grid.",
         .inputs = {port("a", PortType::Mask), port("b", PortType::Mask)},
         .outputs = {port("mask", PortType::Mask)},
         .params = {choice("op", {"union", "intersection", "difference"}, "union"), integer("label", 1, 1)},
         .run = [](NodeContext &ctx) -> Outputs {
           return {{"mask", seg::mask_algebra(ctx.in<LabelMask>("a"), ctx.in<LabelMask>("b"),
                                              seg::mask_op_from_string(ctx.str("op")), std::uint32_t(ctx.integer("label")))}};
         }});

  c.add({.name = "MaskEdit",
         .category = "segmentation",
         .description = "Applies a run-length brush or eraser stencil to one slice.",
         .inputs = {port("mask", PortType::Mask)},
         .outputs = {port("mask", PortType::Mask)},
         .params = {choice("axis", kAxes, "axial"), integer("slice", 0, 0), integer("width", 1, 1), integer("height", 1, 1),
                    numbers("runs", Json::array(), 0, "flattened start, length pairs over v * width + u"),
                    choice("mode", {"paint", "erase"}, "paint"), integer("label", 1, 1)},
         .run = [](NodeContext &ctx) -> Outputs {
           const auto r = ctx.numbers("runs");
           if (r.size() % 2) fail("ParamSchemaViolation", "runs needs start, length pairs");
           seg::Stencil s;
           s.width = std::size_t(ctx.integer("width"));
           s.height = std::size_t(ctx.integer("height"));
           for (std::size_t i = 0; i < r.size(); i += 2) {
             if (r[i] != std::floor(r[i]) || r[i + 1] != std::floor(r[i + 1]))
               fail("ParamSchemaViolation", "runs must be integers");
             s.runs.push_back({std::size_t(r[i]), std::size_t(r[i + 1])});
           }
           return {{"mask", seg::apply_mask_edit(ctx.in<LabelMask>("mask"), seg::slice_axis_from_string(ctx.str("axis")),
                                                 ctx.integer("slice"), s, seg::edit_mode_from_string(ctx.str("mode")),
                                                 std::uint32_t(ctx.integer("label")))}};
         }});
}

} // namespace voxflow::engine
