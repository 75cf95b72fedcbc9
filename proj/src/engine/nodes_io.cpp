#include <algorithm>

#include "node_util.hpp"
#include "voxflow/core/error.hpp"
#include "voxflow/io/dicom.hpp"
#include "voxflow/io/image_io.hpp"
#include "voxflow/io/table_io.hpp"

namespace voxflow::engine {

using namespace spec;

namespace {

io::ImageFormat image_format(const NodeContext &ctx) {
  const auto f = ctx.str("format");
  return f == "auto" ? io::image_format_from_path(ctx.input_path("path")) : io::image_format_from_string(f);
}

FilePath written(const NodeContext &ctx) { return FilePath{ctx.str("path")}; }

} // namespace

void register_io_nodes(Catalog &c) {
  c.add({.name = "ImageReader",
         .category = "io",
         .description = "Reads a NIfTI (.nii, .nii.gz) or NRRD (.nrrd, .nhdr) volume.",
         .outputs = {port("image", PortType::Image)},
         .params = {path("path"), choice("format", {"auto", "nifti", "nrrd"}, "auto")},
         .path_params = {"path"},
         .run = [](NodeContext &ctx) -> Outputs {
           return {{"image", io::read_image(ctx.input_path("path"), image_format(ctx))}};
         }});

  c.add({.name = "MaskReader",
         .category = "io",
         .description = "Reads a label volume; voxel values become integer labels.",
         .outputs = {port("mask", PortType::Mask)},
         .params = {path("path"), choice("format", {"auto", "nifti", "nrrd"}, "auto")},
         .path_params = {"path"},
         .run = [](NodeContext &ctx) -> Outputs {
           return {{"mask", io::read_mask(ctx.input_path("path"), image_format(ctx))}};
         }});

  c.add({.name = "DicomSeriesReader",
         .category = "io",
         .description = "Assembles a DICOM image series from a directory; series are ordered by patient and series UID.",
         .outputs = {port("image", PortType::Image)},
         .params = {path("path", "directory of slice files"), integer("series", 0, 0)},
         .path_params = {"path"},
         .run = [](NodeContext &ctx) -> Outputs {
           auto series = io::read_dicom_series({ctx.input_path("path")});
           const auto k = std::size_t(ctx.integer("series"));
           if (k >= series.size())
             fail("SeriesNotFound", "series " + std::to_string(k) + " requested, " + std::to_string(series.size()) + " found");
           return {{"image", std::move(series[k])}};
         }});

  c.add({.name = "RTStructReader",
         .category = "io",
         .description = "Rasterizes an RT structure set onto the reference image grid (even-odd rule per contour plane).",
         .inputs = {port("reference", PortType::Image)},
         .outputs = {port("mask", PortType::Mask)},
         .params = {path("path")},
         .path_params = {"path"},
         .run = [](NodeContext &ctx) -> Outputs {
           return {{"mask", io::read_rtstruct(ctx.input_path("path"), ctx.in<ImageVolume>("reference"))}};
         }});

  c.add({.name = "TableReader",
         .category = "io",
         .description = "Reads a CSV or TSV table; numeric columns are inferred.",
         .outputs = {port("table", PortType::Table)},
         .params = {path("path"), choice("format", {"csv", "tsv"}, "csv")},
         .path_params = {"path"},
         .run = [](NodeContext &ctx) -> Outputs {
           return {{"table", io::read_table(ctx.input_path("path"), io::table_format_from_string(ctx.str("format")))}};
         }});

  c.add({.name = "ImageWriter",
         .category = "io",
         .description = "Writes an image to the output directory.",
         .inputs = {port("image", PortType::Image)},
         .outputs = {port("file", PortType::FilePath)},
         .params = {path("path"), choice("format", {"nifti", "nrrd"}, "nifti"), boolean("gzip", false)},
         .side_effect = true,
         .run = [](NodeContext &ctx) -> Outputs {
           io::write_image(ctx.in<ImageVolume>("image"), io::image_format_from_string(ctx.str("format")),
                           ctx.output_path("path"), ctx.flag("gzip"));
           return {{"file", written(ctx)}};
         }});

  c.add({.name = "MaskWriter",
         .category = "io",
         .description = "Writes a label mask to the output directory.",
         .inputs = {port("mask", PortType::Mask)},
         .outputs = {port("file", PortType::FilePath)},
         .params = {path("path"), choice("format", {"nifti", "nrrd"}, "nifti"), boolean("gzip", false)},
         .side_effect = true,
         .run = [](NodeContext &ctx) -> Outputs {
           io::write_mask(ctx.in<LabelMask>("mask"), io::image_format_from_string(ctx.str("format")),
                          ctx.output_path("path"), ctx.flag("gzip"));
           return {{"file", written(ctx)}};
         }});

  c.add({.name = "TableWriter",
         .category = "io",
         .description = "Writes a table as CSV or TSV to the output directory.",
         .inputs = {port("table", PortType::Table)},
         .outputs = {port("file", PortType::FilePath)},
         .params = {path("path"), choice("format", {"csv", "tsv"}, "csv")},
         .side_effect = true,
         .run = [](NodeContext &ctx) -> Outputs {
           io::write_table(ctx.in<Table>("table"), ctx.output_path("path"), io::table_format_from_string(ctx.str("format")));
           return {{"file", written(ctx)}};
         }});
}

} // namespace voxflow::engine
