#include "node_util.hpp"
#include "voxflow/core/error.hpp"
#include "voxflow/radiomics/features.hpp"

namespace voxflow::engine {

using namespace spec;

void register_radiomics_nodes(Catalog &c) {
  std::vector<std::string> families;
  for (auto f : radiomics::all_families()) families.push_back(radiomics::to_string(f));

  c.add({.name = "RadiomicFeatureGenerator",
         .category = "radiomics",
         .description = "Extracts morphology, intensity, histogram and texture (GLCM, GLRLM, GLSZM, NGTDM) features "
                        "per ROI into one table row each.",
         .inputs = {port("image", PortType::Image), port("mask", PortType::Mask)},
         .outputs = {port("features", PortType::Table)},
         .params = {strings("families", Json(families), families),
                    choice("bin_method", {"fbn", "fbs"}, "fbn", "fixed bin number or fixed bin size"),
                    number("bin_value", 32.0, 0, {}, true, "bin count (fbn) or width (fbs)"),
                    number("fbs_origin", nullptr, {}, {}, false, "fbs: lower edge of the first bin"),
                    number("resample_spacing", nullptr, 0, {}, true, "isotropic spacing in mm"),
                    number("reseg_low", nullptr), number("reseg_high", nullptr),
                    choice("roi_selection", {"per_label", "merge_labels", "largest_label"}, "per_label"),
                    choice("missing", {"emit_nan", "omit_row"}, "emit_nan"), text("patient_id", "")},
         .run = [](NodeContext &ctx) -> Outputs {
           radiomics::RoiExtractionConfig cfg;
           cfg.families.clear();
           for (const auto &f : ctx.strings("families")) cfg.families.insert(radiomics::family_from_string(f));
           cfg.discretization.method = ctx.str("bin_method") == "fbs" ? radiomics::BinMethod::Fbs : radiomics::BinMethod::Fbn;
           cfg.discretization.value = ctx.num("bin_value");
           if (ctx.has("fbs_origin")) cfg.discretization.fbs_origin = ctx.num("fbs_origin");
           if (ctx.has("resample_spacing")) cfg.resample_spacing = ctx.num("resample_spacing");
           if (ctx.has("reseg_low") != ctx.has("reseg_high"))
             fail("ParamSchemaViolation", "reseg_low and reseg_high must be given together");
           if (ctx.has("reseg_low")) cfg.resegment_range = std::pair{ctx.num("reseg_low"), ctx.num("reseg_high")};
           cfg.missing = ctx.str("missing") == "omit_row" ? radiomics::MissingPolicy::OmitRow
                                                          : radiomics::MissingPolicy::EmitNan;
           auto res = radiomics::extract_features(ctx.in<ImageVolume>("image"), ctx.in<LabelMask>("mask"), cfg,
                                                  radiomics::roi_selection_from_string(ctx.str("roi_selection")),
                                                  ctx.str("patient_id"));
           for (auto &d : res.diagnostics) ctx.warnings.push_back(std::move(d));
           return {{"features", std::move(res.table)}};
         }});
}

} // namespace voxflow::engine
