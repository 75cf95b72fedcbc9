#include "voxflow/service/bundled.hpp"

#include "voxflow/fixtures/phantom.hpp"
#include "voxflow/io/bytes.hpp"

namespace voxflow::service {

using namespace engine;

namespace {

Workflow radiomics_e2e() {
  Workflow w;
  w.name = "radiomics_e2e";
  w.seed = 20240601;
  add_node(w, "ImageReader", {{"path", "phantom.nii.gz"}}, {0, 0});
  add_node(w, "RTStructReader", {{"path", "rtstruct.dcm"}}, {240, 160});
  add_node(w, "Filter", {{"method", "log"}, {"sigma_mm", 1.0}}, {240, 0});
  add_node(w, "RadiomicFeatureGenerator", {{"bin_method", "fbn"}, {"bin_value", 16}, {"patient_id", "phantom"}}, {480, 80});
  add_node(w, "TableReader", {{"path", "outcomes.csv"}}, {480, 240});
  add_node(w, "TableMerge", {{"mode", "columns"}, {"key", "roi"}}, {720, 160});
  add_node(w, "Classifier",
           {{"target", "outcome"},
            {"exclude", {"label"}},
            {"algorithm", "logistic_regression"},
            {"hyperparameters", {"lambda=0.1"}},
            {"split", {0.6, 0.2, 0.2}}},
           {960, 160});
  add_node(w, "TableWriter", {{"path", "out/features.csv"}}, {720, 0});
  add_node(w, "TableWriter", {{"path", "out/metrics.csv"}}, {1200, 160});
  connect(w, {"n1", "image"}, {"n2", "reference"});
  connect(w, {"n1", "image"}, {"n3", "image"});
  connect(w, {"n3", "image"}, {"n4", "image"});
  connect(w, {"n2", "mask"}, {"n4", "mask"});
  connect(w, {"n4", "features"}, {"n6", "left"});
  connect(w, {"n5", "table"}, {"n6", "right"});
  connect(w, {"n6", "table"}, {"n7", "table"});
  connect(w, {"n4", "features"}, {"n8", "table"});
  connect(w, {"n7", "metrics"}, {"n9", "table"});
  return w;
}

Workflow cohort_pca_logistic() {
  Workflow w;
  w.name = "cohort_pca_logistic";
  w.seed = 7;
  add_node(w, "TableReader", {{"path", "cohort.csv"}}, {0, 0});
  add_node(w, "Classifier",
           {{"target", "outcome"},
            {"exclude", Json::array()},
            {"algorithm", "logistic_regression"},
            {"hyperparameters", {"lambda=0.01"}},
            {"impute", "mean"},
            {"scale", "zscore"},
            {"pca_components", 3},
            {"split", {0.6, 0.2, 0.2}},
            {"stratify", true}},
           {240, 0});
  add_node(w, "TableWriter", {{"path", "out/cohort_metrics.csv"}}, {480, 0});
  connect(w, {"n1", "table"}, {"n2", "table"});
  connect(w, {"n2", "metrics"}, {"n3", "table"});
  return w;
}

} // namespace

std::vector<BundledWorkflow> bundled_workflows() {
  return {{"radiomics_e2e.json", radiomics_e2e()}, {"cohort_pca_logistic.json", cohort_pca_logistic()}};
}

void write_demo(const std::filesystem::path &dir) {
  fixtures::write_demo_inputs(dir);
  for (const auto &b : bundled_workflows()) io::write_file(dir / b.file, serialize(b.workflow));
}

} // namespace voxflow::service
