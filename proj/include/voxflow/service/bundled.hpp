#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "voxflow/engine/workflow.hpp"

namespace voxflow::service {

struct BundledWorkflow {
  std::string file; // name under workflows/
  engine::Workflow workflow;
};

// radiomics_e2e.json: phantom + RT-struct -> LoG -> radiomics -> merge
//   outcomes -> logistic regression, exporting features.csv and metrics.csv.
// cohort_pca_logistic.json: labelled cohort -> impute, z-score, PCA(3),
//   logistic regression with a stratified 60/20/20 split.
std::vector<BundledWorkflow> bundled_workflows();

// Writes the synthetic inputs and the bundled workflow documents into dir.
void write_demo(const std::filesystem::path &dir);

} // namespace voxflow::service
