#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "voxflow/ml/metrics.hpp"

namespace voxflow::ml {

struct SplitIndices {
  std::vector<std::size_t> train, validation, test; // each ascending
};

// Seeded shuffle then partition; validation/test take floor(n * ratio),
// the remainder goes to train. Stratified mode does this per class
// (ascending label order). Errors: ParamSchemaViolation, ClassTooSmall.
SplitIndices split_indices(std::size_t n, std::array<double, 3> ratios, std::uint64_t seed,
                           const std::optional<std::vector<double>> &stratify = std::nullopt);

// Fold id per sample; classes are shuffled and dealt round-robin.
std::vector<std::size_t> stratified_folds(const std::vector<double> &y, std::size_t folds, std::uint64_t seed);

struct GridSearchReport {
  std::vector<std::map<std::string, double>> candidates; // canonical order
  std::vector<std::vector<double>> fold_scores;          // candidate x fold
  std::vector<double> mean_scores;
  std::size_t best = 0;
  ModelArtifact model; // best candidate refitted on all rows
  Table table() const; // candidate, params..., fold_1.., mean
};

// Cartesian product of the grid, keys in ascending order with the last key
// varying fastest.
std::vector<std::map<std::string, double>> expand_grid(const std::map<std::string, std::vector<double>> &grid);

GridSearchReport grid_search(const Matrix &x, const std::vector<double> &y, const PipelineSpec &spec,
                             const std::map<std::string, std::vector<double>> &grid, std::size_t folds,
                             const std::string &metric, std::uint64_t seed);

} // namespace voxflow::ml
