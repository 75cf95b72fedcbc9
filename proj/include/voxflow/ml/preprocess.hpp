#pragma once

#include <optional>
#include <string>

#include "voxflow/ml/matrix.hpp"

namespace voxflow::ml {

enum class Impute { Mean, Median, Mode };
Impute impute_from_string(const std::string &s);
const char *to_string(Impute i);

struct ImputeState {
  Impute strategy = Impute::Mean;
  std::vector<double> fill;
  friend bool operator==(const ImputeState &, const ImputeState &) = default;
};
ImputeState impute_fit(const Matrix &m, Impute strategy); // AllMissingColumn
Matrix impute_apply(const ImputeState &s, const Matrix &m);

enum class Scale { ZScore, MinMax };
Scale scale_from_string(const std::string &s);
const char *to_string(Scale s);

// zscore: offset = mean, factor = population sd; minmax: offset = min,
// factor = max - min. Zero factors map the column to 0.
struct ScaleState {
  Scale method = Scale::ZScore;
  std::vector<double> offset, factor;
  friend bool operator==(const ScaleState &, const ScaleState &) = default;
};
ScaleState scale_fit(const Matrix &m, Scale method);
Matrix scale_apply(const ScaleState &s, const Matrix &m);

enum class Select { VarianceThreshold, AnovaTopK, CorrelationFilter };
Select select_from_string(const std::string &s);
const char *to_string(Select s);

struct SelectSpec {
  Select method = Select::VarianceThreshold;
  double param = 0.0; // threshold t, k, or |r| limit
  friend bool operator==(const SelectSpec &, const SelectSpec &) = default;
};
struct SelectState {
  std::vector<std::size_t> keep; // ascending column indices
  friend bool operator==(const SelectState &, const SelectState &) = default;
};
SelectState select_fit(const Matrix &m, const std::vector<double> &y, const SelectSpec &spec);
Matrix select_apply(const SelectState &s, const Matrix &m);

// One-way ANOVA F statistic of each column grouped by y.
std::vector<double> anova_f(const Matrix &m, const std::vector<double> &y);

struct PcaState {
  std::vector<double> mean;
  Matrix components; // n_components x p, orthonormal rows
  std::vector<double> eigenvalues; // sample covariance, descending
  std::vector<double> explained_ratio;
  friend bool operator==(const PcaState &, const PcaState &) = default;
};
PcaState pca_fit(const Matrix &m, std::size_t n_components); // ComponentCountTooLarge
Matrix pca_transform(const PcaState &s, const Matrix &m);
Matrix pca_inverse(const PcaState &s, const Matrix &scores);

} // namespace voxflow::ml
