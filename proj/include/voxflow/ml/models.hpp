#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "voxflow/ml/preprocess.hpp"

namespace voxflow::ml {

enum class Task { Classification, Regression };

// Preprocessing chain plus estimator. Hyperparameters by algorithm:
//   logistic_regression: lambda (0.01), max_iter (1000)
//   knn: k (5)
//   decision_tree: max_depth (5)
//   random_forest: n_trees (50), max_depth (5)
//   ols; ridge: lambda (1)
struct PipelineSpec {
  std::optional<Impute> impute;
  std::optional<Scale> scale;
  std::optional<SelectSpec> select;
  std::optional<std::size_t> pca_components;
  std::string algorithm = "logistic_regression";
  std::map<std::string, double> hyper;

  Task task() const;
  double param(const std::string &key, double fallback) const;
  // Applies grid keys: "select.param", "pca.n_components", anything else is
  // an estimator hyperparameter.
  PipelineSpec with(const std::map<std::string, double> &params) const;
  void validate() const; // UnknownAlgorithm / ParamSchemaViolation

  friend bool operator==(const PipelineSpec &, const PipelineSpec &) = default;
};

// Hyperparameter names accepted by an algorithm (empty when unknown).
std::vector<std::string> hyperparameter_names(const std::string &algorithm);

// Algorithms named in the catalog but not implemented.
bool is_unavailable_algorithm(const std::string &name);

struct TreeNode {
  int feature = -1; // -1 marks a leaf
  double threshold = 0;
  int left = -1, right = -1;
  std::vector<double> dist; // class proportions at the node
  friend bool operator==(const TreeNode &, const TreeNode &) = default;
};
using Tree = std::vector<TreeNode>;

struct ModelArtifact {
  PipelineSpec spec;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_names;
  std::optional<ImputeState> impute;
  std::optional<ScaleState> scale;
  std::optional<SelectState> select;
  std::optional<PcaState> pca;

  std::vector<double> classes;              // classification labels, ascending
  std::vector<std::vector<double>> coef;    // logistic: one row per one-vs-rest model, intercept last
  std::vector<double> loss_history;         // logistic (last model trained)
  std::vector<double> beta;                 // linear regression
  double intercept = 0;
  Matrix train_x;                           // knn
  std::vector<double> train_y;              // knn
  std::vector<Tree> trees;                  // tree / forest

  friend bool operator==(const ModelArtifact &, const ModelArtifact &) = default;
};

// Fits preprocessing on X only, then the estimator.
// Errors: SingleClassTraining, DimensionMismatch, SingularDesign, ...
ModelArtifact fit_pipeline(const Matrix &x, const std::vector<double> &y, const PipelineSpec &spec, std::uint64_t seed);
Matrix transform_features(const ModelArtifact &m, const Matrix &x);

std::vector<double> predict(const ModelArtifact &m, const Matrix &x);
// Classification: n x classes matrix of scores (probabilities or vote shares).
Matrix predict_scores(const ModelArtifact &m, const Matrix &x);
// Binary classification: score of the positive class (label 1, else the
// larger label).
std::vector<double> positive_scores(const ModelArtifact &m, const Matrix &x);

// Mean logistic loss + L2 penalty for the given weights (intercept last).
double logistic_objective(const Matrix &x, const std::vector<double> &target01, const std::vector<double> &w,
                          double lambda);

} // namespace voxflow::ml
