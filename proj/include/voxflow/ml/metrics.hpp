#pragma once

#include <map>
#include <string>
#include <vector>

#include "voxflow/ml/matrix.hpp"
#include "voxflow/ml/models.hpp"

namespace voxflow::ml {

double accuracy(const std::vector<double> &y, const std::vector<double> &pred);
// Binary: positive class = label 1. Multiclass: macro average over the
// labels present in y or pred. Zero denominators give 0.
double precision(const std::vector<double> &y, const std::vector<double> &pred);
double recall(const std::vector<double> &y, const std::vector<double> &pred);
double f1(const std::vector<double> &y, const std::vector<double> &pred);
// Mann-Whitney with ties counted as 1/2; positive = label 1. UndefinedMetric
// when only one class is present.
double roc_auc(const std::vector<double> &y, const std::vector<double> &score);
double rmse(const std::vector<double> &y, const std::vector<double> &pred);
double mae(const std::vector<double> &y, const std::vector<double> &pred);
double r2(const std::vector<double> &y, const std::vector<double> &pred);
double silhouette(const Matrix &x, const std::vector<int> &labels);
double davies_bouldin(const Matrix &x, const std::vector<int> &labels);
double adjusted_rand_index(const std::vector<int> &a, const std::vector<int> &b);

enum class MetricTask { Classification, Regression, Clustering };
MetricTask metric_task(const std::string &metric); // UnknownMetric
bool lower_is_better(const std::string &metric);

// Evaluates a fitted model on (x, y); MetricTaskMismatch when a metric does
// not fit the model's task.
std::map<std::string, double> evaluate(const ModelArtifact &m, const Matrix &x, const std::vector<double> &y,
                                       const std::vector<std::string> &metrics);
std::map<std::string, double> evaluate_clustering(const Matrix &x, const std::vector<int> &labels,
                                                  const std::vector<std::string> &metrics);

} // namespace voxflow::ml
