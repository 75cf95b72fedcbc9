#include "voxflow/ml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "voxflow/core/error.hpp"

namespace voxflow::ml {

namespace {

void same_length(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.size() != b.size()) fail("DimensionMismatch", "label and prediction counts differ");
  if (a.empty()) fail("EmptyInput", "metric over zero samples");
}

bool is_binary(const std::vector<double> &y, const std::vector<double> &pred) {
  for (double v : y)
    if (v != 0 && v != 1) return false;
  for (double v : pred)
    if (v != 0 && v != 1) return false;
  return true;
}

struct Counts {
  double tp = 0, fp = 0, fn = 0;
};

Counts counts_for(const std::vector<double> &y, const std::vector<double> &pred, double label) {
  Counts c;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (pred[i] == label && y[i] == label) c.tp += 1;
    else if (pred[i] == label) c.fp += 1;
    else if (y[i] == label) c.fn += 1;
  }
  return c;
}

double ratio(double a, double b) { return b > 0 ? a / b : 0.0; }

template <typename F> double averaged(const std::vector<double> &y, const std::vector<double> &pred, F f) {
  same_length(y, pred);
  if (is_binary(y, pred)) return f(counts_for(y, pred, 1.0));
  std::set<double> labels(y.begin(), y.end());
  labels.insert(pred.begin(), pred.end());
  double s = 0;
  for (double l : labels) s += f(counts_for(y, pred, l));
  return s / double(labels.size());
}

double f1_of(const Counts &c) {
  const double p = ratio(c.tp, c.tp + c.fp), r = ratio(c.tp, c.tp + c.fn);
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

} // namespace

double accuracy(const std::vector<double> &y, const std::vector<double> &pred) {
  same_length(y, pred);
  double hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += y[i] == pred[i];
  return hit / double(y.size());
}

double precision(const std::vector<double> &y, const std::vector<double> &pred) {
  return averaged(y, pred, [](const Counts &c) { return ratio(c.tp, c.tp + c.fp); });
}

double recall(const std::vector<double> &y, const std::vector<double> &pred) {
  return averaged(y, pred, [](const Counts &c) { return ratio(c.tp, c.tp + c.fn); });
}

double f1(const std::vector<double> &y, const std::vector<double> &pred) { return averaged(y, pred, f1_of); }

double roc_auc(const std::vector<double> &y, const std::vector<double> &score) {
  same_length(y, score);
  // rank-sum form: sort by score, give tied blocks their mean rank
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  double n_pos = 0, rank_sum = 0;
  for (double v : y) n_pos += v == 1.0;
  const double n_neg = double(y.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) fail("UndefinedMetric", "AUC needs both classes present");
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && score[order[j]] == score[order[i]]) ++j;
    // ranks i+1..j, all tied; sum of positives' ranks accumulated as integers*2
    double pos = 0;
    for (std::size_t t = i; t < j; ++t) pos += y[order[t]] == 1.0;
    rank_sum += pos * double(i + 1 + j) / 2.0;
    i = j;
  }
  return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg);
}

double rmse(const std::vector<double> &y, const std::vector<double> &pred) {
  same_length(y, pred);
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
  return std::sqrt(s / double(y.size()));
}

double mae(const std::vector<double> &y, const std::vector<double> &pred) {
  same_length(y, pred);
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - pred[i]);
  return s / double(y.size());
}

double r2(const std::vector<double> &y, const std::vector<double> &pred) {
  same_length(y, pred);
  const double mu = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
    ss_tot += (y[i] - mu) * (y[i] - mu);
  }
  if (ss_tot == 0) fail("UndefinedMetric", "R^2 of a constant target");
  return 1 - ss_res / ss_tot;
}

namespace {

double dist(const Matrix &x, std::size_t a, std::size_t b) {
  double s = 0;
  for (std::size_t c = 0; c < x.cols; ++c) s += (x(a, c) - x(b, c)) * (x(a, c) - x(b, c));
  return std::sqrt(s);
}

std::size_t label_count(const Matrix &x, const std::vector<int> &labels) {
  if (labels.size() != x.rows) fail("DimensionMismatch", "label count differs from row count");
  std::set<int> s(labels.begin(), labels.end());
  return s.size();
}

} // namespace

double silhouette(const Matrix &x, const std::vector<int> &labels) {
  const std::size_t k = label_count(x, labels);
  if (k < 2 || k >= x.rows) fail("UndefinedMetric", "silhouette needs 2 <= clusters < n");
  std::map<int, std::size_t> size;
  for (int l : labels) ++size[l];
  double total = 0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    if (size[labels[i]] == 1) continue; // singleton scores 0
    std::map<int, double> sum;
    for (std::size_t j = 0; j < x.rows; ++j)
      if (j != i) sum[labels[j]] += dist(x, i, j);
    const double a = sum[labels[i]] / double(size[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto &[l, s] : sum)
      if (l != labels[i]) b = std::min(b, s / double(size[l]));
    total += (b - a) / std::max(a, b);
  }
  return total / double(x.rows);
}

double davies_bouldin(const Matrix &x, const std::vector<int> &labels) {
  const std::size_t k = label_count(x, labels);
  if (k < 2) fail("UndefinedMetric", "Davies-Bouldin needs at least 2 clusters");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < x.rows; ++i) members[labels[i]].push_back(i);
  std::vector<std::vector<double>> centroid;
  std::vector<double> scatter;
  for (const auto &[l, rows] : members) {
    std::vector<double> c(x.cols, 0.0);
    for (auto r : rows)
      for (std::size_t j = 0; j < x.cols; ++j) c[j] += x(r, j) / double(rows.size());
    double s = 0;
    for (auto r : rows) {
      double d = 0;
      for (std::size_t j = 0; j < x.cols; ++j) d += (x(r, j) - c[j]) * (x(r, j) - c[j]);
      s += std::sqrt(d);
    }
    centroid.push_back(c);
    scatter.push_back(s / double(rows.size()));
  }
  double total = 0;
  for (std::size_t a = 0; a < k; ++a) {
    double worst = 0;
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      double d = 0;
      for (std::size_t j = 0; j < x.cols; ++j) d += (centroid[a][j] - centroid[b][j]) * (centroid[a][j] - centroid[b][j]);
      d = std::sqrt(d);
      worst = std::max(worst, d > 0 ? (scatter[a] + scatter[b]) / d : std::numeric_limits<double>::infinity());
    }
    total += worst;
  }
  return total / double(k);
}

double adjusted_rand_index(const std::vector<int> &a, const std::vector<int> &b) {
  if (a.size() != b.size()) fail("DimensionMismatch", "label vectors differ in length");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double v) { return v * (v - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto &[k, v] : joint) index += c2(v);
  for (const auto &[k, v] : ra) sa += c2(v);
  for (const auto &[k, v] : rb) sb += c2(v);
  const double expected = sa * sb / c2(double(a.size()));
  const double max_index = (sa + sb) / 2;
  if (max_index == expected) return 1.0; // identical trivial partitions
  return (index - expected) / (max_index - expected);
}

MetricTask metric_task(const std::string &m) {
  static const std::map<std::string, MetricTask> known = {
      {"accuracy", MetricTask::Classification}, {"precision", MetricTask::Classification},
      {"recall", MetricTask::Classification},   {"f1", MetricTask::Classification},
      {"auc", MetricTask::Classification},      {"rmse", MetricTask::Regression},
      {"mae", MetricTask::Regression},          {"r2", MetricTask::Regression},
      {"silhouette", MetricTask::Clustering},   {"davies_bouldin", MetricTask::Clustering},
  };
  auto it = known.find(m);
  if (it == known.end()) fail("UnknownMetric", "'" + m + "'");
  return it->second;
}

bool lower_is_better(const std::string &m) { return m == "rmse" || m == "mae" || m == "davies_bouldin"; }

std::map<std::string, double> evaluate(const ModelArtifact &m, const Matrix &x, const std::vector<double> &y,
                                       const std::vector<std::string> &metrics) {
  const MetricTask want = m.spec.task() == Task::Classification ? MetricTask::Classification : MetricTask::Regression;
  for (const auto &name : metrics)
    if (metric_task(name) != want) fail("MetricTaskMismatch", "'" + name + "' does not apply to " + m.spec.algorithm);
  std::map<std::string, double> out;
  const auto pred = predict(m, x);
  for (const auto &name : metrics) {
    if (name == "accuracy") out[name] = accuracy(y, pred);
    else if (name == "precision") out[name] = precision(y, pred);
    else if (name == "recall") out[name] = recall(y, pred);
    else if (name == "f1") out[name] = f1(y, pred);
    else if (name == "auc") out[name] = roc_auc(y, positive_scores(m, x));
    else if (name == "rmse") out[name] = rmse(y, pred);
    else if (name == "mae") out[name] = mae(y, pred);
    else if (name == "r2") out[name] = r2(y, pred);
  }
  return out;
}

std::map<std::string, double> evaluate_clustering(const Matrix &x, const std::vector<int> &labels,
                                                  const std::vector<std::string> &metrics) {
  std::map<std::string, double> out;
  for (const auto &name : metrics) {
    if (metric_task(name) != MetricTask::Clustering) fail("MetricTaskMismatch", "'" + name + "' needs class labels");
    out[name] = name == "silhouette" ? silhouette(x, labels) : davies_bouldin(x, labels);
  }
  return out;
}

} // namespace voxflow::ml
