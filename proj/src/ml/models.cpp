#include "voxflow/ml/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "voxflow/core/cancel.hpp"
#include "voxflow/core/error.hpp"
#include "voxflow/core/linalg.hpp"
#include "voxflow/core/rng.hpp"

namespace voxflow::ml {

namespace {

const std::map<std::string, std::map<std::string, double>> kDefaults = {
    {"logistic_regression", {{"lambda", 0.01}, {"max_iter", 1000}}},
    {"knn", {{"k", 5}}},
    {"decision_tree", {{"max_depth", 5}}},
    {"random_forest", {{"n_trees", 50}, {"max_depth", 5}}},
    {"ols", {}},
    {"ridge", {{"lambda", 1}}},
};

bool is_count_param(const std::string &key) { return key != "lambda"; }

} // namespace

std::vector<std::string> hyperparameter_names(const std::string &algorithm) {
  std::vector<std::string> out;
  auto d = kDefaults.find(algorithm);
  if (d != kDefaults.end())
    for (const auto &[k, v] : d->second) out.push_back(k);
  return out;
}

bool is_unavailable_algorithm(const std::string &name) { return name == "svm" || name == "kmodes"; }

Task PipelineSpec::task() const {
  return algorithm == "ols" || algorithm == "ridge" ? Task::Regression : Task::Classification;
}

double PipelineSpec::param(const std::string &key, double fallback) const {
  auto it = hyper.find(key);
  if (it != hyper.end()) return it->second;
  auto d = kDefaults.find(algorithm);
  if (d != kDefaults.end()) {
    auto jt = d->second.find(key);
    if (jt != d->second.end()) return jt->second;
  }
  return fallback;
}

PipelineSpec PipelineSpec::with(const std::map<std::string, double> &params) const {
  PipelineSpec out = *this;
  for (const auto &[key, value] : params) {
    if (key == "select.param") {
      if (!out.select) fail("ParamSchemaViolation", "grid sets select.param but no selection step is configured");
      out.select->param = value;
    } else if (key == "pca.n_components") {
      if (!(value >= 1 && value == std::floor(value))) fail("ParamSchemaViolation", "pca.n_components must be a positive integer");
      out.pca_components = std::size_t(value);
    } else {
      out.hyper[key] = value;
    }
  }
  return out;
}

void PipelineSpec::validate() const {
  if (is_unavailable_algorithm(algorithm))
    fail("AlgorithmUnavailable", "'" + algorithm + "' is listed in the catalog but not implemented");
  auto d = kDefaults.find(algorithm);
  if (d == kDefaults.end()) fail("UnknownAlgorithm", "'" + algorithm + "'");
  for (const auto &[key, value] : hyper) {
    if (!d->second.count(key)) fail("ParamSchemaViolation", algorithm + " has no hyperparameter '" + key + "'");
    if (!std::isfinite(value)) fail("ParamSchemaViolation", key + " must be finite");
    if (is_count_param(key) ? !(value >= 1 && value == std::floor(value)) : value < 0)
      fail("ParamSchemaViolation", key + " out of range");
  }
  if (algorithm == "ridge" && param("lambda", 1) <= 0) fail("ParamSchemaViolation", "ridge needs lambda > 0");
  if (select && select->method == Select::AnovaTopK && task() == Task::Regression)
    fail("ParamSchemaViolation", "anova_topk needs class labels");
  if (pca_components && *pca_components == 0) fail("ComponentCountTooLarge", "n_components must be at least 1");
}

namespace {

double sigmoid(double z) { return z >= 0 ? 1 / (1 + std::exp(-z)) : std::exp(z) / (1 + std::exp(z)); }

// log(1 + e^z) without overflow
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double linear(const Matrix &x, std::size_t r, const std::vector<double> &w) {
  double z = w.back();
  const double *row = x.row(r);
  for (std::size_t c = 0; c < x.cols; ++c) z += row[c] * w[c];
  return z;
}

std::vector<double> train_logistic(const Matrix &x, const std::vector<double> &t, double lambda, std::size_t max_iter,
                                   std::vector<double> &history) {
  const std::size_t n = x.rows, p = x.cols;
  double frob = 0;
  for (double v : x.v) frob += v * v;
  // ||X~||_2^2 <= ||X~||_F^2, X~ = [X 1]
  const double lip = (frob + double(n)) / (4.0 * double(n)) + lambda;
  std::vector<double> w(p + 1, 0.0), g(p + 1);
  history.clear();
  for (std::size_t it = 0;; ++it) {
    check_cancelled();
    std::fill(g.begin(), g.end(), 0.0);
    double loss = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double z = linear(x, r, w);
      loss += softplus(z) - t[r] * z;
      const double e = sigmoid(z) - t[r];
      const double *row = x.row(r);
      for (std::size_t c = 0; c < p; ++c) g[c] += e * row[c];
      g[p] += e;
    }
    loss /= double(n);
    double norm_inf = 0;
    for (std::size_t c = 0; c <= p; ++c) {
      g[c] /= double(n);
      if (c < p) {
        g[c] += lambda * w[c];
        loss += 0.5 * lambda * w[c] * w[c];
      }
      norm_inf = std::max(norm_inf, std::abs(g[c]));
    }
    history.push_back(loss);
    if (norm_inf < 1e-6 || it == max_iter) break;
    for (std::size_t c = 0; c <= p; ++c) w[c] -= g[c] / lip;
  }
  return w;
}

std::size_t class_index(const std::vector<double> &classes, double label) {
  return std::size_t(std::lower_bound(classes.begin(), classes.end(), label) - classes.begin());
}

// Index of the largest entry; ties go to the smaller index (smaller label).
std::size_t argmax(const double *s, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (s[i] > s[best]) best = i;
  return best;
}

struct TreeBuilder {
  const Matrix &x;
  const std::vector<std::size_t> &cls; // class index per row
  std::size_t n_classes;
  std::size_t max_depth;
  std::size_t mtry; // 0: all features
  Rng *rng;
  Tree tree;

  static double gini(const std::vector<double> &counts, double total) {
    if (total <= 0) return 0;
    double s = 1;
    for (double c : counts) s -= (c / total) * (c / total);
    return s;
  }

  int build(std::vector<std::size_t> rows, std::size_t depth) {
    check_cancelled();
    std::vector<double> counts(n_classes, 0.0);
    for (auto r : rows) counts[cls[r]] += 1;
    const double total = double(rows.size());
    TreeNode node;
    node.dist.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) node.dist[c] = counts[c] / total;
    const int id = int(tree.size());
    tree.push_back(node);
    const double parent = gini(counts, total);
    if (depth >= max_depth || rows.size() < 2 || parent == 0) return id;

    std::vector<std::size_t> features(x.cols);
    std::iota(features.begin(), features.end(), 0);
    if (mtry && mtry < x.cols) {
      for (std::size_t i = 0; i < mtry; ++i) std::swap(features[i], features[i + rng->index(x.cols - i)]);
      features.resize(mtry);
      std::sort(features.begin(), features.end());
    }

    double best = parent - 1e-12;
    int best_f = -1;
    double best_t = 0;
    std::vector<std::size_t> order = rows;
    for (std::size_t f : features) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
      std::vector<double> left(n_classes, 0.0), right = counts;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        left[cls[order[i]]] += 1;
        right[cls[order[i]]] -= 1;
        const double a = x(order[i], f), b = x(order[i + 1], f);
        if (a == b) continue;
        const double nl = double(i + 1), nr = total - nl;
        const double score = (nl * gini(left, nl) + nr * gini(right, nr)) / total;
        if (score < best) {
          best = score;
          best_f = int(f);
          best_t = a + (b - a) / 2;
        }
      }
    }
    if (best_f < 0) return id;
    std::vector<std::size_t> l, r;
    for (auto row : rows) (x(row, std::size_t(best_f)) <= best_t ? l : r).push_back(row);
    tree[std::size_t(id)].feature = best_f;
    tree[std::size_t(id)].threshold = best_t;
    const int li = build(std::move(l), depth + 1);
    const int ri = build(std::move(r), depth + 1);
    tree[std::size_t(id)].left = li;
    tree[std::size_t(id)].right = ri;
    return id;
  }
};

const std::vector<double> &leaf_dist(const Tree &t, const double *row) {
  std::size_t i = 0;
  while (t[i].feature >= 0) i = std::size_t(row[t[i].feature] <= t[i].threshold ? t[i].left : t[i].right);
  return t[i].dist;
}

void require_complete(const Matrix &x) {
  for (double v : x.v)
    if (std::isnan(v)) fail("MissingValues", "estimator input contains missing values; configure imputation");
}

} // namespace

double logistic_objective(const Matrix &x, const std::vector<double> &t, const std::vector<double> &w, double lambda) {
  double loss = 0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double z = linear(x, r, w);
    loss += softplus(z) - t[r] * z;
  }
  loss /= double(x.rows);
  for (std::size_t c = 0; c < x.cols; ++c) loss += 0.5 * lambda * w[c] * w[c];
  return loss;
}

Matrix transform_features(const ModelArtifact &m, const Matrix &in) {
  if (in.cols != m.feature_names.size()) fail("DimensionMismatch", "model expects " + std::to_string(m.feature_names.size()) + " features");
  Matrix x = in;
  if (m.impute) x = impute_apply(*m.impute, x);
  if (m.scale) x = scale_apply(*m.scale, x);
  if (m.select) x = select_apply(*m.select, x);
  if (m.pca) x = pca_transform(*m.pca, x);
  return x;
}

ModelArtifact fit_pipeline(const Matrix &x_in, const std::vector<double> &y, const PipelineSpec &spec, std::uint64_t seed) {
  spec.validate();
  if (x_in.rows != y.size()) fail("DimensionMismatch", "feature rows and labels differ in count");
  if (x_in.rows == 0 || x_in.cols == 0) fail("EmptyInput", "training matrix is empty");
  for (double v : y)
    if (!std::isfinite(v)) fail("MissingValues", "target contains missing values");

  ModelArtifact m;
  m.spec = spec;
  m.seed = seed;
  m.feature_names = x_in.names;
  m.feature_names.resize(x_in.cols);

  Matrix x = x_in;
  if (spec.impute) x = impute_apply(*(m.impute = impute_fit(x, *spec.impute)), x);
  require_complete(x);
  if (spec.scale) x = scale_apply(*(m.scale = scale_fit(x, *spec.scale)), x);
  if (spec.select) x = select_apply(*(m.select = select_fit(x, y, *spec.select)), x);
  if (spec.pca_components) x = pca_transform(*(m.pca = pca_fit(x, *spec.pca_components)), x);

  const std::string &algo = spec.algorithm;
  if (spec.task() == Task::Regression) {
    const double lambda = algo == "ridge" ? spec.param("lambda", 1) : 0.0;
    const std::size_t p = x.cols, n = x.rows;
    std::vector<double> mu(p, 0.0);
    double ybar = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < p; ++c) mu[c] += x(r, c) / double(n);
    linalg::Dense a(p, p, 0.0);
    std::vector<double> b(p, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < p; ++i) {
        const double xi = x(r, i) - mu[i];
        b[i] += xi * (y[r] - ybar);
        for (std::size_t j = 0; j < p; ++j) a(i, j) += xi * (x(r, j) - mu[j]);
      }
    for (std::size_t i = 0; i < p; ++i) a(i, i) += lambda;
    m.beta = linalg::cholesky_solve(a, b);
    m.intercept = ybar;
    for (std::size_t i = 0; i < p; ++i) m.intercept -= mu[i] * m.beta[i];
    return m;
  }

  for (double v : y)
    if (v != std::floor(v)) fail("InvalidLabels", "class labels must be integers");
  m.classes = distinct(y);
  if (m.classes.size() < 2) fail("SingleClassTraining", "training labels contain a single class");
  std::vector<std::size_t> cls(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) cls[i] = class_index(m.classes, y[i]);

  if (algo == "logistic_regression") {
    const double lambda = spec.param("lambda", 0.01);
    const auto max_iter = std::size_t(spec.param("max_iter", 1000));
    const std::size_t models = m.classes.size() == 2 ? 1 : m.classes.size();
    for (std::size_t k = 0; k < models; ++k) {
      const std::size_t target = models == 1 ? 1 : k;
      std::vector<double> t(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) t[i] = cls[i] == target ? 1.0 : 0.0;
      m.coef.push_back(train_logistic(x, t, lambda, max_iter, m.loss_history));
    }
  } else if (algo == "knn") {
    m.train_x = x;
    m.train_y = y;
  } else {
    const bool forest = algo == "random_forest";
    const auto depth = std::size_t(spec.param("max_depth", 5));
    Rng rng(seed);
    const std::size_t n_trees = forest ? std::size_t(spec.param("n_trees", 50)) : 1;
    const std::size_t mtry = forest ? std::size_t(std::ceil(std::sqrt(double(x.cols)))) : 0;
    for (std::size_t t = 0; t < n_trees; ++t) {
      std::vector<std::size_t> rows(x.rows);
      if (forest)
        for (auto &r : rows) r = rng.index(x.rows);
      else
        std::iota(rows.begin(), rows.end(), 0);
      TreeBuilder b{x, cls, m.classes.size(), depth, mtry, &rng, {}};
      b.build(std::move(rows), 0);
      m.trees.push_back(std::move(b.tree));
    }
  }
  return m;
}

Matrix predict_scores(const ModelArtifact &m, const Matrix &in) {
  if (m.spec.task() != Task::Classification) fail("MetricTaskMismatch", "scores are defined for classifiers only");
  const Matrix x = transform_features(m, in);
  const std::size_t k = m.classes.size();
  Matrix s(x.rows, k);
  const std::string &algo = m.spec.algorithm;
  for (std::size_t r = 0; r < x.rows; ++r) {
    if (algo == "logistic_regression") {
      if (m.coef.size() == 1) {
        const double p = sigmoid(linear(x, r, m.coef[0]));
        s(r, 0) = 1 - p;
        s(r, 1) = p;
      } else {
        double total = 0;
        for (std::size_t c = 0; c < k; ++c) total += s(r, c) = sigmoid(linear(x, r, m.coef[c]));
        for (std::size_t c = 0; c < k; ++c) s(r, c) /= total;
      }
    } else if (algo == "knn") {
      const std::size_t n = m.train_x.rows, kk = std::min<std::size_t>(std::size_t(m.spec.param("k", 5)), n);
      std::vector<std::pair<double, std::size_t>> d(n);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0;
        for (std::size_t c = 0; c < x.cols; ++c) acc += (x(r, c) - m.train_x(i, c)) * (x(r, c) - m.train_x(i, c));
        d[i] = {acc, i};
      }
      std::partial_sort(d.begin(), d.begin() + long(kk), d.end());
      for (std::size_t i = 0; i < kk; ++i) s(r, class_index(m.classes, m.train_y[d[i].second])) += 1.0 / double(kk);
    } else if (m.trees.size() == 1) {
      const auto &dist = leaf_dist(m.trees[0], x.row(r));
      for (std::size_t c = 0; c < k; ++c) s(r, c) = dist[c];
    } else {
      for (const auto &t : m.trees) s(r, argmax(leaf_dist(t, x.row(r)).data(), k)) += 1.0 / double(m.trees.size());
    }
  }
  return s;
}

std::vector<double> predict(const ModelArtifact &m, const Matrix &in) {
  if (m.spec.task() == Task::Regression) {
    const Matrix x = transform_features(m, in);
    std::vector<double> out(x.rows, m.intercept);
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t c = 0; c < x.cols; ++c) out[r] += x(r, c) * m.beta[c];
    return out;
  }
  const Matrix s = predict_scores(m, in);
  std::vector<double> out(s.rows);
  for (std::size_t r = 0; r < s.rows; ++r) out[r] = m.classes[argmax(s.row(r), s.cols)];
  return out;
}

std::vector<double> positive_scores(const ModelArtifact &m, const Matrix &x) {
  if (m.classes.size() != 2) fail("UndefinedMetric", "positive-class scores need a binary classifier");
  const Matrix s = predict_scores(m, x);
  const std::size_t pos = m.classes[0] == 1.0 ? 0 : 1;
  return s.column(pos);
}

} // namespace voxflow::ml
