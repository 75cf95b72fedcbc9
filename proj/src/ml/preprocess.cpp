#include "voxflow/ml/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "voxflow/core/error.hpp"
#include "voxflow/core/linalg.hpp"

namespace voxflow::ml {

Impute impute_from_string(const std::string &s) {
  if (s == "mean") return Impute::Mean;
  if (s == "median") return Impute::Median;
  if (s == "mode") return Impute::Mode;
  fail("ParamSchemaViolation", "imputation strategy '" + s + "'");
}

const char *to_string(Impute i) {
  switch (i) {
  case Impute::Mean: return "mean";
  case Impute::Median: return "median";
  case Impute::Mode: return "mode";
  }
  return "?";
}

ImputeState impute_fit(const Matrix &m, Impute strategy) {
  ImputeState s{strategy, {}};
  for (std::size_t c = 0; c < m.cols; ++c) {
    std::vector<double> obs;
    for (std::size_t r = 0; r < m.rows; ++r)
      if (!std::isnan(m(r, c))) obs.push_back(m(r, c));
    if (obs.empty()) fail("AllMissingColumn", c < m.names.size() ? m.names[c] : "column " + std::to_string(c));
    std::sort(obs.begin(), obs.end());
    double fill = 0;
    switch (strategy) {
    case Impute::Mean:
      fill = std::accumulate(obs.begin(), obs.end(), 0.0) / double(obs.size());
      break;
    case Impute::Median:
      fill = obs.size() % 2 ? obs[obs.size() / 2] : 0.5 * (obs[obs.size() / 2 - 1] + obs[obs.size() / 2]);
      break;
    case Impute::Mode: {
      // most frequent value, smallest on ties (obs is sorted)
      std::size_t best = 0;
      for (std::size_t i = 0; i < obs.size();) {
        std::size_t j = i;
        while (j < obs.size() && obs[j] == obs[i]) ++j;
        if (j - i > best) best = j - i, fill = obs[i];
        i = j;
      }
      break;
    }
    }
    s.fill.push_back(fill);
  }
  return s;
}

Matrix impute_apply(const ImputeState &s, const Matrix &m) {
  if (s.fill.size() != m.cols) fail("DimensionMismatch", "imputer fitted on a different column count");
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c)
      if (std::isnan(out(r, c))) out(r, c) = s.fill[c];
  return out;
}

Scale scale_from_string(const std::string &s) {
  if (s == "zscore") return Scale::ZScore;
  if (s == "minmax") return Scale::MinMax;
  fail("ParamSchemaViolation", "scaling method '" + s + "'");
}

const char *to_string(Scale s) { return s == Scale::ZScore ? "zscore" : "minmax"; }

namespace {

void require_complete(const Matrix &m, const char *what) {
  for (double x : m.v)
    if (std::isnan(x)) fail("MissingValues", std::string(what) + " needs an imputed matrix");
}

double column_mean(const Matrix &m, std::size_t c) {
  double s = 0;
  for (std::size_t r = 0; r < m.rows; ++r) s += m(r, c);
  return s / double(m.rows);
}

double column_variance(const Matrix &m, std::size_t c) {
  const double mu = column_mean(m, c);
  double s = 0;
  for (std::size_t r = 0; r < m.rows; ++r) s += (m(r, c) - mu) * (m(r, c) - mu);
  return s / double(m.rows);
}

} // namespace

ScaleState scale_fit(const Matrix &m, Scale method) {
  require_complete(m, "scaling");
  if (m.rows == 0) fail("EmptyInput", "cannot fit scaling on zero rows");
  ScaleState s{method, {}, {}};
  for (std::size_t c = 0; c < m.cols; ++c) {
    if (method == Scale::ZScore) {
      s.offset.push_back(column_mean(m, c));
      s.factor.push_back(std::sqrt(column_variance(m, c)));
    } else {
      double lo = m(0, c), hi = m(0, c);
      for (std::size_t r = 0; r < m.rows; ++r) lo = std::min(lo, m(r, c)), hi = std::max(hi, m(r, c));
      s.offset.push_back(lo);
      s.factor.push_back(hi - lo);
    }
  }
  return s;
}

Matrix scale_apply(const ScaleState &s, const Matrix &m) {
  if (s.offset.size() != m.cols) fail("DimensionMismatch", "scaler fitted on a different column count");
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c)
      out(r, c) = s.factor[c] > 0 ? (m(r, c) - s.offset[c]) / s.factor[c] : 0.0;
  return out;
}

Select select_from_string(const std::string &s) {
  if (s == "variance_threshold") return Select::VarianceThreshold;
  if (s == "anova_topk") return Select::AnovaTopK;
  if (s == "correlation_filter") return Select::CorrelationFilter;
  fail("ParamSchemaViolation", "selection method '" + s + "'");
}

const char *to_string(Select s) {
  switch (s) {
  case Select::VarianceThreshold: return "variance_threshold";
  case Select::AnovaTopK: return "anova_topk";
  case Select::CorrelationFilter: return "correlation_filter";
  }
  return "?";
}

std::vector<double> anova_f(const Matrix &m, const std::vector<double> &y) {
  if (y.size() != m.rows) fail("DimensionMismatch", "label count differs from row count");
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < m.rows; ++r) groups[y[r]].push_back(r);
  const double k = double(groups.size()), n = double(m.rows);
  std::vector<double> f(m.cols, 0.0);
  if (groups.size() < 2 || n <= k) return f;
  for (std::size_t c = 0; c < m.cols; ++c) {
    const double grand = column_mean(m, c);
    double between = 0, within = 0;
    for (const auto &[label, rows] : groups) {
      double mu = 0;
      for (auto r : rows) mu += m(r, c);
      mu /= double(rows.size());
      between += double(rows.size()) * (mu - grand) * (mu - grand);
      for (auto r : rows) within += (m(r, c) - mu) * (m(r, c) - mu);
    }
    const double msb = between / (k - 1), msw = within / (n - k);
    f[c] = msw > 0 ? msb / msw : (msb > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
  return f;
}

SelectState select_fit(const Matrix &m, const std::vector<double> &y, const SelectSpec &spec) {
  require_complete(m, "feature selection");
  SelectState s;
  switch (spec.method) {
  case Select::VarianceThreshold:
    for (std::size_t c = 0; c < m.cols; ++c)
      if (column_variance(m, c) > spec.param) s.keep.push_back(c);
    break;
  case Select::AnovaTopK: {
    const double k = spec.param;
    if (!(k >= 1 && k == std::floor(k))) fail("ParamSchemaViolation", "k must be a positive integer");
    if (std::size_t(k) > m.cols) fail("KTooLarge", "k exceeds the number of columns");
    const auto f = anova_f(m, y);
    std::vector<std::size_t> order(m.cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
    s.keep.assign(order.begin(), order.begin() + long(k));
    std::sort(s.keep.begin(), s.keep.end());
    break;
  }
  case Select::CorrelationFilter: {
    auto corr = [&](std::size_t a, std::size_t b) {
      const double ma = column_mean(m, a), mb = column_mean(m, b);
      double sab = 0, saa = 0, sbb = 0;
      for (std::size_t r = 0; r < m.rows; ++r) {
        const double da = m(r, a) - ma, db = m(r, b) - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
      }
      return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
    };
    for (std::size_t c = 0; c < m.cols; ++c) {
      bool drop = false;
      for (std::size_t kept : s.keep)
        if (std::abs(corr(kept, c)) > spec.param) {
          drop = true;
          break;
        }
      if (!drop) s.keep.push_back(c);
    }
    break;
  }
  }
  if (s.keep.empty()) fail("EmptyResult", "feature selection removed every column");
  return s;
}

Matrix select_apply(const SelectState &s, const Matrix &m) {
  for (std::size_t c : s.keep)
    if (c >= m.cols) fail("DimensionMismatch", "selector fitted on a different column count");
  return m.take_cols(s.keep);
}

PcaState pca_fit(const Matrix &m, std::size_t n_components) {
  require_complete(m, "PCA");
  if (n_components < 1 || m.rows < 2 || n_components > std::min(m.rows - 1, m.cols))
    fail("ComponentCountTooLarge", "n_components must lie in [1, min(n - 1, p)]");
  PcaState s;
  const std::size_t p = m.cols;
  for (std::size_t c = 0; c < p; ++c) s.mean.push_back(column_mean(m, c));
  linalg::Dense cov(p, p, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a; b < p; ++b) cov(a, b) += (m(r, a) - s.mean[a]) * (m(r, b) - s.mean[b]);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) cov(b, a) = cov(a, b) = cov(a, b) / double(m.rows - 1);
  const auto eig = linalg::symmetric_eigen(cov);
  double total = 0;
  for (double l : eig.values) total += std::max(l, 0.0);
  s.components = Matrix(n_components, p);
  for (std::size_t k = 0; k < n_components; ++k) {
    std::size_t big = 0;
    for (std::size_t a = 0; a < p; ++a)
      if (std::abs(eig.vectors(a, k)) > std::abs(eig.vectors(big, k))) big = a;
    const double sign = eig.vectors(big, k) < 0 ? -1.0 : 1.0;
    for (std::size_t a = 0; a < p; ++a) s.components(k, a) = sign * eig.vectors(a, k);
    const double l = std::max(eig.values[k], 0.0);
    s.eigenvalues.push_back(l);
    s.explained_ratio.push_back(total > 0 ? l / total : 0.0);
  }
  return s;
}

Matrix pca_transform(const PcaState &s, const Matrix &m) {
  if (s.mean.size() != m.cols) fail("DimensionMismatch", "PCA fitted on a different column count");
  const std::size_t k = s.components.rows;
  Matrix out(m.rows, k);
  for (std::size_t c = 0; c < k; ++c) out.names.push_back("pc" + std::to_string(c + 1));
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < k; ++c) {
      double acc = 0;
      for (std::size_t a = 0; a < m.cols; ++a) acc += (m(r, a) - s.mean[a]) * s.components(c, a);
      out(r, c) = acc;
    }
  return out;
}

Matrix pca_inverse(const PcaState &s, const Matrix &scores) {
  const std::size_t p = s.mean.size();
  Matrix out(scores.rows, p);
  for (std::size_t r = 0; r < scores.rows; ++r)
    for (std::size_t a = 0; a < p; ++a) {
      double acc = s.mean[a];
      for (std::size_t c = 0; c < scores.cols; ++c) acc += scores(r, c) * s.components(c, a);
      out(r, a) = acc;
    }
  return out;
}

} // namespace voxflow::ml
