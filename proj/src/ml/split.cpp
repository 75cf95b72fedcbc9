#include "voxflow/ml/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voxflow/core/cancel.hpp"
#include "voxflow/core/error.hpp"
#include "voxflow/core/rng.hpp"

namespace voxflow::ml {

namespace {

void partition(std::vector<std::size_t> idx, const std::array<double, 3> &ratios, Rng &rng, SplitIndices &out) {
  rng.shuffle(idx);
  const double n = double(idx.size());
  const auto nv = std::size_t(std::floor(n * ratios[1] + 1e-9));
  const auto nt = std::size_t(std::floor(n * ratios[2] + 1e-9));
  out.validation.insert(out.validation.end(), idx.begin(), idx.begin() + long(nv));
  out.test.insert(out.test.end(), idx.begin() + long(nv), idx.begin() + long(nv + nt));
  out.train.insert(out.train.end(), idx.begin() + long(nv + nt), idx.end());
}

} // namespace

SplitIndices split_indices(std::size_t n, std::array<double, 3> ratios, std::uint64_t seed,
                           const std::optional<std::vector<double>> &stratify) {
  double sum = 0;
  for (double r : ratios) {
    if (!(r >= 0 && r <= 1)) fail("ParamSchemaViolation", "split ratios must lie in [0, 1]");
    sum += r;
  }
  if (std::abs(sum - 1) > 1e-9 || ratios[0] <= 0) fail("ParamSchemaViolation", "split ratios must sum to 1 with a positive train share");
  Rng rng(seed);
  SplitIndices out;
  if (!stratify) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    partition(std::move(idx), ratios, rng, out);
  } else {
    if (stratify->size() != n) fail("DimensionMismatch", "stratification column length differs from row count");
    const std::size_t parts = std::size_t(std::count_if(ratios.begin(), ratios.end(), [](double r) { return r > 0; }));
    for (double label : distinct(*stratify)) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        if ((*stratify)[i] == label) idx.push_back(i);
      if (idx.size() < parts)
        fail("ClassTooSmall", "class " + format_number(label) + " has " + std::to_string(idx.size()) + " members for a " +
                                  std::to_string(parts) + "-way split");
      partition(std::move(idx), ratios, rng, out);
    }
  }
  for (auto *v : {&out.train, &out.validation, &out.test}) std::sort(v->begin(), v->end());
  return out;
}

std::vector<std::size_t> stratified_folds(const std::vector<double> &y, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) fail("FoldTooSmall", "cross-validation needs at least 2 folds");
  if (folds > y.size()) fail("FoldTooSmall", "more folds than samples");
  Rng rng(seed);
  std::vector<std::size_t> fold(y.size());
  std::size_t next = 0;
  for (double label : distinct(y)) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == label) idx.push_back(i);
    rng.shuffle(idx);
    for (auto i : idx) fold[i] = next++ % folds;
  }
  return fold;
}

std::vector<std::map<std::string, double>> expand_grid(const std::map<std::string, std::vector<double>> &grid) {
  std::vector<std::map<std::string, double>> out{{}};
  for (const auto &[key, values] : grid) {
    if (values.empty()) fail("ParamSchemaViolation", "grid entry '" + key + "' has no values");
    std::vector<std::map<std::string, double>> next;
    for (const auto &partial : out)
      for (double v : values) {
        auto c = partial;
        c[key] = v;
        next.push_back(std::move(c));
      }
    out = std::move(next);
  }
  return out;
}

GridSearchReport grid_search(const Matrix &x, const std::vector<double> &y, const PipelineSpec &spec,
                             const std::map<std::string, std::vector<double>> &grid, std::size_t folds,
                             const std::string &metric, std::uint64_t seed) {
  if (x.rows != y.size()) fail("DimensionMismatch", "feature rows and labels differ in count");
  const bool classify = spec.task() == Task::Classification;
  if ((metric_task(metric) == MetricTask::Classification) != classify || metric_task(metric) == MetricTask::Clustering)
    fail("MetricTaskMismatch", "'" + metric + "' does not apply to " + spec.algorithm);

  std::vector<std::size_t> fold;
  if (classify) {
    fold = stratified_folds(y, folds, seed);
  } else {
    if (folds < 2 || folds > y.size()) fail("FoldTooSmall", "need 2 <= folds <= n");
    std::vector<std::size_t> idx(y.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);
    fold.resize(y.size());
    for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = i % folds;
  }

  GridSearchReport rep;
  rep.candidates = expand_grid(grid);
  for (const auto &cand : rep.candidates) {
    const PipelineSpec s = spec.with(cand);
    s.validate();
    std::vector<double> scores;
    for (std::size_t f = 0; f < folds; ++f) {
      check_cancelled();
      std::vector<std::size_t> tr, va;
      for (std::size_t i = 0; i < y.size(); ++i) (fold[i] == f ? va : tr).push_back(i);
      // every preprocessing state is fitted on the training fold only
      const ModelArtifact m = fit_pipeline(x.take_rows(tr), take(y, tr), s, seed);
      scores.push_back(evaluate(m, x.take_rows(va), take(y, va), {metric}).at(metric));
    }
    rep.mean_scores.push_back(std::accumulate(scores.begin(), scores.end(), 0.0) / double(folds));
    rep.fold_scores.push_back(std::move(scores));
  }
  const double sign = lower_is_better(metric) ? -1.0 : 1.0;
  for (std::size_t c = 1; c < rep.candidates.size(); ++c)
    if (sign * rep.mean_scores[c] > sign * rep.mean_scores[rep.best]) rep.best = c;
  rep.model = fit_pipeline(x, y, spec.with(rep.candidates[rep.best]), seed);
  return rep;
}

Table GridSearchReport::table() const {
  Table t;
  t.columns.push_back({"candidate", ColumnKind::Numeric});
  if (!candidates.empty())
    for (const auto &[key, v] : candidates.front()) t.columns.push_back({key, ColumnKind::Numeric});
  const std::size_t folds = fold_scores.empty() ? 0 : fold_scores.front().size();
  for (std::size_t f = 0; f < folds; ++f) t.columns.push_back({"fold_" + std::to_string(f + 1), ColumnKind::Numeric});
  t.columns.push_back({"mean", ColumnKind::Numeric});
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    std::vector<Cell> row{Cell{double(c)}};
    for (const auto &[key, v] : candidates[c]) row.emplace_back(v);
    for (double s : fold_scores[c]) row.emplace_back(s);
    row.emplace_back(mean_scores[c]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

} // namespace voxflow::ml
