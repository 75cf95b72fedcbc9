#include <algorithm>
#include <cmath>

#include "node_util.hpp"
#include "voxflow/core/error.hpp"
#include "voxflow/io/table_io.hpp"
#include "voxflow/ml/cluster.hpp"
#include "voxflow/ml/metrics.hpp"
#include "voxflow/ml/split.hpp"

namespace voxflow::engine {

using namespace spec;

namespace {

const std::vector<std::string> kClassifiers{"logistic_regression", "knn", "decision_tree", "random_forest"};
const std::vector<std::string> kRegressors{"ols", "ridge"};

double parse_number(const std::string &s, const std::string &what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) fail("ParamSchemaViolation", what + ": '" + s + "' is not a number");
  return v;
}

// "key=value" entries.
std::map<std::string, double> parse_hyper(const std::vector<std::string> &items) {
  std::map<std::string, double> out;
  for (const auto &s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) fail("ParamSchemaViolation", "hyperparameter '" + s + "' is not key=value");
    out[s.substr(0, eq)] = parse_number(s.substr(eq + 1), s.substr(0, eq));
  }
  return out;
}

// "key=v1,v2,..." entries.
std::map<std::string, std::vector<double>> parse_grid(const std::vector<std::string> &items) {
  std::map<std::string, std::vector<double>> out;
  for (const auto &s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) fail("ParamSchemaViolation", "grid entry '" + s + "' is not key=v1,v2");
    const auto key = s.substr(0, eq);
    auto &vals = out[key];
    std::size_t start = eq + 1;
    while (true) {
      const auto comma = s.find(',', start);
      vals.push_back(parse_number(s.substr(start, comma - start), key));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (out.empty()) fail("ParamSchemaViolation", "grid is empty");
  return out;
}

ParamSpec unavailable(ParamSpec p, const std::string &value, const std::string &why) {
  p.unsupported[value] = why;
  return p;
}

std::vector<ParamSpec> pipeline_params(const std::vector<std::string> &algorithms, const std::string &algorithm) {
  return {text("target", "outcome"),
          strings("exclude", Json::array({"label"}), {}, "numeric columns that are not features"),
          unavailable(choice("algorithm", algorithms, algorithm), "svm",
                      "support vector machines are listed but not implemented"),
          strings("hyperparameters", Json::array(), {}, "key=value, e.g. lambda=0.1"),
          choice("impute", {"none", "mean", "median", "mode"}, "mean"),
          choice("scale", {"none", "zscore", "minmax"}, "zscore"),
          choice("select", {"none", "variance_threshold", "anova_topk", "correlation_filter"}, "none"),
          number("select_param", 0.0, 0, {}, false, "threshold, k or |r| limit"),
          integer("pca_components", 0, 0, {}, "0 disables PCA")};
}

ml::PipelineSpec pipeline_spec(const NodeContext &ctx) {
  ml::PipelineSpec s;
  s.algorithm = ctx.str("algorithm");
  s.hyper = parse_hyper(ctx.strings("hyperparameters"));
  if (ctx.str("impute") != "none") s.impute = ml::impute_from_string(ctx.str("impute"));
  if (ctx.str("scale") != "none") s.scale = ml::scale_from_string(ctx.str("scale"));
  if (ctx.str("select") != "none") s.select = ml::SelectSpec{ml::select_from_string(ctx.str("select")), ctx.num("select_param")};
  if (ctx.integer("pca_components") > 0) s.pca_components = std::size_t(ctx.integer("pca_components"));
  s.validate();
  return s;
}

struct Dataset {
  ml::Matrix x;
  std::vector<double> y;
};

Dataset dataset(const NodeContext &ctx, const Table &t) {
  const auto target = ctx.str("target");
  auto exclude = ctx.strings("exclude");
  exclude.push_back(target);
  Dataset d;
  d.x = ml::table_matrix(t, ml::numeric_columns_except(t, exclude));
  d.y = t.numeric_column(target);
  if (d.x.cols == 0) fail("EmptyResult", "no numeric feature columns");
  return d;
}

Cell metric_cell(NodeContext &ctx, const std::string &split, const std::function<double()> &f, const std::string &name) {
  try {
    return Cell{f()};
  } catch (const Error &e) {
    if (e.kind() != "UndefinedMetric") throw;
    ctx.warnings.push_back(split + " " + name + ": " + e.what());
    return Cell{};
  }
}

Table split_metrics(NodeContext &ctx, const ml::ModelArtifact &model, const Dataset &d, const ml::SplitIndices &s,
                    const std::vector<std::string> &metrics) {
  Table t;
  t.columns = {{"split", ColumnKind::Categorical}, {"n", ColumnKind::Numeric}};
  for (const auto &m : metrics) t.columns.push_back({m, ColumnKind::Numeric});
  const std::pair<const char *, const std::vector<std::size_t> *> parts[] = {
      {"train", &s.train}, {"validation", &s.validation}, {"test", &s.test}};
  for (const auto &[name, idx] : parts) {
    if (idx->empty()) continue;
    const auto x = d.x.take_rows(*idx);
    const auto y = ml::take(d.y, *idx);
    std::vector<Cell> row{Cell{std::string(name)}, Cell{double(idx->size())}};
    for (const auto &m : metrics)
      row.push_back(metric_cell(ctx, name, [&] { return ml::evaluate(model, x, y, {m}).at(m); }, m));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::array<double, 3> ratios(const NodeContext &ctx) {
  const auto r = ctx.numbers("split");
  if (r.size() != 3) fail("ParamSchemaViolation", "split needs train, validation and test ratios");
  return {r[0], r[1], r[2]};
}

Outputs train(NodeContext &ctx, const std::vector<std::string> &metrics, bool classification) {
  const auto spec = pipeline_spec(ctx);
  if ((spec.task() == ml::Task::Classification) != classification)
    fail("ParamSchemaViolation", "algorithm '" + spec.algorithm + "' does not fit this node");
  const auto d = dataset(ctx, ctx.in<Table>("table"));
  std::optional<std::vector<double>> strata;
  if (classification && ctx.flag("stratify")) strata = d.y;
  const auto s = ml::split_indices(d.x.rows, ratios(ctx), ctx.seed, strata);
  auto model = ml::fit_pipeline(d.x.take_rows(s.train), ml::take(d.y, s.train), spec, ctx.seed);
  auto table = split_metrics(ctx, model, d, s, metrics);
  return {{"model", std::move(model)}, {"metrics", std::move(table)}};
}

} // namespace

void register_ml_nodes(Catalog &c) {
  c.add({.name = "TableMerge",
         .category = "tables",
         .description = "Joins two tables on a key column (columns mode) or stacks them (rows mode).",
         .inputs = {port("left", PortType::Table), port("right", PortType::Table)},
         .outputs = {port("table", PortType::Table)},
         .params = {choice("mode", {"columns", "rows"}, "columns"),
                    text("key", "", "join column; empty means the detected id column")},
         .run = [](NodeContext &ctx) -> Outputs {
           const auto &a = ctx.in<Table>("left");
           const auto &b = ctx.in<Table>("right");
           auto key = ctx.str("key");
           const auto mode = io::merge_mode_from_string(ctx.str("mode"));
           if (key.empty() && mode == io::MergeMode::Columns) {
             const auto id = io::detect_id_column(a);
             if (!id) fail("KeyMissing", "no key given and no id column detected");
             key = *id;
           }
           return {{"table", io::merge_tables(a, b, mode, key)}};
         }});

  auto classifier_params = pipeline_params(kClassifiers, "logistic_regression");
  classifier_params.push_back(numbers("split", Json::array({0.6, 0.2, 0.2}), 0, "train, validation, test"));
  classifier_params.push_back(boolean("stratify", true));
  c.add({.name = "Classifier",
         .category = "ml",
         .description = "Seeded train/validation/test split, preprocessing fitted on the training rows, then a "
                        "classifier.",
         .inputs = {port("table", PortType::Table)},
         .outputs = {port("model", PortType::Model), port("metrics", PortType::Table)},
         .params = classifier_params,
         .uses_seed = true,
         .run = [](NodeContext &ctx) -> Outputs {
           return train(ctx, {"accuracy", "precision", "recall", "f1", "auc"}, true);
         }});

  auto regressor_params = pipeline_params(kRegressors, "ridge");
  regressor_params.push_back(numbers("split", Json::array({0.6, 0.2, 0.2}), 0, "train, validation, test"));
  c.add({.name = "Regressor",
         .category = "ml",
         .description = "Seeded split then ordinary least squares or ridge regression.",
         .inputs = {port("table", PortType::Table)},
         .outputs = {port("model", PortType::Model), port("metrics", PortType::Table)},
         .params = regressor_params,
         .uses_seed = true,
         .run = [](NodeContext &ctx) -> Outputs { return train(ctx, {"rmse", "mae", "r2"}, false); }});

  auto grid_params = pipeline_params(
      {"logistic_regression", "knn", "decision_tree", "random_forest", "ols", "ridge"}, "logistic_regression");
  grid_params.push_back(strings("grid", Json::array({"lambda=0.01,0.1,1"}), {}, "key=v1,v2,..."));
  grid_params.push_back(integer("folds", 5, 2));
  grid_params.push_back(text("metric", "accuracy"));
  c.add({.name = "GridSearch",
         .category = "ml",
         .description = "Exhaustive grid with k-fold cross-validation; preprocessing is refitted inside each fold. "
                        "The best candidate is refitted on all rows.",
         .inputs = {port("table", PortType::Table)},
         .outputs = {port("model", PortType::Model), port("results", PortType::Table)},
         .params = grid_params,
         .uses_seed = true,
         .run = [](NodeContext &ctx) -> Outputs {
           const auto spec = pipeline_spec(ctx);
           const auto d = dataset(ctx, ctx.in<Table>("table"));
           auto r = ml::grid_search(d.x, d.y, spec, parse_grid(ctx.strings("grid")), std::size_t(ctx.integer("folds")),
                                    ctx.str("metric"), ctx.seed);
           auto table = r.table();
           return {{"model", std::move(r.model)}, {"results", std::move(table)}};
         }});

  c.add({.name = "Clustering",
         .category = "ml",
         .description = "Clusters table rows on their numeric columns.",
         .inputs = {port("table", PortType::Table)},
         .outputs = {port("assignments", PortType::Table), port("metrics", PortType::Table)},
         .params = {unavailable(choice("algorithm", {"kmeans", "kmedoids", "gmm", "agglomerative"}, "kmeans"), "kmodes",
                                "k-modes is listed but not implemented"),
                    integer("k", 3, 1), strings("exclude", Json::array({"label"})),
                    choice("scale", {"none", "zscore", "minmax"}, "none")},
         .uses_seed = true,
         .run = [](NodeContext &ctx) -> Outputs {
           const auto algo = ml::cluster_algo_from_string(ctx.str("algorithm"));
           const auto &t = ctx.in<Table>("table");
           auto x = ml::table_matrix(t, ml::numeric_columns_except(t, ctx.strings("exclude")));
           for (double v : x.v)
             if (std::isnan(v)) fail("MissingValues", "clustering needs complete rows");
           if (ctx.str("scale") != "none") x = ml::scale_apply(ml::scale_fit(x, ml::scale_from_string(ctx.str("scale"))), x);
           const auto r = ml::cluster(x, algo, std::size_t(ctx.integer("k")), ctx.seed);

           Table a;
           const auto id = t.id_column ? t.id_column : io::detect_id_column(t);
           if (id) a.columns.push_back(t.columns[t.column_index(*id)]);
           a.columns.push_back({"cluster", ColumnKind::Numeric});
           for (std::size_t i = 0; i < r.labels.size(); ++i) {
             std::vector<Cell> row;
             if (id) row.push_back(t.rows[i][t.column_index(*id)]);
             row.push_back(Cell{double(r.labels[i])});
             a.rows.push_back(std::move(row));
           }
           a.id_column = id;

           Table m;
           m.columns = {{"metric", ColumnKind::Categorical}, {"value", ColumnKind::Numeric}};
           m.rows.push_back({Cell{std::string("inertia")}, Cell{r.inertia}});
           for (const char *name : {"silhouette", "davies_bouldin"})
             m.rows.push_back({Cell{std::string(name)},
                               metric_cell(ctx, "all", [&] { return ml::evaluate_clustering(x, r.labels, {name}).at(name); },
                                           name)});
           return {{"assignments", std::move(a)}, {"metrics", std::move(m)}};
         }});

  c.add({.name = "Predict",
         .category = "ml",
         .description = "Appends predictions (and the positive-class score for binary models) to a table.",
         .inputs = {port("model", PortType::Model), port("table", PortType::Table)},
         .outputs = {port("table", PortType::Table)},
         .run = [](NodeContext &ctx) -> Outputs {
           const auto &m = ctx.in<ml::ModelArtifact>("model");
           Table t = ctx.in<Table>("table");
           const auto x = ml::table_matrix(t, m.feature_names);
           const auto pred = ml::predict(m, x);
           const bool binary = m.spec.task() == ml::Task::Classification && m.classes.size() == 2;
           std::vector<double> score;
           if (binary) score = ml::positive_scores(m, x);
           t.columns.push_back({"prediction", ColumnKind::Numeric});
           if (binary) t.columns.push_back({"score", ColumnKind::Numeric});
           for (std::size_t i = 0; i < t.rows.size(); ++i) {
             t.rows[i].push_back(Cell{pred[i]});
             if (binary) t.rows[i].push_back(Cell{score[i]});
           }
           return {{"table", std::move(t)}};
         }});

  c.add({.name = "Evaluate",
         .category = "ml",
         .description = "Scores a fitted model on a labelled table.",
         .inputs = {port("model", PortType::Model), port("table", PortType::Table)},
         .outputs = {port("metrics", PortType::Table)},
         .params = {text("target", "outcome"),
                    strings("metrics", Json::array({"accuracy", "auc"}), {},
                            "accuracy, precision, recall, f1, roc_auc, rmse, mae, r2")},
         .run = [](NodeContext &ctx) -> Outputs {
           const auto &m = ctx.in<ml::ModelArtifact>("model");
           const auto &t = ctx.in<Table>("table");
           const auto x = ml::table_matrix(t, m.feature_names);
           const auto y = t.numeric_column(ctx.str("target"));
           Table out;
           out.columns = {{"metric", ColumnKind::Categorical}, {"value", ColumnKind::Numeric}};
           for (const auto &name : ctx.strings("metrics"))
             out.rows.push_back({Cell{name}, metric_cell(ctx, "table", [&] { return ml::evaluate(m, x, y, {name}).at(name); }, name)});
           return {{"metrics", std::move(out)}};
         }});
}

} // namespace voxflow::engine
