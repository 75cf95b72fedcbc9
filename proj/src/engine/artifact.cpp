#include "voxflow/engine/artifact.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include <json.hpp>

#include "voxflow/core/error.hpp"

namespace voxflow::engine {

using nlohmann::json;

PortType port_type_from_string(const std::string &s) {
  if (s == "Image") return PortType::Image;
  if (s == "Mask") return PortType::Mask;
  if (s == "Table") return PortType::Table;
  if (s == "Transform") return PortType::Transform;
  if (s == "Model") return PortType::Model;
  if (s == "FilePath") return PortType::FilePath;
  fail("UnknownPortType", "'" + s + "'");
}

const char *to_string(PortType t) {
  switch (t) {
  case PortType::Image: return "Image";
  case PortType::Mask: return "Mask";
  case PortType::Table: return "Table";
  case PortType::Transform: return "Transform";
  case PortType::Model: return "Model";
  case PortType::FilePath: return "FilePath";
  }
  return "?";
}

PortType port_type_of(const Artifact &a) { return PortType(a.index()); }

namespace {

// JSON has no NaN/Inf; those travel as tagged strings.
json num(double v) {
  if (std::isnan(v)) return json{{"f", "nan"}};
  if (std::isinf(v)) return json{{"f", v > 0 ? "inf" : "-inf"}};
  return v;
}

double num(const json &j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.at("f").get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return s == "inf" ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

json nums(const std::vector<double> &v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::vector<double> nums(const json &j) {
  std::vector<double> v;
  for (const auto &x : j) v.push_back(num(x));
  return v;
}

template <std::size_t N> json arr(const std::array<double, N> &a) { return nums(std::vector<double>(a.begin(), a.end())); }

template <std::size_t N> std::array<double, N> arr(const json &j) {
  std::array<double, N> a{};
  const auto v = nums(j);
  if (v.size() != N) fail("MalformedArtifact", "array length");
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

json geometry_json(const Geometry &g) {
  return {{"dims", {g.dims[0], g.dims[1], g.dims[2]}},
          {"spacing", arr(g.spacing)},
          {"origin", arr(g.origin)},
          {"direction", arr(g.direction.m)}};
}

Geometry geometry_from(const json &j) {
  Geometry g;
  for (int a = 0; a < 3; ++a) g.dims[a] = j.at("dims").at(a).get<std::size_t>();
  g.spacing = arr<3>(j.at("spacing"));
  g.origin = arr<3>(j.at("origin"));
  g.direction.m = arr<9>(j.at("direction"));
  return g;
}

json cell_json(const Cell &c) {
  if (std::holds_alternative<std::monostate>(c)) return nullptr;
  if (const auto *d = std::get_if<double>(&c)) return num(*d);
  return json{{"s", std::get<std::string>(c)}};
}

Cell cell_from(const json &j) {
  if (j.is_null()) return Cell{};
  if (j.is_object() && j.contains("s")) return Cell{j.at("s").get<std::string>()};
  return Cell{num(j)};
}

json table_json(const Table &t) {
  json cols = json::array(), rows = json::array();
  for (const auto &c : t.columns) cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
  for (const auto &r : t.rows) {
    json row = json::array();
    for (const auto &c : r) row.push_back(cell_json(c));
    rows.push_back(std::move(row));
  }
  json j{{"columns", cols}, {"rows", rows}};
  j["id_column"] = t.id_column ? json(*t.id_column) : json(nullptr);
  return j;
}

Table table_from(const json &j) {
  Table t;
  for (const auto &c : j.at("columns"))
    t.columns.push_back({c.at("name").get<std::string>(), column_kind_from_string(c.at("kind").get<std::string>())});
  for (const auto &r : j.at("rows")) {
    std::vector<Cell> row;
    for (const auto &c : r) row.push_back(cell_from(c));
    t.rows.push_back(std::move(row));
  }
  if (!j.at("id_column").is_null()) t.id_column = j.at("id_column").get<std::string>();
  return t;
}

json matrix_json(const ml::Matrix &m) { return {{"rows", m.rows}, {"cols", m.cols}, {"v", nums(m.v)}, {"names", m.names}}; }

ml::Matrix matrix_from(const json &j) {
  ml::Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.v = nums(j.at("v"));
  m.names = j.at("names").get<std::vector<std::string>>();
  return m;
}

json model_json(const ml::ModelArtifact &m) {
  json spec{{"algorithm", m.spec.algorithm}, {"hyper", json::object()}};
  for (const auto &[k, v] : m.spec.hyper) spec["hyper"][k] = num(v);
  spec["impute"] = m.spec.impute ? json(ml::to_string(*m.spec.impute)) : json(nullptr);
  spec["scale"] = m.spec.scale ? json(ml::to_string(*m.spec.scale)) : json(nullptr);
  spec["select"] = m.spec.select ? json{{"method", ml::to_string(m.spec.select->method)}, {"param", num(m.spec.select->param)}}
                                 : json(nullptr);
  spec["pca_components"] = m.spec.pca_components ? json(*m.spec.pca_components) : json(nullptr);

  json j{{"spec", spec}, {"seed", m.seed}, {"feature_names", m.feature_names}};
  j["impute"] = m.impute ? json{{"fill", nums(m.impute->fill)}} : json(nullptr);
  j["scale"] = m.scale ? json{{"offset", nums(m.scale->offset)}, {"factor", nums(m.scale->factor)}} : json(nullptr);
  j["select"] = m.select ? json{{"keep", m.select->keep}} : json(nullptr);
  j["pca"] = m.pca ? json{{"mean", nums(m.pca->mean)},
                          {"components", matrix_json(m.pca->components)},
                          {"eigenvalues", nums(m.pca->eigenvalues)},
                          {"explained_ratio", nums(m.pca->explained_ratio)}}
                   : json(nullptr);
  j["classes"] = nums(m.classes);
  json coef = json::array();
  for (const auto &c : m.coef) coef.push_back(nums(c));
  j["coef"] = coef;
  j["loss_history"] = nums(m.loss_history);
  j["beta"] = nums(m.beta);
  j["intercept"] = num(m.intercept);
  j["train_x"] = matrix_json(m.train_x);
  j["train_y"] = nums(m.train_y);
  json trees = json::array();
  for (const auto &t : m.trees) {
    json nodes = json::array();
    for (const auto &n : t)
      nodes.push_back({{"feature", n.feature}, {"threshold", num(n.threshold)}, {"left", n.left}, {"right", n.right},
                       {"dist", nums(n.dist)}});
    trees.push_back(std::move(nodes));
  }
  j["trees"] = trees;
  return j;
}

ml::ModelArtifact model_from(const json &j) {
  ml::ModelArtifact m;
  const json &s = j.at("spec");
  m.spec.algorithm = s.at("algorithm").get<std::string>();
  for (const auto &[k, v] : s.at("hyper").items()) m.spec.hyper[k] = num(v);
  if (!s.at("impute").is_null()) m.spec.impute = ml::impute_from_string(s.at("impute").get<std::string>());
  if (!s.at("scale").is_null()) m.spec.scale = ml::scale_from_string(s.at("scale").get<std::string>());
  if (!s.at("select").is_null())
    m.spec.select = ml::SelectSpec{ml::select_from_string(s.at("select").at("method").get<std::string>()),
                                   num(s.at("select").at("param"))};
  if (!s.at("pca_components").is_null()) m.spec.pca_components = s.at("pca_components").get<std::size_t>();

  m.seed = j.at("seed").get<std::uint64_t>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  if (!j.at("impute").is_null()) m.impute = ml::ImputeState{*m.spec.impute, nums(j.at("impute").at("fill"))};
  if (!j.at("scale").is_null())
    m.scale = ml::ScaleState{*m.spec.scale, nums(j.at("scale").at("offset")), nums(j.at("scale").at("factor"))};
  if (!j.at("select").is_null()) m.select = ml::SelectState{j.at("select").at("keep").get<std::vector<std::size_t>>()};
  if (!j.at("pca").is_null()) {
    const json &p = j.at("pca");
    m.pca = ml::PcaState{nums(p.at("mean")), matrix_from(p.at("components")), nums(p.at("eigenvalues")),
                         nums(p.at("explained_ratio"))};
  }
  m.classes = nums(j.at("classes"));
  for (const auto &c : j.at("coef")) m.coef.push_back(nums(c));
  m.loss_history = nums(j.at("loss_history"));
  m.beta = nums(j.at("beta"));
  m.intercept = num(j.at("intercept"));
  m.train_x = matrix_from(j.at("train_x"));
  m.train_y = nums(j.at("train_y"));
  for (const auto &t : j.at("trees")) {
    ml::Tree tree;
    for (const auto &n : t)
      tree.push_back({n.at("feature").get<int>(), num(n.at("threshold")), n.at("left").get<int>(), n.at("right").get<int>(),
                      nums(n.at("dist"))});
    m.trees.push_back(std::move(tree));
  }
  return m;
}

constexpr char kMagic[4] = {'V', 'X', 'A', '1'};

io::Bytes pack(PortType type, const json &header, const io::Bytes &payload) {
  io::Bytes out(kMagic, kMagic + 4);
  out.push_back(std::uint8_t(type));
  const std::string h = header.dump();
  io::store_le<std::uint32_t>(out, std::uint32_t(h.size()));
  out.insert(out.end(), h.begin(), h.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

template <typename T> io::Bytes raw(const std::vector<T> &v) {
  io::Bytes out;
  out.reserve(v.size() * sizeof(T));
  for (T x : v) io::store_le<T>(out, x);
  return out;
}

template <typename T> std::vector<T> unraw(std::span<const std::uint8_t> b, std::size_t count) {
  if (b.size() != count * sizeof(T)) fail("MalformedArtifact", "payload size does not match the header");
  std::vector<T> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = io::load_le<T>(b.data() + i * sizeof(T));
  return v;
}

} // namespace

io::Bytes encode_artifact(const Artifact &a) {
  const PortType type = port_type_of(a);
  return std::visit(
      [&](const auto &x) -> io::Bytes {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ImageVolume>) {
          return pack(type, {{"geometry", geometry_json(x.geometry)}, {"meta", x.meta}}, raw(x.voxels));
        } else if constexpr (std::is_same_v<T, LabelMask>) {
          json names = json::object();
          for (const auto &[l, n] : x.names) names[std::to_string(l)] = n;
          return pack(type, {{"geometry", geometry_json(x.geometry)}, {"names", names}}, raw(x.labels));
        } else if constexpr (std::is_same_v<T, Table>) {
          return pack(type, table_json(x), {});
        } else if constexpr (std::is_same_v<T, reg::Transform>) {
          json h{{"kind", reg::to_string(x.kind)},   {"angles", arr(x.angles)}, {"linear", arr(x.linear.m)},
                 {"translation", arr(x.translation)}, {"center", arr(x.center)}, {"grid", geometry_json(x.grid)},
                 {"field_size", x.field.size()}};
          return pack(type, h, raw(x.field));
        } else if constexpr (std::is_same_v<T, ml::ModelArtifact>) {
          return pack(type, model_json(x), {});
        } else {
          return pack(type, {{"path", x.path}}, {});
        }
      },
      a);
}

Artifact decode_artifact(PortType type, std::span<const std::uint8_t> b) {
  if (b.size() < 9 || std::memcmp(b.data(), kMagic, 4) != 0) fail("MalformedArtifact", "bad artifact header");
  if (PortType(b[4]) != type) fail("TypeMismatch", std::string("stored artifact is not a ") + to_string(type));
  const std::uint32_t n = io::load_le<std::uint32_t>(b.data() + 5);
  if (9 + std::size_t(n) > b.size()) fail("MalformedArtifact", "truncated header");
  json h;
  try {
    h = json::parse(b.begin() + 9, b.begin() + 9 + n);
  } catch (const json::exception &e) {
    fail("MalformedArtifact", e.what());
  }
  const auto payload = b.subspan(9 + n);
  try {
    switch (type) {
    case PortType::Image: {
      ImageVolume v;
      v.geometry = geometry_from(h.at("geometry"));
      v.meta = h.at("meta").get<std::map<std::string, std::string>>();
      v.voxels = unraw<double>(payload, v.geometry.voxel_count());
      return v;
    }
    case PortType::Mask: {
      LabelMask m;
      m.geometry = geometry_from(h.at("geometry"));
      for (const auto &[k, v] : h.at("names").items()) m.names[std::uint32_t(std::stoul(k))] = v.get<std::string>();
      m.labels = unraw<std::uint32_t>(payload, m.geometry.voxel_count());
      return m;
    }
    case PortType::Table: return table_from(h);
    case PortType::Transform: {
      reg::Transform t;
      t.kind = reg::transform_kind_from_string(h.at("kind").get<std::string>());
      t.angles = arr<3>(h.at("angles"));
      t.linear.m = arr<9>(h.at("linear"));
      t.translation = arr<3>(h.at("translation"));
      t.center = arr<3>(h.at("center"));
      t.grid = geometry_from(h.at("grid"));
      t.field = unraw<double>(payload, h.at("field_size").get<std::size_t>());
      return t;
    }
    case PortType::Model: return model_from(h);
    case PortType::FilePath: return FilePath{h.at("path").get<std::string>()};
    }
  } catch (const json::exception &e) {
    fail("MalformedArtifact", e.what());
  }
  fail("MalformedArtifact", "unknown artifact type");
}

} // namespace voxflow::engine
