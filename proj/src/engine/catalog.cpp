#include "voxflow/engine/catalog.hpp"

#include <cmath>

#include "voxflow/core/error.hpp"

namespace voxflow::engine {

const char *to_string(ParamKind k) {
  switch (k) {
  case ParamKind::Number: return "number";
  case ParamKind::Integer: return "integer";
  case ParamKind::Bool: return "bool";
  case ParamKind::String: return "string";
  case ParamKind::Enum: return "enum";
  case ParamKind::Path: return "path";
  case ParamKind::NumberList: return "number_list";
  case ParamKind::StringList: return "string_list";
  }
  return "?";
}

std::filesystem::path NodeContext::input_path(const std::string &p) const {
  const std::filesystem::path path = str(p);
  return path.is_absolute() ? path : base_dir / path;
}

std::filesystem::path NodeContext::output_path(const std::string &p) const {
  const std::filesystem::path path = str(p);
  return path.is_absolute() ? path : out_dir / path;
}

const PortSpec *NodeType::input(const std::string &port) const {
  for (const auto &p : inputs)
    if (p.name == port) return &p;
  return nullptr;
}

const PortSpec *NodeType::output(const std::string &port) const {
  for (const auto &p : outputs)
    if (p.name == port) return &p;
  return nullptr;
}

const ParamSpec *NodeType::param(const std::string &n) const {
  for (const auto &p : params)
    if (p.name == n) return &p;
  return nullptr;
}

Json NodeType::describe() const {
  Json j{{"name", name}, {"version", version}, {"category", category}, {"description", description}};
  auto ports = [](const std::vector<PortSpec> &v) {
    Json a = Json::array();
    for (const auto &p : v) a.push_back({{"name", p.name}, {"type", to_string(p.type)}, {"required", p.required}});
    return a;
  };
  j["inputs"] = ports(inputs);
  j["outputs"] = ports(outputs);
  Json ps = Json::array();
  for (const auto &p : params) {
    Json e{{"name", p.name}, {"kind", to_string(p.kind)}, {"default", p.default_value}, {"required", p.required}};
    if (p.min) e["min"] = *p.min;
    if (p.max) e["max"] = *p.max;
    if (p.exclusive_min) e["exclusive_min"] = true;
    if (!p.choices.empty()) e["choices"] = p.choices;
    if (!p.unsupported.empty()) e["unsupported"] = p.unsupported;
    if (!p.doc.empty()) e["doc"] = p.doc;
    ps.push_back(std::move(e));
  }
  j["params"] = ps;
  return j;
}

void Catalog::add(NodeType t) {
  const std::string n = t.name;
  types_[n] = std::move(t);
}

const NodeType *Catalog::find(const std::string &name) const {
  auto it = types_.find(name);
  return it == types_.end() ? nullptr : &it->second;
}

const NodeType &Catalog::at(const std::string &name) const {
  const NodeType *t = find(name);
  if (!t) fail("UnknownNodeType", "'" + name + "' is not in the node catalog");
  return *t;
}

std::vector<const NodeType *> Catalog::types() const {
  std::vector<const NodeType *> out;
  for (const auto &[n, t] : types_) out.push_back(&t);
  return out;
}

Json Catalog::describe() const {
  Json a = Json::array();
  for (const auto &[n, t] : types_) a.push_back(t.describe());
  return a;
}

const Catalog &default_catalog() {
  static const Catalog c = [] {
    Catalog c;
    register_io_nodes(c);
    register_image_nodes(c);
    register_radiomics_nodes(c);
    register_ml_nodes(c);
    return c;
  }();
  return c;
}

namespace {

[[noreturn]] void violation(const NodeType &t, const ParamSpec &p, const std::string &why) {
  fail("ParamSchemaViolation", t.name + "." + p.name + ": " + why);
}

void check_range(const NodeType &t, const ParamSpec &p, double v) {
  if (!std::isfinite(v)) violation(t, p, "must be finite");
  if (p.min && (p.exclusive_min ? v <= *p.min : v < *p.min))
    violation(t, p, (p.exclusive_min ? "must be > " : "must be >= ") + format_number(*p.min));
  if (p.max && v > *p.max) violation(t, p, "must be <= " + format_number(*p.max));
}

Json canonical_value(const NodeType &t, const ParamSpec &p, const Json &v) {
  switch (p.kind) {
  case ParamKind::Number:
    if (!v.is_number()) violation(t, p, "expected a number");
    check_range(t, p, v.get<double>());
    return v.get<double>();
  case ParamKind::Integer: {
    if (!v.is_number()) violation(t, p, "expected an integer");
    const double d = v.get<double>();
    if (d != std::floor(d)) violation(t, p, "expected an integer");
    check_range(t, p, d);
    return static_cast<std::int64_t>(d);
  }
  case ParamKind::Bool:
    if (!v.is_boolean()) violation(t, p, "expected true or false");
    return v;
  case ParamKind::String:
  case ParamKind::Path:
    if (!v.is_string()) violation(t, p, "expected a string");
    return v;
  case ParamKind::Enum: {
    if (!v.is_string()) violation(t, p, "expected one of the listed choices");
    const auto s = v.get<std::string>();
    if (auto u = p.unsupported.find(s); u != p.unsupported.end()) violation(t, p, "'" + s + "' is not supported: " + u->second);
    if (std::find(p.choices.begin(), p.choices.end(), s) == p.choices.end())
      violation(t, p, "'" + s + "' is not an allowed choice");
    return v;
  }
  case ParamKind::NumberList: {
    if (!v.is_array()) violation(t, p, "expected a list of numbers");
    Json out = Json::array();
    for (const auto &e : v) {
      if (!e.is_number()) violation(t, p, "expected a list of numbers");
      check_range(t, p, e.get<double>());
      out.push_back(e.get<double>());
    }
    return out;
  }
  case ParamKind::StringList: {
    if (!v.is_array()) violation(t, p, "expected a list of strings");
    for (const auto &e : v) {
      if (!e.is_string()) violation(t, p, "expected a list of strings");
      if (!p.choices.empty() && std::find(p.choices.begin(), p.choices.end(), e.get<std::string>()) == p.choices.end())
        violation(t, p, "'" + e.get<std::string>() + "' is not an allowed choice");
    }
    return v;
  }
  }
  return v;
}

} // namespace

Json normalize_params(const NodeType &t, const Json &params) {
  if (!params.is_null() && !params.is_object()) fail("ParamSchemaViolation", t.name + ": params must be an object");
  if (params.is_object())
    for (const auto &[k, v] : params.items())
      if (!t.param(k)) fail("ParamSchemaViolation", t.name + " has no parameter '" + k + "'");
  Json out = Json::object();
  for (const auto &p : t.params) {
    const Json v = params.is_object() && params.contains(p.name) ? params.at(p.name) : p.default_value;
    out[p.name] = v.is_null() ? Json(nullptr) : canonical_value(t, p, v);
  }
  return out;
}

std::vector<std::string> param_findings(const NodeType &t, const Json &params) {
  std::vector<std::string> out;
  for (const auto &p : t.params)
    if (p.required && (!params.contains(p.name) || params.at(p.name).is_null()))
      out.push_back("required parameter '" + p.name + "' is not set");
  return out;
}

} // namespace voxflow::engine
