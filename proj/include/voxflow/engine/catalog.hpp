#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxflow/engine/artifact.hpp"

namespace voxflow::engine {

using Json = nlohmann::json;

enum class ParamKind { Number, Integer, Bool, String, Enum, Path, NumberList, StringList };
const char *to_string(ParamKind k);

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::Number;
  Json default_value; // null: no default
  bool required = false;
  std::optional<double> min, max; // numbers, integers, list elements
  bool exclusive_min = false;
  std::vector<std::string> choices; // Enum
  std::map<std::string, std::string> unsupported; // Enum values named for users but rejected, with the reason
  std::string doc;
};

struct PortSpec {
  std::string name;
  PortType type = PortType::Image;
  bool required = true;
};

struct NodeContext {
  const std::map<std::string, Artifact> &inputs;
  const Json &params;
  std::uint64_t seed = 0;
  std::filesystem::path base_dir; // relative reader paths
  std::filesystem::path out_dir;  // relative writer paths
  std::vector<std::string> warnings;

  template <typename T> const T &in(const std::string &port) const {
    return std::get<T>(inputs.at(port));
  }
  template <typename T> const T *opt(const std::string &port) const {
    auto it = inputs.find(port);
    return it == inputs.end() ? nullptr : &std::get<T>(it->second);
  }
  bool has(const std::string &p) const { return params.contains(p) && !params.at(p).is_null(); }
  double num(const std::string &p) const { return params.at(p).get<double>(); }
  long integer(const std::string &p) const { return params.at(p).get<long>(); }
  bool flag(const std::string &p) const { return params.at(p).get<bool>(); }
  std::string str(const std::string &p) const { return params.at(p).get<std::string>(); }
  std::vector<double> numbers(const std::string &p) const { return params.at(p).get<std::vector<double>>(); }
  std::vector<std::string> strings(const std::string &p) const {
    return params.at(p).get<std::vector<std::string>>();
  }
  std::filesystem::path input_path(const std::string &p) const;
  std::filesystem::path output_path(const std::string &p) const;
};

using Outputs = std::map<std::string, Artifact>;
using RunFn = std::function<Outputs(NodeContext &)>;

struct NodeType {
  std::string name;
  int version = 1;
  std::string category;
  std::string description;
  std::vector<PortSpec> inputs;
  std::vector<PortSpec> outputs;
  std::vector<ParamSpec> params;
  bool uses_seed = false;   // derived node seed enters the content hash
  bool side_effect = false; // writers: never served from cache
  std::vector<std::string> path_params; // input files whose bytes enter the content hash
  RunFn run;

  const PortSpec *input(const std::string &port) const;
  const PortSpec *output(const std::string &port) const;
  const ParamSpec *param(const std::string &name) const;
  Json describe() const;
};

class Catalog {
public:
  void add(NodeType t);
  const NodeType *find(const std::string &name) const;
  const NodeType &at(const std::string &name) const; // UnknownNodeType
  std::vector<const NodeType *> types() const;       // sorted by name
  Json describe() const;

private:
  std::map<std::string, NodeType> types_;
};

const Catalog &default_catalog();

// Unknown keys and type errors throw ParamSchemaViolation; absent keys take
// the default. Required parameters without a default may stay null here and
// are reported by validation instead.
Json normalize_params(const NodeType &t, const Json &params);
// Findings for a normalized parameter object (missing required values).
std::vector<std::string> param_findings(const NodeType &t, const Json &params);

// Registration hooks used by default_catalog().
void register_io_nodes(Catalog &c);
void register_image_nodes(Catalog &c);
void register_radiomics_nodes(Catalog &c);
void register_ml_nodes(Catalog &c);

} // namespace voxflow::engine
