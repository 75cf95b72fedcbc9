#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "voxflow/engine/catalog.hpp"

namespace voxflow::engine {

struct NodeSpec {
  std::string id;
  std::string type_name;
  int version = 1;
  Json params = Json::object();
  std::array<double, 2> position{0, 0}; // editor only
  friend bool operator==(const NodeSpec &, const NodeSpec &) = default;
};

struct PortRef {
  std::string node;
  std::string port;
  friend auto operator<=>(const PortRef &, const PortRef &) = default;
};

struct Edge {
  PortRef from, to;
  friend auto operator<=>(const Edge &, const Edge &) = default;
};

constexpr int kSchemaVersion = 1;

// Nodes are kept ordered by numeric id and edges sorted, so structurally
// equal workflows compare equal.
struct Workflow {
  int schema_version = kSchemaVersion;
  std::string name = "untitled";
  std::uint64_t seed = 0;
  std::vector<NodeSpec> nodes;
  std::vector<Edge> edges;

  const NodeSpec *find(const std::string &id) const;
  const NodeSpec &node(const std::string &id) const; // UnknownNode
  friend bool operator==(const Workflow &, const Workflow &) = default;
};

// "n12" -> 12; 0 for ids outside the engine scheme.
std::size_t node_index(const std::string &id);

std::string add_node(Workflow &w, const std::string &type_name, const Json &params = Json::object(),
                     std::array<double, 2> position = {0, 0}, const Catalog &c = default_catalog());
Edge connect(Workflow &w, const PortRef &from, const PortRef &to, const Catalog &c = default_catalog());
void disconnect(Workflow &w, const PortRef &to);
void remove_node(Workflow &w, const std::string &id);
void set_params(Workflow &w, const std::string &id, const Json &params, const Catalog &c = default_catalog());
void set_position(Workflow &w, const std::string &id, std::array<double, 2> position);

// Kahn's algorithm, ready nodes taken in id order.
std::vector<std::string> topological_order(const Workflow &w);
std::vector<std::string> ancestors(const Workflow &w, const std::string &id);   // excluding id, topo order
std::vector<std::string> descendants(const Workflow &w, const std::string &id); // excluding id, topo order

struct Finding {
  std::string node; // empty for workflow-level findings
  std::string message;
  friend bool operator==(const Finding &, const Finding &) = default;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const { return findings.empty(); }
};

// Reports unconnected required inputs, parameter violations, dangling or
// mistyped edges, cycles, and nodes with no path to or from any other node
// in a multi-node workflow.
ValidationReport validate(const Workflow &w, const Catalog &c = default_catalog());

struct HashContext {
  std::filesystem::path base_dir; // resolves reader paths for content hashing
};

// Merkle digests of every node: SHA-256 over the canonical encoding of
// type, version, params, (port, upstream digest) pairs, plus the derived
// seed for stochastic nodes and input-file digests for readers.
std::map<std::string, Digest> content_hashes(const Workflow &w, const HashContext &ctx = {},
                                             const Catalog &c = default_catalog());
Digest content_hash(const Workflow &w, const std::string &id, const HashContext &ctx = {},
                    const Catalog &c = default_catalog());

// Low 64 bits of SHA-256(seed as 8 little-endian bytes || node id).
std::uint64_t node_seed(std::uint64_t workflow_seed, const std::string &node_id);

// Canonical JSON: sorted keys, two-space indent, LF, trailing newline.
std::string serialize(const Workflow &w);
// Errors: MalformedDocument (with line), SchemaVersionUnsupported,
// UnknownNodeType, ParamSchemaViolation, TypeMismatch, CycleDetected.
Workflow deserialize(std::string_view text, const Catalog &c = default_catalog());

} // namespace voxflow::engine
