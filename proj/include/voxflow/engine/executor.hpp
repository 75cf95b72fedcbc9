#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "voxflow/core/cancel.hpp"
#include "voxflow/engine/store.hpp"
#include "voxflow/engine/workflow.hpp"

namespace voxflow::engine {

enum class NodeStatus { Idle, Stale, Running, Done, Error, Cancelled };
const char *to_string(NodeStatus s);

struct NodeState {
  NodeStatus status = NodeStatus::Idle;
  std::optional<Digest> digest;
  std::optional<std::string> error;
  std::map<std::string, ArtifactRef> outputs;
  std::vector<std::string> warnings;
};

struct Scope {
  enum Kind { All, Node, UpTo } kind = All;
  std::string node;
  // Node(id): ancestors are served from cache when possible and id itself
  // always recomputes. UpTo(id): id and its ancestors, cache everywhere.
  static Scope all() { return {}; }
  static Scope only(std::string id) { return {Node, std::move(id)}; }
  static Scope up_to(std::string id) { return {UpTo, std::move(id)}; }
};
Scope scope_from_string(const std::string &kind, const std::string &node = {});

struct Event {
  std::uint64_t seq = 0;
  std::string node;
  NodeStatus status = NodeStatus::Idle;
  std::string message;
  bool cache_hit = false;
};
using EventSink = std::function<void(const Event &)>;

struct NodeRun {
  std::string id;
  std::string type_name;
  NodeStatus status = NodeStatus::Idle;
  std::optional<Digest> digest;
  std::map<std::string, ArtifactRef> outputs;
  double wall_ms = 0;
  bool cache_hit = false;
  bool cacheable = true; // writers always run
  std::string error;
  std::vector<std::string> warnings;
};

struct ExecutionReport {
  std::vector<NodeRun> nodes; // execution order
  bool cancelled = false;
  bool ok() const;
  std::size_t cache_hits() const;
  const NodeRun *find(const std::string &id) const;
  Json to_json() const;
};

struct ExecOptions {
  std::filesystem::path base_dir;
  std::filesystem::path out_dir;
  std::shared_ptr<CancelFlag> cancel;
  EventSink on_event;
};

// Nodes a scope touches: everything, or the node plus its ancestors.
std::set<std::string> scope_nodes(const Workflow &w, const Scope &scope);
// ValidationFailed when the scope's induced subgraph has findings.
void require_runnable(const Workflow &w, const Scope &scope, const Catalog &c = default_catalog());

// Runs the scope's nodes in topological order. Node failures are recorded,
// not thrown; strict descendants of a failed node end Stale. Throws
// ValidationFailed when the induced subgraph has findings.
ExecutionReport execute(const Workflow &w, const Scope &scope, ArtifactStore &store, const ExecOptions &opt,
                        std::map<std::string, NodeState> *states = nullptr, const Catalog &c = default_catalog());

// Loads a node output produced by a previous run.
Artifact load_output(const ArtifactStore &store, const NodeState &state, const std::string &port);

} // namespace voxflow::engine
