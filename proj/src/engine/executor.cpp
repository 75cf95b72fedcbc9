#include "voxflow/engine/executor.hpp"

#include <chrono>
#include <set>

#include "voxflow/core/error.hpp"

namespace voxflow::engine {

const char *to_string(NodeStatus s) {
  switch (s) {
  case NodeStatus::Idle: return "Idle";
  case NodeStatus::Stale: return "Stale";
  case NodeStatus::Running: return "Running";
  case NodeStatus::Done: return "Done";
  case NodeStatus::Error: return "Error";
  case NodeStatus::Cancelled: return "Cancelled";
  }
  return "?";
}

Scope scope_from_string(const std::string &kind, const std::string &node) {
  if (kind == "all" || kind.empty()) return Scope::all();
  if (node.empty()) fail("ParamSchemaViolation", "scope '" + kind + "' needs a node id");
  if (kind == "node") return Scope::only(node);
  if (kind == "up_to") return Scope::up_to(node);
  fail("ParamSchemaViolation", "unknown scope '" + kind + "'");
}

bool ExecutionReport::ok() const {
  if (cancelled) return false;
  for (const auto &n : nodes)
    if (n.status != NodeStatus::Done) return false;
  return true;
}

std::size_t ExecutionReport::cache_hits() const {
  std::size_t k = 0;
  for (const auto &n : nodes) k += n.cache_hit;
  return k;
}

const NodeRun *ExecutionReport::find(const std::string &id) const {
  for (const auto &n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

Json ExecutionReport::to_json() const {
  Json nodes_j = Json::array();
  for (const auto &n : nodes) {
    Json outs = Json::object();
    for (const auto &[port, r] : n.outputs)
      outs[port] = {{"digest", r.digest.hex()}, {"type", to_string(r.type)}, {"size", r.size_bytes}};
    nodes_j.push_back({{"id", n.id},
                       {"type_name", n.type_name},
                       {"status", to_string(n.status)},
                       {"digest", n.digest ? Json(n.digest->hex()) : Json(nullptr)},
                       {"outputs", outs},
                       {"wall_ms", n.wall_ms},
                       {"cache_hit", n.cache_hit},
                       {"error", n.error.empty() ? Json(nullptr) : Json(n.error)},
                       {"warnings", n.warnings}});
  }
  return {{"ok", ok()}, {"cancelled", cancelled}, {"cache_hits", cache_hits()}, {"nodes", nodes_j}};
}

Artifact load_output(const ArtifactStore &store, const NodeState &state, const std::string &port) {
  auto it = state.outputs.find(port);
  if (it == state.outputs.end()) fail("ArtifactNotFound", "node has no output '" + port + "'");
  return store.get(it->second);
}

std::set<std::string> scope_nodes(const Workflow &w, const Scope &scope) {
  std::set<std::string> subset;
  if (scope.kind == Scope::All) {
    for (const auto &n : w.nodes) subset.insert(n.id);
  } else {
    w.node(scope.node);
    subset.insert(scope.node);
    for (const auto &a : ancestors(w, scope.node)) subset.insert(a);
  }
  return subset;
}

void require_runnable(const Workflow &w, const Scope &scope, const Catalog &c) {
  const auto subset = scope_nodes(w, scope);
  std::string problems;
  for (const auto &f : validate(w, c).findings)
    if (f.node.empty() || subset.count(f.node)) problems += (f.node.empty() ? "" : f.node + ": ") + f.message + "; ";
  if (!problems.empty()) fail("ValidationFailed", problems.substr(0, problems.size() - 2));
}

ExecutionReport execute(const Workflow &w, const Scope &scope, ArtifactStore &store, const ExecOptions &opt,
                        std::map<std::string, NodeState> *states_in, const Catalog &c) {
  std::map<std::string, NodeState> local;
  auto &states = states_in ? *states_in : local;

  const auto subset = scope_nodes(w, scope);
  require_runnable(w, scope, c);

  const auto digests = content_hashes(w, HashContext{opt.base_dir}, c);
  std::uint64_t seq = 0;
  auto emit = [&](const std::string &id, NodeStatus s, const std::string &msg = {}, bool hit = false) {
    if (opt.on_event) opt.on_event(Event{++seq, id, s, msg, hit});
  };

  ExecutionReport rep;
  std::map<std::string, Artifact> memo; // artifacts produced or loaded in this run, by digest hex
  std::vector<Digest> pinned;
  std::set<std::string> blocked; // descendants of failed/cancelled nodes

  for (const auto &id : topological_order(w)) {
    if (!subset.count(id)) continue;
    const NodeSpec &n = w.node(id);
    const NodeType &t = c.at(n.type_name);
    NodeState &st = states[id];
    NodeRun run;
    run.id = id;
    run.type_name = n.type_name;
    run.digest = digests.at(id);
    run.cacheable = !t.side_effect;

    if (rep.cancelled) break; // untouched nodes keep their previous state
    if (opt.cancel && opt.cancel->requested()) {
      // the node that would have run next is the one the stop lands on
      rep.cancelled = true;
      st.status = run.status = NodeStatus::Cancelled;
      st.error = run.error = "cancelled";
      st.outputs.clear();
      emit(id, NodeStatus::Cancelled, run.error);
      rep.nodes.push_back(std::move(run));
      break;
    }
    if (blocked.count(id)) {
      st.status = run.status = NodeStatus::Stale;
      run.error = "upstream node failed";
      emit(id, NodeStatus::Stale, run.error);
      rep.nodes.push_back(std::move(run));
      continue;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const bool force = scope.kind == Scope::Node && scope.node == id;
    std::optional<std::map<std::string, ArtifactRef>> cached;
    if (run.cacheable && !force) cached = store.lookup_outputs(*run.digest);

    st.status = NodeStatus::Running;
    st.digest = run.digest;
    st.error.reset();
    emit(id, NodeStatus::Running);

    if (cached) {
      run.outputs = *cached;
      run.cache_hit = true;
      run.status = NodeStatus::Done;
    } else {
      std::map<std::string, Artifact> inputs;
      std::vector<std::string> warnings;
      try {
        for (const auto &e : w.edges) {
          if (e.to.node != id) continue;
          const ArtifactRef &r = states.at(e.from.node).outputs.at(e.from.port);
          auto m = memo.find(r.digest.hex());
          if (m == memo.end()) m = memo.emplace(r.digest.hex(), store.get(r)).first;
          if (port_type_of(m->second) != t.input(e.to.port)->type) fail("TypeMismatch", "input " + e.to.port);
          inputs.emplace(e.to.port, m->second);
        }
        const Json params = normalize_params(t, n.params);
        NodeContext ctx{inputs, params, node_seed(w.seed, id), opt.base_dir, opt.out_dir, {}};
        Outputs outs;
        {
          ScopedCancelFlag guard(opt.cancel ? opt.cancel : std::make_shared<CancelFlag>());
          outs = t.run(ctx);
        }
        warnings = std::move(ctx.warnings);
        for (const auto &p : t.outputs) {
          auto it = outs.find(p.name);
          if (it == outs.end()) fail("MissingOutput", "node produced no '" + p.name + "'");
          if (port_type_of(it->second) != p.type) fail("TypeMismatch", "output " + p.name);
          const ArtifactRef r = store.put(it->second);
          pinned.push_back(r.digest);
          run.outputs[p.name] = r;
          memo.emplace(r.digest.hex(), std::move(it->second));
        }
        if (run.cacheable) store.record_outputs(*run.digest, run.outputs);
        run.status = NodeStatus::Done;
        run.warnings = std::move(warnings);
      } catch (const Cancelled &) {
        run.status = NodeStatus::Cancelled;
        run.error = "cancelled";
        rep.cancelled = true;
      } catch (const Error &e) {
        run.status = NodeStatus::Error;
        run.error = e.what();
      } catch (const std::exception &e) {
        run.status = NodeStatus::Error;
        run.error = std::string("InternalError: ") + e.what();
      }
    }
    run.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    st.status = run.status;
    st.warnings = run.warnings;
    if (run.status == NodeStatus::Done) {
      st.outputs = run.outputs;
      for (const auto &[p, r] : run.outputs) pinned.push_back(r.digest);
    } else {
      st.outputs.clear();
      st.error = run.error;
      for (const auto &d : descendants(w, id)) blocked.insert(d);
    }
    std::string msg = run.error;
    for (const auto &wmsg : run.warnings) msg += (msg.empty() ? "" : "; ") + wmsg;
    emit(id, run.status, msg, run.cache_hit);
    rep.nodes.push_back(std::move(run));
  }
  store.evict(pinned);
  return rep;
}

} // namespace voxflow::engine
