#include "voxflow/engine/workflow.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <set>

#include "voxflow/core/error.hpp"
#include "voxflow/io/bytes.hpp"

namespace voxflow::engine {

namespace fs = std::filesystem;

std::size_t node_index(const std::string &id) {
  if (id.size() < 2 || id[0] != 'n' || id.size() > 19) return 0;
  std::size_t v = 0;
  for (std::size_t i = 1; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') return 0;
    v = v * 10 + std::size_t(id[i] - '0');
  }
  return v;
}

namespace {

bool id_less(const std::string &a, const std::string &b) {
  const auto ia = node_index(a), ib = node_index(b);
  return ia != ib ? ia < ib : a < b;
}

bool port_less(const PortRef &a, const PortRef &b) {
  if (a.node != b.node) return id_less(a.node, b.node);
  return a.port < b.port;
}

bool edge_less(const Edge &a, const Edge &b) {
  if (a.from != b.from) return port_less(a.from, b.from);
  return port_less(a.to, b.to);
}

void sort_workflow(Workflow &w) {
  std::sort(w.nodes.begin(), w.nodes.end(), [](const NodeSpec &a, const NodeSpec &b) { return id_less(a.id, b.id); });
  std::sort(w.edges.begin(), w.edges.end(), edge_less);
}

// Nodes reachable from `start` along edge direction (forward) or against it.
std::set<std::string> reach(const Workflow &w, const std::string &start, bool forward) {
  std::set<std::string> seen;
  std::deque<std::string> q{start};
  while (!q.empty()) {
    const auto cur = q.front();
    q.pop_front();
    for (const auto &e : w.edges) {
      const auto &a = forward ? e.from.node : e.to.node;
      const auto &b = forward ? e.to.node : e.from.node;
      if (a == cur && seen.insert(b).second) q.push_back(b);
    }
  }
  return seen;
}

std::vector<std::string> in_topo_order(const Workflow &w, const std::set<std::string> &subset) {
  std::vector<std::string> out;
  for (const auto &id : topological_order(w))
    if (subset.count(id)) out.push_back(id);
  return out;
}

} // namespace

const NodeSpec *Workflow::find(const std::string &id) const {
  for (const auto &n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const NodeSpec &Workflow::node(const std::string &id) const {
  const NodeSpec *n = find(id);
  if (!n) fail("UnknownNode", "no node '" + id + "' in workflow");
  return *n;
}

std::string add_node(Workflow &w, const std::string &type_name, const Json &params, std::array<double, 2> position,
                     const Catalog &c) {
  const NodeType &t = c.at(type_name);
  NodeSpec n;
  std::size_t k = 0;
  for (const auto &x : w.nodes) k = std::max(k, node_index(x.id));
  n.id = "n" + std::to_string(k + 1);
  n.type_name = type_name;
  n.version = t.version;
  n.params = normalize_params(t, params);
  n.position = position;
  w.nodes.push_back(std::move(n));
  return w.nodes.back().id;
}

Edge connect(Workflow &w, const PortRef &from, const PortRef &to, const Catalog &c) {
  const NodeType &ft = c.at(w.node(from.node).type_name);
  const NodeType &tt = c.at(w.node(to.node).type_name);
  const PortSpec *out = ft.output(from.port);
  if (!out) fail("UnknownPort", ft.name + " has no output '" + from.port + "'");
  const PortSpec *in = tt.input(to.port);
  if (!in) fail("UnknownPort", tt.name + " has no input '" + to.port + "'");
  if (out->type != in->type)
    fail("TypeMismatch", std::string("expected ") + to_string(in->type) + ", got " + to_string(out->type));
  for (const auto &e : w.edges)
    if (e.to == to) fail("PortOccupied", to.node + "." + to.port + " already has an incoming edge");
  if (from.node == to.node || reach(w, to.node, true).count(from.node))
    fail("CycleDetected", "edge " + from.node + " -> " + to.node + " would close a cycle");
  Edge e{from, to};
  w.edges.insert(std::upper_bound(w.edges.begin(), w.edges.end(), e, edge_less), e);
  return e;
}

void disconnect(Workflow &w, const PortRef &to) {
  auto it = std::find_if(w.edges.begin(), w.edges.end(), [&](const Edge &e) { return e.to == to; });
  if (it == w.edges.end()) fail("UnknownEdge", "no edge into " + to.node + "." + to.port);
  w.edges.erase(it);
}

void remove_node(Workflow &w, const std::string &id) {
  w.node(id);
  std::erase_if(w.edges, [&](const Edge &e) { return e.from.node == id || e.to.node == id; });
  std::erase_if(w.nodes, [&](const NodeSpec &n) { return n.id == id; });
}

void set_params(Workflow &w, const std::string &id, const Json &params, const Catalog &c) {
  w.node(id);
  for (auto &n : w.nodes)
    if (n.id == id) n.params = normalize_params(c.at(n.type_name), params);
}

void set_position(Workflow &w, const std::string &id, std::array<double, 2> position) {
  w.node(id);
  for (auto &n : w.nodes)
    if (n.id == id) n.position = position;
}

std::vector<std::string> topological_order(const Workflow &w) {
  std::map<std::string, std::size_t> indegree;
  for (const auto &n : w.nodes) indegree[n.id] = 0;
  for (const auto &e : w.edges) ++indegree[e.to.node];
  auto cmp = [](const std::string &a, const std::string &b) { return id_less(b, a); };
  std::vector<std::string> ready;
  for (const auto &[id, d] : indegree)
    if (d == 0) ready.push_back(id);
  std::make_heap(ready.begin(), ready.end(), cmp);
  std::vector<std::string> out;
  while (!ready.empty()) {
    std::pop_heap(ready.begin(), ready.end(), cmp);
    const std::string cur = ready.back();
    ready.pop_back();
    out.push_back(cur);
    for (const auto &e : w.edges)
      if (e.from.node == cur && --indegree[e.to.node] == 0) {
        ready.push_back(e.to.node);
        std::push_heap(ready.begin(), ready.end(), cmp);
      }
  }
  if (out.size() != indegree.size()) fail("CycleDetected", "workflow graph contains a cycle");
  return out;
}

std::vector<std::string> ancestors(const Workflow &w, const std::string &id) {
  w.node(id);
  return in_topo_order(w, reach(w, id, false));
}

std::vector<std::string> descendants(const Workflow &w, const std::string &id) {
  w.node(id);
  return in_topo_order(w, reach(w, id, true));
}

ValidationReport validate(const Workflow &w, const Catalog &c) {
  ValidationReport r;
  auto add = [&](const std::string &node, const std::string &msg) { r.findings.push_back({node, msg}); };
  std::set<std::string> ids;
  for (const auto &n : w.nodes)
    if (!ids.insert(n.id).second) add(n.id, "duplicate node id");

  std::map<std::string, std::set<std::string>> connected_inputs;
  std::set<std::string> touched;
  for (const auto &e : w.edges) {
    const NodeSpec *a = w.find(e.from.node), *b = w.find(e.to.node);
    if (!a || !b) {
      add("", "edge " + e.from.node + "." + e.from.port + " -> " + e.to.node + "." + e.to.port + " references a missing node");
      continue;
    }
    touched.insert(a->id);
    touched.insert(b->id);
    const NodeType *ta = c.find(a->type_name), *tb = c.find(b->type_name);
    if (!ta || !tb) continue;
    const PortSpec *out = ta->output(e.from.port), *in = tb->input(e.to.port);
    if (!out) add(a->id, "no output port '" + e.from.port + "'");
    if (!in) add(b->id, "no input port '" + e.to.port + "'");
    if (out && in && out->type != in->type)
      add(b->id, std::string("input '") + in->name + "' expects " + to_string(in->type) + ", got " + to_string(out->type));
    if (!connected_inputs[b->id].insert(e.to.port).second) add(b->id, "input '" + e.to.port + "' has several edges");
  }

  for (const auto &n : w.nodes) {
    const NodeType *t = c.find(n.type_name);
    if (!t) {
      add(n.id, "unknown node type '" + n.type_name + "'");
      continue;
    }
    if (n.version != t->version) add(n.id, "node version " + std::to_string(n.version) + " is not supported");
    try {
      const Json p = normalize_params(*t, n.params);
      for (const auto &f : param_findings(*t, p)) add(n.id, f);
    } catch (const Error &e) {
      add(n.id, e.what());
    }
    for (const auto &in : t->inputs)
      if (in.required && !connected_inputs[n.id].count(in.name)) add(n.id, "required input '" + in.name + "' unconnected");
    if (w.nodes.size() > 1 && !touched.count(n.id)) add(n.id, "node is unreachable: no edges connect it to the workflow");
  }
  try {
    topological_order(w);
  } catch (const Error &e) {
    add("", e.what());
  }
  return r;
}

std::uint64_t node_seed(std::uint64_t workflow_seed, const std::string &node_id) {
  io::Bytes b;
  io::store_le<std::uint64_t>(b, workflow_seed);
  b.insert(b.end(), node_id.begin(), node_id.end());
  return sha256(b).low64();
}

namespace {

std::string file_digest(const fs::path &p) {
  std::error_code ec;
  if (fs::is_regular_file(p, ec)) return sha256(io::read_file(p)).hex();
  if (fs::is_directory(p, ec)) {
    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(p))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    Sha256 h;
    for (const auto &f : files) h.update(f.filename().string()).update("\n").update(sha256(io::read_file(f)).hex());
    return h.finish().hex();
  }
  return "missing";
}

} // namespace

std::map<std::string, Digest> content_hashes(const Workflow &w, const HashContext &ctx, const Catalog &c) {
  std::map<std::string, Digest> out;
  for (const auto &id : topological_order(w)) {
    const NodeSpec &n = w.node(id);
    const NodeType &t = c.at(n.type_name);
    Json inputs = Json::array();
    std::vector<std::pair<std::string, std::string>> in;
    for (const auto &e : w.edges)
      if (e.to.node == id) in.emplace_back(e.to.port, out.at(e.from.node).hex() + ":" + e.from.port);
    std::sort(in.begin(), in.end());
    for (const auto &[port, up] : in) inputs.push_back({port, up});
    Json doc{{"type", n.type_name}, {"version", n.version}, {"params", normalize_params(t, n.params)}, {"inputs", inputs}};
    if (t.uses_seed) doc["seed"] = node_seed(w.seed, id);
    for (const auto &p : t.path_params) {
      const Json &v = n.params.contains(p) ? n.params.at(p) : Json(nullptr);
      if (!v.is_string()) continue;
      const fs::path path = v.get<std::string>();
      doc["files"][p] = file_digest(path.is_absolute() ? path : ctx.base_dir / path);
    }
    out[id] = sha256(doc.dump());
  }
  return out;
}

Digest content_hash(const Workflow &w, const std::string &id, const HashContext &ctx, const Catalog &c) {
  w.node(id);
  return content_hashes(w, ctx, c).at(id);
}

std::string serialize(const Workflow &w) {
  Json nodes = Json::array(), edges = Json::array();
  Workflow s = w;
  sort_workflow(s);
  for (const auto &n : s.nodes)
    nodes.push_back({{"id", n.id},
                     {"type_name", n.type_name},
                     {"version", n.version},
                     {"params", n.params},
                     {"position", {n.position[0], n.position[1]}}});
  for (const auto &e : s.edges) edges.push_back({{"from", {e.from.node, e.from.port}}, {"to", {e.to.node, e.to.port}}});
  Json doc{{"schema_version", s.schema_version}, {"name", s.name}, {"seed", s.seed}, {"nodes", nodes}, {"edges", edges}};
  return doc.dump(2) + "\n";
}

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + std::size_t(std::count(text.begin(), text.begin() + long(byte), '\n'));
}

template <typename T> T field(const Json &j, const char *key, const char *where) {
  if (!j.is_object() || !j.contains(key)) fail("MalformedDocument", std::string(where) + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception &) {
    fail("MalformedDocument", std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

} // namespace

Workflow deserialize(std::string_view text, const Catalog &c) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error &e) {
    fail("MalformedDocument", "line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
  }
  if (!doc.is_object()) fail("MalformedDocument", "line 1: top level must be an object");
  const int version = field<int>(doc, "schema_version", "document");
  if (version != kSchemaVersion)
    fail("SchemaVersionUnsupported", "schema_version " + std::to_string(version) + " (supported: 1)");

  Workflow w;
  w.name = field<std::string>(doc, "name", "document");
  w.seed = field<std::uint64_t>(doc, "seed", "document");
  const Json nodes = field<Json>(doc, "nodes", "document");
  const Json edges = field<Json>(doc, "edges", "document");
  if (!nodes.is_array() || !edges.is_array()) fail("MalformedDocument", "'nodes' and 'edges' must be arrays");
  std::set<std::string> ids;
  for (const auto &j : nodes) {
    NodeSpec n;
    n.id = field<std::string>(j, "id", "node");
    if (!ids.insert(n.id).second) fail("MalformedDocument", "duplicate node id '" + n.id + "'");
    n.type_name = field<std::string>(j, "type_name", "node");
    n.version = field<int>(j, "version", "node");
    const auto pos = field<std::vector<double>>(j, "position", "node");
    if (pos.size() != 2) fail("MalformedDocument", "node " + n.id + ": position must have two entries");
    n.position = {pos[0], pos[1]};
    n.params = normalize_params(c.at(n.type_name), field<Json>(j, "params", "node"));
    w.nodes.push_back(std::move(n));
  }
  sort_workflow(w);
  for (const auto &j : edges) {
    const auto from = field<std::vector<std::string>>(j, "from", "edge");
    const auto to = field<std::vector<std::string>>(j, "to", "edge");
    if (from.size() != 2 || to.size() != 2) fail("MalformedDocument", "edge endpoints must be [node, port]");
    connect(w, {from[0], from[1]}, {to[0], to[1]}, c);
  }
  return w;
}

} // namespace voxflow::engine
