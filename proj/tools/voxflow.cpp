#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "voxflow/core/error.hpp"
#include "voxflow/engine/executor.hpp"
#include "voxflow/io/bytes.hpp"
#include "voxflow/service/bundled.hpp"
#include "voxflow/service/server.hpp"

using namespace voxflow;
namespace fs = std::filesystem;

namespace {

enum Exit { Ok = 0, Invalid = 2, ExecFailed = 3, IoFailed = 4 };

int exit_for(const Error &e) {
  const std::string k = e.kind();
  if (k == "IoFailure" || k == "EmptyFile") return IoFailed;
  if (k == "ValidationFailed" || k == "MalformedDocument" || k == "SchemaVersionUnsupported" || k == "UnknownNodeType" ||
      k == "UnknownNode" || k == "ParamSchemaViolation" || k == "TypeMismatch" || k == "CycleDetected" ||
      k == "UnknownPort")
    return Invalid;
  return ExecFailed;
}

engine::Workflow load(const fs::path &path) {
  const auto bytes = io::read_file(path);
  return engine::deserialize(std::string_view(reinterpret_cast<const char *>(bytes.data()), bytes.size()));
}

void print_findings(const engine::ValidationReport &r) {
  for (const auto &f : r.findings)
    std::cout << (f.node.empty() ? std::string("workflow") : f.node) << ": " << f.message << "\n";
}

std::string short_hex(const std::optional<Digest> &d) { return d ? d->hex().substr(0, 16) : "-"; }

void print_report(const engine::ExecutionReport &rep) {
  std::printf("%-8s %-26s %-10s %-6s %10s  %s\n", "node", "type", "status", "cache", "ms", "digest");
  for (const auto &n : rep.nodes) {
    std::printf("%-8s %-26s %-10s %-6s %10.1f  %s\n", n.id.c_str(), n.type_name.c_str(), engine::to_string(n.status),
                !n.cacheable ? "-" : n.cache_hit ? "hit" : "miss", n.wall_ms, short_hex(n.digest).c_str());
    for (const auto &w : n.warnings) std::printf("         warning: %s\n", w.c_str());
    if (!n.error.empty()) std::printf("         error: %s\n", n.error.c_str());
  }
  if (rep.cancelled) std::printf("run cancelled\n");
}

struct RunArgs {
  std::string workflow;
  std::string node;
  std::string scope = "all";
  std::optional<std::uint64_t> seed;
  std::string store;
  std::string out;
  bool json = false;
};

int cmd_run(const RunArgs &a) {
  auto w = load(a.workflow);
  if (a.seed) w.seed = *a.seed;
  std::string scope = a.scope;
  if (!a.node.empty() && scope == "all") scope = "node";
  if (scope != "all" && a.node.empty()) fail("ParamSchemaViolation", "--scope " + scope + " needs --node");
  if (!a.node.empty() && !w.find(a.node)) fail("UnknownNode", "no node '" + a.node + "' in " + a.workflow);

  engine::ArtifactStore store(a.store.empty() ? service::default_store_dir() : fs::path(a.store),
                              service::store_budget_from_env());
  engine::ExecOptions opt;
  opt.base_dir = fs::absolute(a.workflow).parent_path();
  opt.out_dir = a.out.empty() ? opt.base_dir : fs::path(a.out);
  const auto rep = engine::execute(w, engine::scope_from_string(scope, a.node), store, opt);
  if (a.json)
    std::cout << rep.to_json().dump(2) << "\n";
  else
    print_report(rep);
  if (rep.ok()) return Ok;
  for (const auto &n : rep.nodes)
    if (n.error.rfind("IoFailure", 0) == 0) return IoFailed;
  return ExecFailed;
}

int cmd_validate(const std::string &path) {
  const auto r = engine::validate(load(path));
  print_findings(r);
  if (!r.ok()) return Invalid;
  std::cout << "ok\n";
  return Ok;
}

int cmd_describe(const std::string &type) {
  const auto *t = engine::default_catalog().find(type);
  if (!t) fail("UnknownNodeType", "no node type '" + type + "'");
  std::cout << t->describe().dump(2) << "\n";
  return Ok;
}

int cmd_catalog() {
  for (const auto *t : engine::default_catalog().types()) std::cout << t->name << "\n";
  return Ok;
}

int cmd_serve(const std::string &host, int port, const std::string &store, const std::string &base) {
  service::ServiceConfig cfg;
  if (!store.empty()) cfg.store_dir = store;
  cfg.store_budget_bytes = service::store_budget_from_env();
  cfg.resources = service::resource_config_from_env();
  cfg.base_dir = base;
  cfg.out_dir = base;
  service::Service svc(cfg);
  const int p = svc.bind(host, port);
  if (p <= 0) fail("IoFailure", "cannot bind " + host + ":" + std::to_string(port));
  std::cout << "listening on http://" << host << ":" << p << std::endl;
  svc.listen();
  return Ok;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"voxflow: reproducible imaging and radiomics workflows"};
  app.require_subcommand(1);

  RunArgs run;
  auto *run_cmd = app.add_subcommand("run", "execute a workflow file");
  run_cmd->add_option("workflow", run.workflow, "workflow JSON")->required();
  run_cmd->add_option("--node", run.node, "run this node (its ancestors come from cache when possible)");
  run_cmd->add_option("--scope", run.scope, "all | node | upto")->check(CLI::IsMember({"all", "node", "upto"}));
  run_cmd->add_option("--seed", run.seed, "override the workflow seed");
  run_cmd->add_option("--store", run.store, "artifact store directory");
  run_cmd->add_option("--out", run.out, "directory for writer outputs");
  run_cmd->add_flag("--json-report", run.json, "print the report as JSON");

  std::string path;
  auto *validate_cmd = app.add_subcommand("validate", "check a workflow file");
  validate_cmd->add_option("workflow", path)->required();

  std::string type;
  auto *describe_cmd = app.add_subcommand("describe", "print a node type's ports and parameters");
  describe_cmd->add_option("type", type)->required();

  auto *catalog_cmd = app.add_subcommand("catalog", "list node types");

  std::string host = "127.0.0.1", store, base = ".";
  int port = 8765;
  auto *serve_cmd = app.add_subcommand("serve", "start the local HTTP service");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--store", store);
  serve_cmd->add_option("--base-dir", base, "directory relative reader and writer paths resolve against");

  std::string demo_dir;
  auto *demo_cmd = app.add_subcommand("demo", "write synthetic inputs and the bundled workflows");
  demo_cmd->add_option("dir", demo_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : Invalid;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*validate_cmd) return cmd_validate(path);
    if (*describe_cmd) return cmd_describe(type);
    if (*catalog_cmd) return cmd_catalog();
    if (*serve_cmd) return cmd_serve(host, port, store, base);
    if (*demo_cmd) {
      service::write_demo(demo_dir);
      for (const auto &b : service::bundled_workflows()) std::cout << (fs::path(demo_dir) / b.file).string() << "\n";
      return Ok;
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExecFailed;
  }
  return Ok;
}
