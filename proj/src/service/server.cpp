#include "voxflow/service/server.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "voxflow/core/error.hpp"
#include "voxflow/engine/session.hpp"
#include "voxflow/service/render.hpp"

namespace voxflow::service {

using namespace engine;
using httplib::Request;
using httplib::Response;

int http_status(const std::string &kind) {
  if (kind == "UnknownWorkflow" || kind == "UnknownNode" || kind == "UnknownEdge" || kind == "ArtifactNotFound")
    return 404;
  if (kind == "RevisionConflict" || kind == "Busy" || kind == "NotRunning") return 409;
  if (kind == "TypeMismatch" || kind == "CycleDetected" || kind == "PortOccupied" || kind == "UnknownPort") return 422;
  return 400;
}

namespace {

void reply(Response &r, const Json &body, int status = 200) {
  r.status = status;
  r.set_content(body.dump(), "application/json");
}

void reply_error(Response &r, const std::string &kind, const std::string &message, int status) {
  reply(r, {{"error", kind}, {"message", message}}, status);
}

Json body_of(const Request &q) { return q.body.empty() ? Json::object() : Json::parse(q.body); }

std::uint64_t to_u64(const std::string &s, const char *what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size()) fail("ParamSchemaViolation", std::string(what) + " must be a non-negative integer");
  return v;
}

double to_double(const std::string &s, const char *what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) fail("ParamSchemaViolation", std::string(what) + " must be a number");
  return v;
}

Session::Rev revision_of(const Request &q, const Json &body) {
  if (body.is_object() && body.contains("revision") && !body.at("revision").is_null())
    return body.at("revision").get<std::uint64_t>();
  if (q.has_param("revision")) return to_u64(q.get_param_value("revision"), "revision");
  if (q.has_header("If-Match")) return to_u64(q.get_header_value("If-Match"), "If-Match");
  return std::nullopt;
}

PortRef port_ref(const Json &j) {
  if (!j.is_array() || j.size() != 2) fail("MalformedRequest", "port references are [node, port]");
  return {j[0].get<std::string>(), j[1].get<std::string>()};
}

Json ref_json(const ArtifactRef &r) {
  return {{"digest", r.digest.hex()}, {"type", to_string(r.type)}, {"size", r.size_bytes}};
}

Json state_json(const NodeState &s) {
  Json outs = Json::object();
  for (const auto &[p, r] : s.outputs) outs[p] = ref_json(r);
  return {{"status", to_string(s.status)},
          {"digest", s.digest ? Json(s.digest->hex()) : Json(nullptr)},
          {"error", s.error ? Json(*s.error) : Json(nullptr)},
          {"warnings", s.warnings},
          {"outputs", outs}};
}

Json event_json(const Event &e) {
  return {{"seq", e.seq},
          {"node", e.node.empty() ? Json(nullptr) : Json(e.node)},
          {"status", to_string(e.status)},
          {"message", e.message},
          {"cache_hit", e.cache_hit}};
}

std::string sse(const std::string &event, std::uint64_t id, const Json &data) {
  std::string out;
  if (id) out += "id: " + std::to_string(id) + "\n";
  return out + "event: " + event + "\ndata: " + data.dump() + "\n\n";
}

// "1:255,0,0,128;2:0,255,0,128"
std::map<std::uint32_t, Rgba> parse_colors(const std::string &s) {
  std::map<std::uint32_t, Rgba> out;
  std::size_t start = 0;
  while (start < s.size()) {
    auto end = s.find(';', start);
    if (end == std::string::npos) end = s.size();
    const auto item = s.substr(start, end - start);
    const auto colon = item.find(':');
    if (colon == std::string::npos) fail("ParamSchemaViolation", "colors entries are label:r,g,b,a");
    Rgba c{0, 0, 0, 255};
    std::size_t p = colon + 1;
    for (int k = 0; k < 4; ++k) {
      auto comma = item.find(',', p);
      if (comma == std::string::npos) comma = item.size();
      const auto v = to_u64(item.substr(p, comma - p), "colour component");
      if (v > 255) fail("ParamSchemaViolation", "colour components are 0..255");
      c[std::size_t(k)] = std::uint8_t(v);
      p = comma + 1;
      if (comma == item.size()) break;
    }
    out[std::uint32_t(to_u64(item.substr(0, colon), "label"))] = c;
    start = end + 1;
  }
  return out;
}

} // namespace

struct Service::Impl {
  ServiceConfig cfg;
  std::shared_ptr<ArtifactStore> store;
  httplib::Server http;
  std::mutex mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::uint64_t next_id = 1;
  std::thread listener;
  std::atomic<bool> stopping{false};

  std::shared_ptr<Session> session(const std::string &id) {
    std::lock_guard lk(mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) fail("UnknownWorkflow", "no workflow '" + id + "'");
    return it->second;
  }

  Artifact artifact(const std::string &hex) const { return store->get(Digest::from_hex(hex)); }

  Json workflow_json(const std::string &id, const Session &s) const {
    Json states = Json::object();
    for (const auto &[nid, st] : s.states()) states[nid] = state_json(st);
    return {{"id", id},
            {"revision", s.revision()},
            {"running", s.running()},
            {"workflow", Json::parse(serialize(s.workflow()))},
            {"states", states}};
  }

  template <typename F> httplib::Server::Handler guard(F fn) {
    return [fn](const Request &q, Response &r) {
      try {
        fn(q, r);
      } catch (const Error &e) {
        reply_error(r, e.kind(), e.what(), http_status(e.kind()));
      } catch (const Json::exception &e) {
        reply_error(r, "MalformedRequest", e.what(), 400);
      } catch (const std::exception &e) {
        reply_error(r, "InternalError", e.what(), 500);
      }
    };
  }

  void routes();
  void artifact_routes();
};

void Service::Impl::routes() {
  http.Get("/api/nodes", guard([](const Request &, Response &r) { reply(r, {{"nodes", default_catalog().describe()}}); }));
  http.Get(R"(/api/nodes/([^/]+))", guard([](const Request &q, Response &r) {
             const auto *t = default_catalog().find(q.matches[1]);
             if (!t) return reply_error(r, "UnknownNodeType", "no node type '" + std::string(q.matches[1]) + "'", 404);
             reply(r, t->describe());
           }));

  http.Get("/api/workflows", guard([this](const Request &, Response &r) {
             Json list = Json::array();
             std::lock_guard lk(mu);
             for (const auto &[id, s] : sessions)
               list.push_back({{"id", id}, {"name", s->workflow().name}, {"revision", s->revision()}, {"running", s->running()}});
             reply(r, {{"workflows", list}});
           }));

  // Body: {} | {name, seed} | {document: <workflow document>}, plus optional base_dir / out_dir.
  http.Post("/api/workflows", guard([this](const Request &q, Response &r) {
              const Json b = body_of(q);
              Workflow w;
              if (b.contains("document"))
                w = deserialize(b.at("document").is_string() ? b.at("document").get<std::string>() : b.at("document").dump());
              if (b.contains("name")) w.name = b.at("name").get<std::string>();
              if (b.contains("seed")) w.seed = b.at("seed").get<std::uint64_t>();
              ExecOptions opt;
              opt.base_dir = b.contains("base_dir") ? std::filesystem::path(b.at("base_dir").get<std::string>()) : cfg.base_dir;
              opt.out_dir = b.contains("out_dir") ? std::filesystem::path(b.at("out_dir").get<std::string>()) : cfg.out_dir;
              auto s = std::make_shared<Session>(std::move(w), store, opt);
              std::string id;
              {
                std::lock_guard lk(mu);
                id = "w" + std::to_string(next_id++);
                sessions[id] = s;
              }
              reply(r, workflow_json(id, *s), 201);
            }));

  http.Get(R"(/api/workflows/([^/]+))", guard([this](const Request &q, Response &r) {
             reply(r, workflow_json(q.matches[1], *session(q.matches[1])));
           }));

  http.Get(R"(/api/workflows/([^/]+)/document)", guard([this](const Request &q, Response &r) {
             r.set_content(serialize(session(q.matches[1])->workflow()), "application/json");
           }));

  // Replace the document, or update name / seed in place.
  http.Put(R"(/api/workflows/([^/]+))", guard([this](const Request &q, Response &r) {
             auto s = session(q.matches[1]);
             const Json b = body_of(q);
             Workflow w = b.contains("document")
                              ? deserialize(b.at("document").is_string() ? b.at("document").get<std::string>()
                                                                         : b.at("document").dump())
                              : s->workflow();
             if (b.contains("name")) w.name = b.at("name").get<std::string>();
             if (b.contains("seed")) w.seed = b.at("seed").get<std::uint64_t>();
             s->replace(std::move(w), revision_of(q, b));
             reply(r, workflow_json(q.matches[1], *s));
           }));

  http.Delete(R"(/api/workflows/([^/]+))", guard([this](const Request &q, Response &r) {
                std::shared_ptr<Session> s;
                {
                  std::lock_guard lk(mu);
                  auto it = sessions.find(q.matches[1]);
                  if (it == sessions.end()) fail("UnknownWorkflow", "no workflow '" + std::string(q.matches[1]) + "'");
                  s = it->second;
                  sessions.erase(it);
                }
                if (s->running()) {
                  try {
                    s->cancel();
                  } catch (const Error &) {
                  }
                }
                reply(r, {{"deleted", std::string(q.matches[1])}});
              }));

  http.Post(R"(/api/workflows/([^/]+)/nodes)", guard([this](const Request &q, Response &r) {
              auto s = session(q.matches[1]);
              const Json b = body_of(q);
              std::array<double, 2> pos{0, 0};
              if (b.contains("position")) pos = {b.at("position")[0].get<double>(), b.at("position")[1].get<double>()};
              const auto id = s->add_node(b.at("type_name").get<std::string>(), b.value("params", Json::object()), pos,
                                          revision_of(q, b));
              reply(r, {{"id", id}, {"revision", s->revision()}}, 201);
            }));

  http.Put(R"(/api/workflows/([^/]+)/nodes/([^/]+))", guard([this](const Request &q, Response &r) {
             auto s = session(q.matches[1]);
             const Json b = body_of(q);
             auto rev = revision_of(q, b);
             if (b.contains("params")) {
               s->set_params(q.matches[2], b.at("params"), rev);
               if (rev) rev = s->revision();
             }
             if (b.contains("position"))
               s->set_position(q.matches[2], {b.at("position")[0].get<double>(), b.at("position")[1].get<double>()}, rev);
             reply(r, {{"revision", s->revision()}});
           }));

  // Copies the full parameter set of {from} onto this node; types must match.
  http.Post(R"(/api/workflows/([^/]+)/nodes/([^/]+)/paste)", guard([this](const Request &q, Response &r) {
              auto s = session(q.matches[1]);
              const Json b = body_of(q);
              s->paste_params(b.at("from").get<std::string>(), q.matches[2], revision_of(q, b));
              reply(r, {{"revision", s->revision()}});
            }));

  http.Delete(R"(/api/workflows/([^/]+)/nodes/([^/]+))", guard([this](const Request &q, Response &r) {
                auto s = session(q.matches[1]);
                s->remove_node(q.matches[2], revision_of(q, Json::object()));
                reply(r, {{"revision", s->revision()}});
              }));

  http.Post(R"(/api/workflows/([^/]+)/edges)", guard([this](const Request &q, Response &r) {
              auto s = session(q.matches[1]);
              const Json b = body_of(q);
              const auto e = s->connect(port_ref(b.at("from")), port_ref(b.at("to")), revision_of(q, b));
              reply(r,
                    {{"from", {e.from.node, e.from.port}}, {"to", {e.to.node, e.to.port}}, {"revision", s->revision()}},
                    201);
            }));

  // DELETE /edges?node=n3&port=image removes the edge into that input.
  http.Delete(R"(/api/workflows/([^/]+)/edges)", guard([this](const Request &q, Response &r) {
                auto s = session(q.matches[1]);
                s->disconnect({q.get_param_value("node"), q.get_param_value("port")}, revision_of(q, Json::object()));
                reply(r, {{"revision", s->revision()}});
              }));

  http.Post(R"(/api/workflows/([^/]+)/run)", guard([this](const Request &q, Response &r) {
              auto s = session(q.matches[1]);
              const Json b = body_of(q);
              s->start(scope_from_string(b.value("scope", "all"), b.value("node", "")));
              reply(r, {{"started", true}, {"revision", s->revision()}}, 202);
            }));

  http.Post(R"(/api/workflows/([^/]+)/cancel)", guard([this](const Request &q, Response &r) {
              session(q.matches[1])->cancel();
              reply(r, {{"cancelled", true}});
            }));

  // Server-sent events. ?after=N (or Last-Event-ID) resumes; ?once=1 returns
  // what is pending and closes. A reader that fell behind the bounded log
  // gets a "resync" event carrying the current states.
  http.Get(R"(/api/workflows/([^/]+)/events)", guard([this](const Request &q, Response &r) {
             auto s = session(q.matches[1]);
             auto cursor = std::make_shared<std::uint64_t>(0);
             if (q.has_param("after"))
               *cursor = to_u64(q.get_param_value("after"), "after");
             else if (q.has_header("Last-Event-ID"))
               *cursor = to_u64(q.get_header_value("Last-Event-ID"), "Last-Event-ID");
             const bool once = q.get_param_value("once") == "1";
             r.set_header("Cache-Control", "no-cache");
             r.set_chunked_content_provider("text/event-stream", [this, s, cursor, once](std::size_t, httplib::DataSink &sink) {
               if (stopping) {
                 sink.done();
                 return true;
               }
               std::string out;
               const auto oldest = s->oldest_event_seq();
               if (*cursor + 1 < oldest) {
                 Json states = Json::object();
                 for (const auto &[nid, st] : s->states()) states[nid] = state_json(st);
                 out += sse("resync", 0, {{"states", states}});
                 *cursor = oldest - 1;
               }
               for (const auto &e : s->events_since(*cursor, once ? std::chrono::milliseconds(0) : std::chrono::milliseconds(500))) {
                 out += sse(e.node.empty() ? "run" : "status", e.seq, event_json(e));
                 *cursor = e.seq;
               }
               if (out.empty() && !once) out = ": keepalive\n\n";
               if (!out.empty() && !sink.write(out.data(), out.size())) return false;
               if (once) sink.done();
               return true;
             });
           }));

  http.Get("/api/status/resources", guard([this](const Request &, Response &r) {
             const auto st = resource_status(cfg.free_memory(), *store, cfg.resources);
             reply(r, {{"free_memory_bytes", st.free_memory_bytes},
                       {"artifact_store_used_bytes", st.artifact_store_used_bytes},
                       {"artifact_store_budget_bytes", st.artifact_store_budget_bytes},
                       {"warning", st.warning ? Json(*st.warning) : Json(nullptr)}});
           }));

  artifact_routes();
}

void Service::Impl::artifact_routes() {
  http.Get(R"(/api/artifacts/([0-9a-fA-F]+))", guard([this](const Request &q, Response &r) {
             const auto ref = store->ref(Digest::from_hex(std::string(q.matches[1])));
             if (!ref) fail("ArtifactNotFound", std::string(q.matches[1]));
             Json j = ref_json(*ref);
             const auto a = store->get(*ref);
             if (const auto *img = std::get_if<ImageVolume>(&a)) {
               j["dims"] = img->dims();
               j["spacing"] = img->geometry.spacing;
             } else if (const auto *m = std::get_if<LabelMask>(&a)) {
               j["dims"] = m->geometry.dims;
               Json names = Json::object();
               for (const auto &[l, n] : m->names) names[std::to_string(l)] = n;
               j["labels"] = names;
             } else if (const auto *t = std::get_if<Table>(&a)) {
               j["rows"] = t->row_count();
               j["columns"] = t->column_count();
             }
             reply(r, j);
           }));

  http.Get(R"(/api/artifacts/([0-9a-fA-F]+)/slice)", guard([this](const Request &q, Response &r) {
             const auto a = artifact(q.matches[1]);
             const auto *img = std::get_if<ImageVolume>(&a);
             if (!img) fail("TypeMismatch", "slice rendering needs an Image artifact");
             SliceRequest req;
             req.axis = seg::slice_axis_from_string(q.has_param("axis") ? q.get_param_value("axis") : "axial");
             req.mip = q.get_param_value("mip") == "1" || q.get_param_value("mip") == "true";
             if (!req.mip) req.index = to_u64(q.has_param("index") ? q.get_param_value("index") : "0", "index");
             if (q.has_param("wc") && q.has_param("ww")) {
               req.window_center = to_double(q.get_param_value("wc"), "wc");
               req.window_width = to_double(q.get_param_value("ww"), "ww");
             } else {
               double lo = INFINITY, hi = -INFINITY;
               for (double v : img->voxels)
                 if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
               if (!(hi > lo)) lo = std::isfinite(lo) ? lo - 0.5 : -0.5, hi = lo + 1;
               req.window_center = (lo + hi) / 2;
               req.window_width = hi - lo;
             }
             if (q.has_param("colors")) req.colors = parse_colors(q.get_param_value("colors"));
             std::optional<Artifact> mask;
             if (q.has_param("overlay")) {
               mask = artifact(q.get_param_value("overlay"));
               if (!std::holds_alternative<LabelMask>(*mask)) fail("TypeMismatch", "overlay must be a Mask artifact");
             }
             const auto raster = render_slice(*img, req, mask ? &std::get<LabelMask>(*mask) : nullptr);
             const auto png = encode_png(raster);
             r.set_content(std::string(png.begin(), png.end()), "image/png");
           }));

  http.Get(R"(/api/artifacts/([0-9a-fA-F]+)/value)", guard([this](const Request &q, Response &r) {
             const auto a = artifact(q.matches[1]);
             const Index3 ijk{to_u64(q.get_param_value("i"), "i"), to_u64(q.get_param_value("j"), "j"),
                              to_u64(q.get_param_value("k"), "k")};
             const Geometry *g = nullptr;
             if (const auto *img = std::get_if<ImageVolume>(&a)) g = &img->geometry;
             else if (const auto *m = std::get_if<LabelMask>(&a)) g = &m->geometry;
             else fail("TypeMismatch", "values are available for Image and Mask artifacts");
             for (int k = 0; k < 3; ++k)
               if (ijk[k] >= g->dims[k]) fail("IndexOutOfRange", "voxel index outside the grid");
             const Vec3 p = g->index_to_physical({double(ijk[0]), double(ijk[1]), double(ijk[2])});
             Json j{{"ijk", ijk}, {"physical", {p[0], p[1], p[2]}}};
             if (const auto *img = std::get_if<ImageVolume>(&a)) {
               const double v = img->at(ijk[0], ijk[1], ijk[2]);
               j["value"] = std::isfinite(v) ? Json(v) : Json(nullptr);
             } else {
               const auto &m = std::get<LabelMask>(a);
               const auto l = m.at(ijk[0], ijk[1], ijk[2]);
               j["label"] = l;
               const auto it = m.names.find(l);
               j["name"] = it == m.names.end() ? Json(nullptr) : Json(it->second);
             }
             reply(r, j);
           }));

  http.Get(R"(/api/artifacts/([0-9a-fA-F]+)/table)", guard([this](const Request &q, Response &r) {
             const auto a = artifact(q.matches[1]);
             const auto *t = std::get_if<Table>(&a);
             if (!t) fail("TypeMismatch", "rows are available for Table artifacts");
             const auto offset = q.has_param("offset") ? to_u64(q.get_param_value("offset"), "offset") : 0;
             const auto limit = q.has_param("limit") ? to_u64(q.get_param_value("limit"), "limit") : 100;
             Json cols = Json::array(), rows = Json::array();
             for (const auto &c : t->columns) cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
             for (std::size_t i = offset; i < t->rows.size() && i - offset < limit; ++i) {
               Json row = Json::array();
               for (const auto &c : t->rows[i]) {
                 if (const auto *d = std::get_if<double>(&c)) row.push_back(std::isfinite(*d) ? Json(*d) : Json(nullptr));
                 else if (const auto *s = std::get_if<std::string>(&c)) row.push_back(*s);
                 else row.push_back(nullptr);
               }
               rows.push_back(std::move(row));
             }
             reply(r, {{"columns", cols}, {"rows", rows}, {"offset", offset}, {"total", t->rows.size()}});
           }));
}

Service::Service(ServiceConfig cfg) : impl_(std::make_unique<Impl>()) {
  impl_->cfg = std::move(cfg);
  impl_->store = std::make_shared<ArtifactStore>(impl_->cfg.store_dir, impl_->cfg.store_budget_bytes);
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string &host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  if (!impl_->http.bind_to_port(host, port)) fail("IoFailure", "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Service::listen() { impl_->http.listen_after_bind(); }

int Service::start(const std::string &host, int port) {
  const int p = bind(host, port);
  if (p <= 0) fail("IoFailure", "cannot bind " + host);
  impl_->listener = std::thread([this] { listen(); });
  impl_->http.wait_until_ready();
  return p;
}

void Service::stop() {
  impl_->stopping = true;
  impl_->http.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  std::map<std::string, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lk(impl_->mu);
    sessions.swap(impl_->sessions);
  }
  sessions.clear(); // joins any running executions
}

} // namespace voxflow::service
