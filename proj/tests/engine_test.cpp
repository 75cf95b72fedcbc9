#include <algorithm>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "voxflow/core/digest.hpp"
#include "voxflow/core/rng.hpp"
#include "voxflow/engine/session.hpp"
#include "voxflow/fixtures/phantom.hpp"
#include "voxflow/io/bytes.hpp"

using namespace voxflow;
using namespace voxflow::engine;

namespace {

struct Chain {
  Workflow w;
  std::filesystem::path dir;
};

// reader -> mean filter -> LoG filter -> writer
Chain image_chain(const std::string &tag) {
  Chain c;
  c.dir = voxflow::testing::scratch_dir(tag);
  fixtures::write_demo_inputs(c.dir);
  auto &w = c.w;
  w.seed = 11;
  add_node(w, "ImageReader", {{"path", "phantom.nii.gz"}});
  add_node(w, "Filter", {{"method", "mean"}, {"size", 3}});
  add_node(w, "Filter", {{"method", "log"}, {"sigma_mm", 1.5}});
  add_node(w, "ImageWriter", {{"path", "out/filtered.nii.gz"}});
  connect(w, {"n1", "image"}, {"n2", "image"});
  connect(w, {"n2", "image"}, {"n3", "image"});
  connect(w, {"n3", "image"}, {"n4", "image"});
  return c;
}

ExecOptions options(const std::filesystem::path &dir) {
  ExecOptions o;
  o.base_dir = dir;
  o.out_dir = dir;
  return o;
}

std::map<std::string, std::string> output_digests(const ExecutionReport &r) {
  std::map<std::string, std::string> out;
  for (const auto &n : r.nodes)
    for (const auto &[p, ref] : n.outputs) out[n.id + "." + p] = ref.digest.hex();
  return out;
}

} // namespace

TEST(Catalog, DescribesPortsAndUnavailableAlgorithms) {
  const auto &c = default_catalog();
  const auto &rfg = c.at("RadiomicFeatureGenerator");
  ASSERT_EQ(rfg.inputs.size(), 2u);
  EXPECT_EQ(rfg.input("image")->type, PortType::Image);
  EXPECT_EQ(rfg.input("mask")->type, PortType::Mask);
  EXPECT_EQ(rfg.output("features")->type, PortType::Table);
  const auto text = rfg.describe().dump();
  EXPECT_NE(text.find("mask"), std::string::npos);
  EXPECT_NE(text.find("Table"), std::string::npos);
  EXPECT_ERROR_KIND(c.at("NoSuchTool"), "UnknownNodeType");

  // every entry's defaults satisfy its own schema
  for (const auto *t : c.types()) EXPECT_NO_THROW(normalize_params(*t, Json::object())) << t->name;

  // named in the catalog but rejected with an explicit reason
  Workflow w;
  try {
    add_node(w, "Classifier", {{"algorithm", "svm"}});
    ADD_FAILURE();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), "ParamSchemaViolation");
    EXPECT_NE(std::string(e.what()).find("not supported"), std::string::npos);
  }
  EXPECT_ERROR_KIND(add_node(w, "Clustering", {{"algorithm", "kmodes"}}), "ParamSchemaViolation");
  EXPECT_ERROR_KIND(add_node(w, "Filter", {{"method", "riesz"}}), "ParamSchemaViolation");
  const auto algo = c.at("Classifier").describe().at("params")[2];
  EXPECT_EQ(algo.at("name"), "algorithm");
  EXPECT_TRUE(algo.at("unsupported").contains("svm"));
}

TEST(Workflow, AddNodeIdsAndSchema) {
  Workflow w;
  EXPECT_EQ(add_node(w, "ImageReader", {{"format", "nifti"}, {"path", "a.nii"}}), "n1");
  EXPECT_EQ(add_node(w, "Filter"), "n2");
  EXPECT_EQ(w.node("n2").params.at("method"), "mean"); // defaults filled
  remove_node(w, "n1");
  EXPECT_EQ(add_node(w, "Filter"), "n3");
  EXPECT_ERROR_KIND(add_node(w, "NoSuchTool"), "UnknownNodeType");
  EXPECT_ERROR_KIND(add_node(w, "Filter", {{"sigma", 1}}), "ParamSchemaViolation");
  EXPECT_ERROR_KIND(add_node(w, "Filter", {{"method", "riesz"}}), "ParamSchemaViolation");
  EXPECT_ERROR_KIND(add_node(w, "Filter", {{"sigma_mm", 0}}), "ParamSchemaViolation");
  EXPECT_ERROR_KIND(add_node(w, "Filter", {{"size", 2.5}}), "ParamSchemaViolation");
  EXPECT_EQ(w.nodes.size(), 2u);
}

TEST(Workflow, ConnectRules) {
  Workflow w;
  add_node(w, "ImageReader", {{"path", "a.nii"}});
  add_node(w, "RTStructReader", {{"path", "rt.dcm"}});
  add_node(w, "RadiomicFeatureGenerator");
  add_node(w, "TableReader", {{"path", "t.csv"}});
  add_node(w, "Filter");
  add_node(w, "Filter");
  connect(w, {"n1", "image"}, {"n2", "reference"});
  EXPECT_NO_THROW(connect(w, {"n2", "mask"}, {"n3", "mask"}));
  try {
    connect(w, {"n4", "table"}, {"n5", "image"});
    ADD_FAILURE();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), "TypeMismatch");
    EXPECT_NE(std::string(e.what()).find("expected Image, got Table"), std::string::npos);
  }
  connect(w, {"n5", "image"}, {"n6", "image"});
  EXPECT_ERROR_KIND(connect(w, {"n6", "image"}, {"n5", "image"}), "CycleDetected");
  EXPECT_ERROR_KIND(connect(w, {"n1", "image"}, {"n6", "image"}), "PortOccupied");
  EXPECT_ERROR_KIND(connect(w, {"n1", "nope"}, {"n3", "image"}), "UnknownPort");
  EXPECT_ERROR_KIND(connect(w, {"n9", "image"}, {"n3", "image"}), "UnknownNode");
  disconnect(w, {"n6", "image"});
  EXPECT_ERROR_KIND(disconnect(w, {"n6", "image"}), "UnknownEdge");
}

TEST(Workflow, ValidateFindings) {
  EXPECT_TRUE(validate(Workflow{}).ok());

  Workflow w;
  add_node(w, "Filter");
  const auto r = validate(w);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].node, "n1");
  EXPECT_EQ(r.findings[0].message, "required input 'image' unconnected");

  // reader -> filter -> radiomics -> classifier, mask from RT-struct
  Workflow full;
  add_node(full, "ImageReader", {{"path", "p.nii.gz"}});
  add_node(full, "Filter", {{"method", "log"}});
  add_node(full, "RTStructReader", {{"path", "rt.dcm"}});
  add_node(full, "RadiomicFeatureGenerator");
  add_node(full, "Classifier");
  connect(full, {"n1", "image"}, {"n2", "image"});
  connect(full, {"n1", "image"}, {"n3", "reference"});
  connect(full, {"n2", "image"}, {"n4", "image"});
  connect(full, {"n3", "mask"}, {"n4", "mask"});
  connect(full, {"n4", "features"}, {"n5", "table"});
  EXPECT_TRUE(validate(full).ok());

  add_node(full, "Filter", {{"method", "mean"}});
  connect(full, {"n1", "image"}, {"n6", "image"});
  add_node(full, "TableReader", {{"path", "x.csv"}}); // isolated
  const auto r2 = validate(full);
  ASSERT_EQ(r2.findings.size(), 1u);
  EXPECT_EQ(r2.findings[0].node, "n7");

  Workflow missing;
  add_node(missing, "ImageReader");
  EXPECT_FALSE(validate(missing).ok()); // required path not set
}

TEST(Hashing, MerkleChain) {
  auto c = image_chain("merkle");
  const HashContext ctx{c.dir};
  const auto before = content_hashes(c.w, ctx);
  auto w2 = c.w;
  set_params(w2, "n2", {{"method", "mean"}, {"size", 5}});
  const auto after = content_hashes(w2, ctx);
  EXPECT_EQ(before.at("n1"), after.at("n1"));
  for (const char *id : {"n2", "n3", "n4"}) EXPECT_NE(before.at(id), after.at(id)) << id;

  // the leaf's change stays local
  auto w3 = c.w;
  set_params(w3, "n4", {{"path", "out/other.nii.gz"}});
  const auto leaf = content_hashes(w3, ctx);
  for (const char *id : {"n1", "n2", "n3"}) EXPECT_EQ(before.at(id), leaf.at(id));
  EXPECT_NE(before.at("n4"), leaf.at("n4"));

  // version enters the digest
  auto w4 = c.w;
  w4.nodes[2].version = 2;
  EXPECT_NE(content_hashes(w4, ctx).at("n3"), before.at("n3"));
}

TEST(Hashing, PositionNameAndInsertionOrderExcluded) {
  auto c = image_chain("order");
  const HashContext ctx{c.dir};
  const auto base = content_hashes(c.w, ctx);

  auto moved = c.w;
  set_position(moved, "n2", {123.5, -7});
  moved.name = "renamed";
  EXPECT_EQ(content_hashes(moved, ctx), base);

  // same graph, edges wired in reverse order and params given in another key order
  Workflow w;
  w.seed = 11;
  add_node(w, "ImageReader", {{"path", "phantom.nii.gz"}});
  add_node(w, "Filter", {{"size", 3}, {"method", "mean"}});
  add_node(w, "Filter", {{"sigma_mm", 1.5}, {"method", "log"}});
  add_node(w, "ImageWriter", {{"path", "out/filtered.nii.gz"}});
  connect(w, {"n3", "image"}, {"n4", "image"});
  connect(w, {"n2", "image"}, {"n3", "image"});
  connect(w, {"n1", "image"}, {"n2", "image"});
  EXPECT_EQ(content_hashes(w, ctx), base);
  EXPECT_EQ(serialize(w), serialize(c.w));
}

TEST(Hashing, ReaderFileBytesEnterDigest) {
  auto c = image_chain("filebytes");
  const HashContext ctx{c.dir};
  const auto before = content_hash(c.w, "n2", ctx);
  auto bytes = io::read_file(c.dir / "phantom.nii.gz");
  io::write_file(c.dir / "phantom_copy.nii.gz", bytes);
  auto w = c.w;
  set_params(w, "n1", {{"path", "phantom_copy.nii.gz"}});
  EXPECT_NE(content_hash(w, "n1", ctx), content_hash(c.w, "n1", ctx)); // the path is a parameter
  bytes.back() ^= 1;
  io::write_file(c.dir / "phantom.nii.gz", bytes);
  EXPECT_NE(content_hash(c.w, "n2", ctx), before);
}

TEST(Hashing, NodeSeedDerivation) {
  io::Bytes buf;
  io::store_le<std::uint64_t>(buf, 42);
  const std::string id = "n7";
  buf.insert(buf.end(), id.begin(), id.end());
  EXPECT_EQ(node_seed(42, "n7"), sha256(std::span<const std::uint8_t>(buf)).low64());
  EXPECT_NE(node_seed(42, "n7"), node_seed(43, "n7"));

  // the workflow seed enters stochastic nodes only
  Workflow w;
  add_node(w, "TableReader", {{"path", "t.csv"}});
  add_node(w, "Classifier");
  connect(w, {"n1", "table"}, {"n2", "table"});
  auto w2 = w;
  w2.seed = 99;
  const auto a = content_hashes(w), b = content_hashes(w2);
  EXPECT_EQ(a.at("n1"), b.at("n1"));
  EXPECT_NE(a.at("n2"), b.at("n2"));
}

TEST(Serialization, RoundTripAndCanonicalBytes) {
  auto c = image_chain("serial");
  set_position(c.w, "n3", {0.1, 1e21});
  c.w.name = "chain";
  const auto text = serialize(c.w);
  const auto back = deserialize(text);
  EXPECT_EQ(back, c.w);
  EXPECT_EQ(serialize(back), text);
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_NE(text.find("0.1"), std::string::npos);
  const auto doc = Json::parse(text);
  EXPECT_EQ(doc.at("schema_version"), 1);
  EXPECT_EQ(doc.at("edges").size(), std::size_t(3));
}

TEST(Serialization, Errors) {
  auto c = image_chain("serial_err");
  auto doc = Json::parse(serialize(c.w));
  doc["schema_version"] = 999;
  EXPECT_ERROR_KIND(deserialize(doc.dump()), "SchemaVersionUnsupported");

  try {
    deserialize("{\n  \"name\": \"x\",\n  \"nodes\": [,]\n}\n");
    ADD_FAILURE();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), "MalformedDocument");
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }

  auto bad_type = Json::parse(serialize(c.w));
  bad_type["nodes"][1]["type_name"] = "Nope";
  EXPECT_ERROR_KIND(deserialize(bad_type.dump()), "UnknownNodeType");

  auto cyc = Json::parse(serialize(c.w));
  cyc["edges"].push_back({{"from", {"n3", "image"}}, {"to", {"n2", "image"}}});
  cyc["edges"].erase(0); // free n2.image so only the cycle is wrong
  EXPECT_ERROR_KIND(deserialize(cyc.dump()), "CycleDetected");
}

TEST(Execution, WarmCacheIsByteIdentical) {
  auto c = image_chain("warm");
  ArtifactStore store(c.dir / "store");
  const auto r1 = execute(c.w, Scope::all(), store, options(c.dir));
  ASSERT_TRUE(r1.ok());
  EXPECT_EQ(r1.cache_hits(), 0u);
  const auto file1 = io::read_file(c.dir / "out/filtered.nii.gz");

  const auto r2 = execute(c.w, Scope::all(), store, options(c.dir));
  ASSERT_TRUE(r2.ok());
  for (const auto &n : r2.nodes) EXPECT_EQ(n.cache_hit, n.cacheable) << n.id;
  EXPECT_FALSE(r2.find("n4")->cacheable);
  EXPECT_EQ(output_digests(r1), output_digests(r2));
  EXPECT_EQ(io::read_file(c.dir / "out/filtered.nii.gz"), file1);

  // a cache hit matches what recomputation produces
  ArtifactStore fresh(c.dir / "fresh");
  const auto r3 = execute(c.w, Scope::all(), fresh, options(c.dir));
  EXPECT_EQ(output_digests(r3), output_digests(r1));
  for (const auto &n : r1.nodes)
    for (const auto &[p, ref] : n.outputs) EXPECT_EQ(store.bytes(ref.digest), fresh.bytes(ref.digest));
}

TEST(Execution, NodeAndUpToScopes) {
  auto c = image_chain("scopes");
  ArtifactStore store(c.dir / "store");
  std::map<std::string, NodeState> states;
  const auto r = execute(c.w, Scope::only("n2"), store, options(c.dir), &states);
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.nodes.size(), 2u);
  EXPECT_EQ(r.nodes[0].id, "n1");
  EXPECT_EQ(r.nodes[1].id, "n2");
  EXPECT_FALSE(std::filesystem::exists(c.dir / "out/filtered.nii.gz"));

  const auto again = execute(c.w, Scope::only("n2"), store, options(c.dir), &states);
  EXPECT_TRUE(again.find("n1")->cache_hit);
  EXPECT_FALSE(again.find("n2")->cache_hit); // the selected node always recomputes
  EXPECT_EQ(output_digests(again), output_digests(r));

  const auto up = execute(c.w, Scope::up_to("n3"), store, options(c.dir), &states);
  ASSERT_EQ(up.nodes.size(), 3u);
  EXPECT_TRUE(up.find("n2")->cache_hit);
  EXPECT_FALSE(up.find("n3")->cache_hit);
  EXPECT_EQ(states.at("n3").status, NodeStatus::Done);
  EXPECT_EQ(states.count("n4"), 0u);
  const auto img = std::get<ImageVolume>(load_output(store, states.at("n3"), "image"));
  EXPECT_EQ(img.dims(), (Index3{32, 32, 32}));
}

TEST(Execution, FaultIsolation) {
  auto c = image_chain("fault");
  auto &w = c.w;
  add_node(w, "ImageReader", {{"path", "missing.nii.gz"}}); // n5
  add_node(w, "Filter");                                    // n6
  connect(w, {"n5", "image"}, {"n6", "image"});
  add_node(w, "Fusion"); // n7 joins both branches
  connect(w, {"n3", "image"}, {"n7", "a"});
  connect(w, {"n6", "image"}, {"n7", "b"});
  ArtifactStore store(c.dir / "store");
  std::map<std::string, NodeState> states;
  const auto r = execute(w, Scope::all(), store, options(c.dir), &states);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.find("n5")->status, NodeStatus::Error);
  EXPECT_TRUE(states.at("n5").error.has_value());
  EXPECT_EQ(r.find("n6")->status, NodeStatus::Stale);
  EXPECT_EQ(r.find("n7")->status, NodeStatus::Stale);
  for (const char *id : {"n1", "n2", "n3", "n4"}) EXPECT_EQ(r.find(id)->status, NodeStatus::Done) << id;
}

TEST(Execution, ValidationFailedBeforeRunning) {
  Workflow w;
  add_node(w, "Filter");
  ArtifactStore store(voxflow::testing::scratch_dir("store"));
  EXPECT_ERROR_KIND(execute(w, Scope::all(), store, {}), "ValidationFailed");
}

TEST(Execution, EmptyThresholdIsAWarning) {
  auto c = image_chain("empty_seg");
  add_node(c.w, "ThresholdSegmentation", {{"lower", 1e9}, {"upper", 2e9}});
  connect(c.w, {"n1", "image"}, {"n5", "image"});
  ArtifactStore store(c.dir / "store");
  const auto r = execute(c.w, Scope::only("n5"), store, options(c.dir));
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.find("n5")->warnings.size(), 1u);
  EXPECT_NE(r.find("n5")->warnings[0].find("EmptyResult"), std::string::npos);
}

TEST(Execution, CancelPartitionAndResume) {
  auto c = image_chain("cancel");
  remove_node(c.w, "n4");
  ArtifactStore store(c.dir / "store");
  auto opt = options(c.dir);
  opt.cancel = std::make_shared<CancelFlag>();
  opt.on_event = [&](const Event &e) {
    if (e.node == "n1" && e.status == NodeStatus::Done) opt.cancel->request();
  };
  std::map<std::string, NodeState> states;
  const auto r = execute(c.w, Scope::all(), store, opt, &states);
  EXPECT_TRUE(r.cancelled);
  EXPECT_EQ(states.at("n1").status, NodeStatus::Done);
  EXPECT_EQ(states.at("n2").status, NodeStatus::Cancelled);
  EXPECT_EQ(states["n3"].status, NodeStatus::Idle);
  const auto first = states.at("n1").outputs.at("image").digest;

  const auto again = execute(c.w, Scope::all(), store, options(c.dir), &states);
  ASSERT_TRUE(again.ok());
  EXPECT_TRUE(again.find("n1")->cache_hit);
  EXPECT_EQ(again.find("n1")->outputs.at("image").digest, first);
}

TEST(Session, RevisionsStaleMarkingAndEvents) {
  auto c = image_chain("session");
  auto store = std::make_shared<ArtifactStore>(c.dir / "store");
  Session s(c.w, store, options(c.dir));
  EXPECT_ERROR_KIND(s.cancel(), "NotRunning");
  const auto rev = s.revision();
  const auto r = s.run(Scope::all());
  ASSERT_TRUE(r.ok());
  for (const auto &[id, st] : s.states()) EXPECT_EQ(st.status, NodeStatus::Done) << id;

  // status events arrive with increasing sequence numbers in topological order
  const auto events = s.events_since(0);
  std::vector<std::string> running;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i) {
      EXPECT_EQ(events[i].seq, events[i - 1].seq + 1);
    }
    if (events[i].status == NodeStatus::Running) running.push_back(events[i].node);
  }
  EXPECT_EQ(running, topological_order(c.w));

  s.set_params("n3", {{"method", "log"}, {"sigma_mm", 2.0}}, rev);
  EXPECT_EQ(s.state("n1").status, NodeStatus::Done);
  EXPECT_EQ(s.state("n2").status, NodeStatus::Done);
  EXPECT_EQ(s.state("n3").status, NodeStatus::Stale);
  EXPECT_EQ(s.state("n4").status, NodeStatus::Stale);
  EXPECT_ERROR_KIND(s.set_params("n2", {{"size", 5}}, rev), "RevisionConflict");
  EXPECT_EQ(s.revision(), rev + 1);

  s.set_position("n1", {5, 5});
  EXPECT_EQ(s.state("n1").status, NodeStatus::Done);

  const auto r2 = s.run(Scope::all());
  EXPECT_TRUE(r2.find("n2")->cache_hit);
  EXPECT_FALSE(r2.find("n3")->cache_hit);
  const auto seq = events.back().seq;
  EXPECT_FALSE(s.events_since(seq).empty());
  EXPECT_ERROR_KIND(s.run(Scope::only("n99")), "UnknownNode");
}

TEST(Session, ReplaceKeepsUnchangedResultsAndPasteParams) {
  auto c = image_chain("session_replace");
  Session s(c.w, std::make_shared<ArtifactStore>(c.dir / "store"), options(c.dir));
  ASSERT_TRUE(s.run(Scope::all()).ok());

  Workflow renamed = s.workflow();
  renamed.name = "other";
  renamed.nodes[0].position = {40, 80};
  s.replace(renamed);
  for (const auto &[id, st] : s.states()) EXPECT_EQ(st.status, NodeStatus::Done) << id;

  Workflow edited = s.workflow();
  edited.nodes[2].params["sigma_mm"] = 2.5;
  s.replace(edited);
  EXPECT_EQ(s.state("n2").status, NodeStatus::Done);
  EXPECT_EQ(s.state("n3").status, NodeStatus::Stale);
  EXPECT_EQ(s.state("n4").status, NodeStatus::Stale);

  ASSERT_TRUE(s.run(Scope::all()).ok());
  s.paste_params("n2", "n3");
  EXPECT_EQ(s.workflow().find("n3")->params, s.workflow().find("n2")->params);
  EXPECT_EQ(s.state("n3").status, NodeStatus::Stale);
  EXPECT_EQ(s.state("n2").status, NodeStatus::Done);
  EXPECT_ERROR_KIND(s.paste_params("n1", "n2"), "TypeMismatch");
  EXPECT_ERROR_KIND(s.paste_params("n9", "n2"), "UnknownNode");
}

TEST(Session, CancelDuringRun) {
  // registration iterates long enough to observe the stop flag
  const auto dir = voxflow::testing::scratch_dir("session_cancel");
  fixtures::write_demo_inputs(dir);
  Workflow w;
  add_node(w, "ImageReader", {{"path", "phantom.nii.gz"}});
  add_node(w, "Filter", {{"method", "mean"}});
  add_node(w, "Registration", {{"kind", "affine"}, {"max_iterations", 100000}, {"convergence_tol", 1e-300}});
  connect(w, {"n1", "image"}, {"n2", "image"});
  connect(w, {"n1", "image"}, {"n3", "fixed"});
  connect(w, {"n2", "image"}, {"n3", "moving"});
  Session s(w, std::make_shared<ArtifactStore>(dir / "store"), options(dir));
  s.start(Scope::all());
  EXPECT_ERROR_KIND(s.add_node("Filter"), "Busy");
  std::uint64_t seen = 0;
  bool cancelled = false;
  while (!cancelled) {
    for (const auto &e : s.events_since(seen, std::chrono::milliseconds(2000))) {
      seen = e.seq;
      if (e.node == "n3" && e.status == NodeStatus::Running) {
        s.cancel();
        cancelled = true;
      }
    }
    ASSERT_TRUE(cancelled || s.running());
  }
  s.wait();
  EXPECT_EQ(s.state("n3").status, NodeStatus::Cancelled);
  EXPECT_EQ(s.state("n2").status, NodeStatus::Done);
  EXPECT_TRUE(s.last_report()->cancelled);
}

TEST(Store, EvictionKeepsPinnedAndRecent) {
  const auto root = voxflow::testing::scratch_dir("evict");
  ArtifactStore store(root);
  std::vector<ArtifactRef> refs;
  for (int i = 0; i < 4; ++i) {
    // equal-sized objects keep the byte arithmetic simple
    refs.push_back(store.put(fixtures::random_volume(fixtures::make_grid({6, 6, 6}), std::uint64_t(i))));
    std::filesystem::last_write_time(root / refs.back().digest.hex().substr(0, 2) / (refs.back().digest.hex() + ".bin"),
                                     std::filesystem::file_time_type::clock::now() + std::chrono::seconds(i));
  }
  EXPECT_EQ(store.put(store.get(refs[0])).digest, refs[0].digest); // idempotent
  const auto each = refs[0].size_bytes;
  EXPECT_EQ(store.used_bytes(), 4 * each);
  store.set_budget(2 * each);
  store.evict({refs[0].digest});
  EXPECT_TRUE(store.contains(refs[0].digest));  // pinned
  EXPECT_FALSE(store.contains(refs[1].digest)); // oldest unpinned
  EXPECT_TRUE(store.contains(refs[3].digest));
  EXPECT_LE(store.used_bytes(), 2 * each);
  EXPECT_ERROR_KIND(store.get(refs[1]), "ArtifactNotFound");

  store.record_outputs(sha256("node"), {{"image", refs[1]}});
  EXPECT_FALSE(store.lookup_outputs(sha256("node")).has_value()); // object gone, no hit

  const auto bin = root / refs[3].digest.hex().substr(0, 2) / (refs[3].digest.hex() + ".bin");
  auto bytes = io::read_file(bin);
  bytes.back() ^= 0xff;
  io::write_file(bin, bytes);
  EXPECT_ERROR_KIND(store.get(refs[3]), "CorruptArtifact");
}

TEST(Artifact, CodecRoundTrips) {
  const auto g = fixtures::make_grid({4, 3, 2}, {0.5, 1, 2}, {1, 2, 3});
  ImageVolume img = fixtures::random_volume(g, 3);
  img.voxels[0] = std::numeric_limits<double>::quiet_NaN();
  LabelMask m(g);
  m.labels[5] = 2;
  m.names[2] = "tumour";
  Table t;
  t.columns = {{"id", ColumnKind::Text}, {"x", ColumnKind::Numeric}};
  t.rows = {{Cell{std::string("a")}, Cell{}}, {Cell{std::string("1.5")}, Cell{-0.0}}};
  t.id_column = "id";
  const std::vector<Artifact> all{img, m, t, FilePath{"out/x.csv"}};
  for (const auto &a : all) {
    const auto bytes = encode_artifact(a);
    const auto back = decode_artifact(port_type_of(a), bytes);
    EXPECT_EQ(encode_artifact(back), bytes);
    EXPECT_ERROR_KIND(decode_artifact(port_type_of(a), std::span(bytes).first(bytes.size() - 1)), "MalformedArtifact");
  }
  EXPECT_TRUE(std::isnan(std::get<ImageVolume>(decode_artifact(PortType::Image, encode_artifact(img))).voxels[0]));
  EXPECT_EQ(std::get<Table>(decode_artifact(PortType::Table, encode_artifact(t))), t);
  EXPECT_EQ(std::get<LabelMask>(decode_artifact(PortType::Mask, encode_artifact(m))).names.at(2), "tumour");
  EXPECT_ERROR_KIND(decode_artifact(PortType::Mask, encode_artifact(img)), "TypeMismatch");
}

TEST(Property, RandomEdgeSequencesStayAcyclic) {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    Workflow w;
    const std::size_t n = 4 + rng.index(6);
    for (std::size_t i = 0; i < n; ++i) add_node(w, "MaskAlgebra");
    for (int step = 0; step < 60; ++step) {
      const auto from = "n" + std::to_string(1 + rng.index(n));
      const auto to = "n" + std::to_string(1 + rng.index(n));
      const std::string port = rng.index(2) ? "a" : "b";
      const bool occupied = std::any_of(w.edges.begin(), w.edges.end(),
                                        [&](const Edge &e) { return e.to == PortRef{to, port}; });
      const auto down = descendants(w, to);
      const bool closes = from == to || std::find(down.begin(), down.end(), from) != down.end();
      const auto before = w.edges.size();
      try {
        connect(w, {from, "mask"}, {to, port});
        EXPECT_FALSE(occupied || closes);
      } catch (const Error &e) {
        EXPECT_EQ(e.kind(), occupied ? "PortOccupied" : "CycleDetected");
        EXPECT_TRUE(occupied || closes);
        EXPECT_EQ(w.edges.size(), before);
      }
      if (rng.index(5) == 0 && !w.edges.empty()) disconnect(w, w.edges[rng.index(w.edges.size())].to);
      ASSERT_NO_THROW(topological_order(w));
    }
  }
}
