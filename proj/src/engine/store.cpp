#include "voxflow/engine/store.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include <json.hpp>

#include "voxflow/core/error.hpp"

namespace voxflow::engine {

namespace fs = std::filesystem;
using nlohmann::json;

ArtifactStore::ArtifactStore(fs::path root, std::uint64_t budget) : root_(std::move(root)), budget_(budget) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) fail("IoFailure", "cannot create artifact store at " + root_.string() + ": " + ec.message());
}

fs::path ArtifactStore::object_path(const Digest &d, const char *ext) const {
  const std::string h = d.hex();
  return root_ / h.substr(0, 2) / (h + ext);
}

fs::path ArtifactStore::ref_path(const Digest &node) const {
  const std::string h = node.hex();
  return root_ / "refs" / h.substr(0, 2) / (h + ".json");
}

namespace {

// write-then-rename so readers never observe partial files
void atomic_write(const fs::path &p, std::span<const std::uint8_t> data) {
  fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  io::write_file(tmp, data);
  fs::rename(tmp, p);
}

void atomic_write(const fs::path &p, const std::string &text) {
  atomic_write(p, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

} // namespace

ArtifactRef ArtifactStore::put(const Artifact &a) {
  const io::Bytes b = encode_artifact(a);
  ArtifactRef r{sha256(b), port_type_of(a), b.size()};
  std::lock_guard lock(mu_);
  const fs::path bin = object_path(r.digest, ".bin");
  std::error_code ec;
  if (fs::exists(bin, ec)) {
    fs::last_write_time(bin, fs::file_time_type::clock::now(), ec);
    return r;
  }
  atomic_write(bin, b);
  const auto created = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
  atomic_write(object_path(r.digest, ".meta"),
               json{{"type", to_string(r.type)}, {"size", r.size_bytes}, {"created", created}}.dump() + "\n");
  return r;
}

bool ArtifactStore::contains(const Digest &d) const {
  std::error_code ec;
  return fs::exists(object_path(d, ".bin"), ec);
}

io::Bytes ArtifactStore::bytes(const Digest &d) const {
  std::lock_guard lock(mu_);
  const fs::path bin = object_path(d, ".bin");
  std::error_code ec;
  if (!fs::exists(bin, ec)) fail("ArtifactNotFound", d.hex());
  fs::last_write_time(bin, fs::file_time_type::clock::now(), ec);
  return io::read_file(bin);
}

std::optional<ArtifactRef> ArtifactStore::ref(const Digest &d) const {
  std::error_code ec;
  const fs::path meta = object_path(d, ".meta");
  if (!fs::exists(meta, ec) || !contains(d)) return std::nullopt;
  const io::Bytes b = io::read_file(meta);
  const json j = json::parse(b.begin(), b.end());
  return ArtifactRef{d, port_type_from_string(j.at("type").get<std::string>()), j.at("size").get<std::uint64_t>()};
}

Artifact ArtifactStore::get(const ArtifactRef &r) const {
  const io::Bytes b = bytes(r.digest);
  if (sha256(b) != r.digest) fail("CorruptArtifact", r.digest.hex() + " does not match its content");
  return decode_artifact(r.type, b);
}

Artifact ArtifactStore::get(const Digest &d) const {
  const auto r = ref(d);
  if (!r) fail("ArtifactNotFound", d.hex());
  return get(*r);
}

void ArtifactStore::record_outputs(const Digest &node, const std::map<std::string, ArtifactRef> &outputs) {
  json j = json::object();
  for (const auto &[port, r] : outputs) j[port] = {{"digest", r.digest.hex()}, {"type", to_string(r.type)}, {"size", r.size_bytes}};
  std::lock_guard lock(mu_);
  atomic_write(ref_path(node), j.dump() + "\n");
}

std::optional<std::map<std::string, ArtifactRef>> ArtifactStore::lookup_outputs(const Digest &node) const {
  const fs::path p = ref_path(node);
  std::error_code ec;
  if (!fs::exists(p, ec)) return std::nullopt;
  std::map<std::string, ArtifactRef> out;
  try {
    const io::Bytes b = io::read_file(p);
    const json j = json::parse(b.begin(), b.end());
    for (const auto &[port, r] : j.items()) {
      ArtifactRef ref{Digest::from_hex(r.at("digest").get<std::string>()), port_type_from_string(r.at("type").get<std::string>()),
                      r.at("size").get<std::uint64_t>()};
      if (!contains(ref.digest)) return std::nullopt;
      out[port] = ref;
    }
  } catch (const std::exception &) {
    return std::nullopt; // unreadable index entry: treat as a miss
  }
  return out;
}

std::uint64_t ArtifactStore::used_bytes() const {
  std::uint64_t total = 0;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root_, ec); it != fs::recursive_directory_iterator(); it.increment(ec))
    if (it->is_regular_file(ec) && it->path().extension() == ".bin") total += it->file_size(ec);
  return total;
}

std::uint64_t ArtifactStore::evict(const std::vector<Digest> &keep) {
  std::lock_guard lock(mu_);
  struct Obj {
    fs::file_time_type mtime;
    fs::path path;
    std::uint64_t size;
  };
  std::vector<Obj> objs;
  std::uint64_t used = 0;
  std::error_code ec;
  for (const auto &shard : fs::directory_iterator(root_, ec)) {
    if (!shard.is_directory() || shard.path().filename() == "refs") continue;
    for (const auto &f : fs::directory_iterator(shard.path(), ec)) {
      if (f.path().extension() != ".bin") continue;
      const auto size = f.file_size(ec);
      used += size;
      bool pinned = false;
      for (const auto &k : keep) pinned |= f.path().stem() == k.hex();
      if (!pinned) objs.push_back({f.last_write_time(ec), f.path(), size});
    }
  }
  std::sort(objs.begin(), objs.end(), [](const Obj &a, const Obj &b) {
    return a.mtime != b.mtime ? a.mtime < b.mtime : a.path < b.path;
  });
  std::uint64_t freed = 0;
  for (const auto &o : objs) {
    if (used - freed <= budget_) break;
    fs::remove(o.path, ec);
    fs::path meta = o.path;
    fs::remove(meta.replace_extension(".meta"), ec);
    freed += o.size;
  }
  return freed;
}

} // namespace voxflow::engine
