#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "voxflow/engine/artifact.hpp"

namespace voxflow::engine {

// Content-addressed artifact directory:
//   <root>/<aa>/<digest>.bin   canonical artifact bytes
//   <root>/<aa>/<digest>.meta  {"type", "size", "created"}
//   <root>/refs/<aa>/<node digest>.json  output port -> artifact digest
// Eviction drops the least recently used objects (by .bin mtime, touched on
// read) until the byte budget holds.
class ArtifactStore {
public:
  explicit ArtifactStore(std::filesystem::path root, std::uint64_t budget_bytes = 1ull << 30);

  const std::filesystem::path &root() const { return root_; }
  std::uint64_t budget_bytes() const { return budget_; }
  void set_budget(std::uint64_t b) { budget_ = b; }

  ArtifactRef put(const Artifact &a);
  bool contains(const Digest &d) const;
  Artifact get(const ArtifactRef &ref) const;             // ArtifactNotFound
  Artifact get(const Digest &d) const;                    // type from .meta
  std::optional<ArtifactRef> ref(const Digest &d) const;  // from .meta
  io::Bytes bytes(const Digest &d) const;

  // Node-output index used for cache lookups. A lookup only succeeds when
  // every referenced object is still present.
  void record_outputs(const Digest &node, const std::map<std::string, ArtifactRef> &outputs);
  std::optional<std::map<std::string, ArtifactRef>> lookup_outputs(const Digest &node) const;

  std::uint64_t used_bytes() const;
  // Evicts LRU objects, never those listed in `keep`. Returns bytes freed.
  std::uint64_t evict(const std::vector<Digest> &keep = {});

private:
  std::filesystem::path object_path(const Digest &d, const char *ext) const;
  std::filesystem::path ref_path(const Digest &node) const;

  std::filesystem::path root_;
  std::uint64_t budget_;
  mutable std::mutex mu_;
};

} // namespace voxflow::engine
