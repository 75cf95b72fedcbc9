#pragma once

#include <string>
#include <variant>

#include "voxflow/core/digest.hpp"
#include "voxflow/core/image.hpp"
#include "voxflow/core/table.hpp"
#include "voxflow/io/bytes.hpp"
#include "voxflow/ml/models.hpp"
#include "voxflow/reg/transform.hpp"

namespace voxflow::engine {

enum class PortType { Image, Mask, Table, Transform, Model, FilePath };
PortType port_type_from_string(const std::string &s);
const char *to_string(PortType t);

struct FilePath {
  std::string path;
  friend bool operator==(const FilePath &, const FilePath &) = default;
};

using Artifact = std::variant<ImageVolume, LabelMask, Table, reg::Transform, ml::ModelArtifact, FilePath>;

PortType port_type_of(const Artifact &a);

// Canonical byte encoding; equal artifacts encode to equal bytes on every
// platform (little-endian IEEE doubles, sorted JSON keys).
io::Bytes encode_artifact(const Artifact &a);
Artifact decode_artifact(PortType type, std::span<const std::uint8_t> bytes); // MalformedArtifact

struct ArtifactRef {
  Digest digest; // SHA-256 of the canonical encoding
  PortType type = PortType::Image;
  std::uint64_t size_bytes = 0;
  friend bool operator==(const ArtifactRef &, const ArtifactRef &) = default;
};

} // namespace voxflow::engine
