#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "voxflow/engine/store.hpp"

namespace voxflow::service {

// Environment overrides read by the CLI and the service.
inline constexpr const char *kStoreEnv = "VOXFLOW_STORE";                 // artifact store directory
inline constexpr const char *kStoreBudgetEnv = "VOXFLOW_STORE_BUDGET_MB"; // store byte budget
inline constexpr const char *kLowMemoryEnv = "VOXFLOW_LOW_MEMORY_MB";     // LowMemory threshold

struct ResourceConfig {
  std::uint64_t low_memory_bytes = 500ull << 20;
  double low_cache_fraction = 0.9;
};

struct ResourceStatus {
  std::uint64_t free_memory_bytes = 0;
  std::uint64_t artifact_store_used_bytes = 0;
  std::uint64_t artifact_store_budget_bytes = 0;
  std::optional<std::string> warning; // "LowMemory" or "LowCache"
};

// MemAvailable from /proc/meminfo, else free pages from sysconf.
std::uint64_t free_memory_bytes();

// LowMemory takes precedence when both apply.
ResourceStatus resource_status(std::uint64_t free_memory, const engine::ArtifactStore &store,
                               const ResourceConfig &cfg = {});

ResourceConfig resource_config_from_env();
std::filesystem::path default_store_dir();
std::uint64_t store_budget_from_env(std::uint64_t fallback = 1ull << 30);

} // namespace voxflow::service
