#include "voxflow/service/resources.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "voxflow/core/error.hpp"

namespace voxflow::service {

namespace {

std::optional<std::uint64_t> env_megabytes(const char *name) {
  const char *v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  char *end = nullptr;
  const double mb = std::strtod(v, &end);
  if (*end || !(mb >= 0)) fail("ParamSchemaViolation", std::string(name) + " must be a number of megabytes");
  return static_cast<std::uint64_t>(mb * 1024 * 1024);
}

} // namespace

std::uint64_t free_memory_bytes() {
  std::ifstream in("/proc/meminfo");
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    std::uint64_t kb = 0;
    if (ss >> key >> kb && key == "MemAvailable:") return kb * 1024;
  }
  const long pages = sysconf(_SC_AVPHYS_PAGES), size = sysconf(_SC_PAGESIZE);
  return pages > 0 && size > 0 ? std::uint64_t(pages) * std::uint64_t(size) : 0;
}

ResourceStatus resource_status(std::uint64_t free_memory, const engine::ArtifactStore &store, const ResourceConfig &cfg) {
  ResourceStatus s;
  s.free_memory_bytes = free_memory;
  s.artifact_store_used_bytes = store.used_bytes();
  s.artifact_store_budget_bytes = store.budget_bytes();
  if (free_memory < cfg.low_memory_bytes)
    s.warning = "LowMemory";
  else if (double(s.artifact_store_used_bytes) > cfg.low_cache_fraction * double(s.artifact_store_budget_bytes))
    s.warning = "LowCache";
  return s;
}

ResourceConfig resource_config_from_env() {
  ResourceConfig c;
  if (auto mb = env_megabytes(kLowMemoryEnv)) c.low_memory_bytes = *mb;
  return c;
}

std::filesystem::path default_store_dir() {
  if (const char *v = std::getenv(kStoreEnv); v && *v) return v;
  return std::filesystem::path(".voxflow") / "store";
}

std::uint64_t store_budget_from_env(std::uint64_t fallback) { return env_megabytes(kStoreBudgetEnv).value_or(fallback); }

} // namespace voxflow::service
