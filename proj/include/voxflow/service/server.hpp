#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "voxflow/service/resources.hpp"

namespace voxflow::service {

struct ServiceConfig {
  std::filesystem::path store_dir = default_store_dir();
  std::uint64_t store_budget_bytes = 1ull << 30;
  std::filesystem::path base_dir = ".";  // default for relative reader paths
  std::filesystem::path out_dir = ".";   // default for writer outputs
  ResourceConfig resources;
  std::function<std::uint64_t()> free_memory = free_memory_bytes; // injectable for tests
};

// HTTP status for an error kind: 404 missing, 409 conflicts, 422 rejected
// connections, 400 everything else the client caused.
int http_status(const std::string &kind);

// REST + server-sent events front end over engine sessions. Binds to
// localhost unless told otherwise; no authentication.
class Service {
public:
  explicit Service(ServiceConfig cfg = {});
  ~Service();
  Service(const Service &) = delete;
  Service &operator=(const Service &) = delete;

  // Returns the bound port (port 0 picks a free one).
  int bind(const std::string &host = "127.0.0.1", int port = 0);
  void listen(); // blocks until stop()
  int start(const std::string &host = "127.0.0.1", int port = 0); // bind + listen on a thread
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace voxflow::service
