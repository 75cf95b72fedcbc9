#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace voxflow {

// All library failures are reported through this type. `kind()` is a stable
// machine-readable tag (e.g. "TypeMismatch", "NotNifti") that tests and the
// HTTP layer switch on; what() carries the human message.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string &message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string &kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

[[noreturn]] inline void fail(std::string kind, const std::string &message) {
  throw Error(std::move(kind), message);
}

} // namespace voxflow
