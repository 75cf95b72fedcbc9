#pragma once

#include <atomic>
#include <memory>

namespace voxflow {

// Cooperative stop flag. Long-running kernels call check_cancelled() at work
// unit boundaries (per slice, per optimizer iteration, per ROI); the executor
// installs the flag for the thread running a node.
class CancelFlag {
public:
  void request() noexcept { flag_.store(true, std::memory_order_release); }
  bool requested() const noexcept {
    return flag_.load(std::memory_order_acquire);
  }

private:
  std::atomic<bool> flag_{false};
};

struct Cancelled {};

class ScopedCancelFlag {
public:
  explicit ScopedCancelFlag(std::shared_ptr<CancelFlag> flag);
  ~ScopedCancelFlag();
  ScopedCancelFlag(const ScopedCancelFlag &) = delete;
  ScopedCancelFlag &operator=(const ScopedCancelFlag &) = delete;

private:
  std::shared_ptr<CancelFlag> previous_;
};

// Throws Cancelled when the current thread's flag has been raised.
void check_cancelled();

} // namespace voxflow
