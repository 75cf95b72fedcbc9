#include "voxflow/core/cancel.hpp"

#include <utility>

namespace voxflow {

namespace {
thread_local std::shared_ptr<CancelFlag> current_flag;
}

ScopedCancelFlag::ScopedCancelFlag(std::shared_ptr<CancelFlag> flag)
    : previous_(std::exchange(current_flag, std::move(flag))) {}

ScopedCancelFlag::~ScopedCancelFlag() { current_flag = std::move(previous_); }

void check_cancelled() {
  if (current_flag && current_flag->requested()) throw Cancelled{};
}

} // namespace voxflow
