#pragma once

#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "voxflow/core/error.hpp"

#define EXPECT_ERROR_KIND(stmt, expected_kind)                                     \
  do {                                                                             \
    try {                                                                          \
      stmt;                                                                        \
      ADD_FAILURE() << "expected " << (expected_kind) << ", nothing thrown";       \
    } catch (const ::voxflow::Error &e_) {                                         \
      EXPECT_EQ(e_.kind(), (expected_kind)) << e_.what();                          \
    }                                                                              \
  } while (0)

namespace voxflow::testing {

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string &tag) {
  const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
  std::string name = tag;
  if (info) name += std::string("_") + info->test_suite_name() + "_" + info->name();
  auto dir = std::filesystem::temp_directory_path() / "voxflow_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace voxflow::testing
