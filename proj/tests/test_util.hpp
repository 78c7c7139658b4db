#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <doctest.h>

#include "unitrhythm/error.hpp"

namespace testutil {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("unitrhythm_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

template <typename F>
unitrhythm::ErrorKind error_kind(F&& fn) {
  try {
    fn();
  } catch (const unitrhythm::Error& e) {
    return e.kind();
  }
  FAIL("expected unitrhythm::Error");
  return unitrhythm::ErrorKind::Internal;
}

}  // namespace testutil

#include <unistd.h>
