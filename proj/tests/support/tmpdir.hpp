#pragma once

#include <filesystem>
#include <random>
#include <string>

namespace testsupport {

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 gen{std::random_device{}()};
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("gresnet_test_" + std::to_string(gen()));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
