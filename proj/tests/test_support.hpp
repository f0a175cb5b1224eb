#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <system_error>

#include <unistd.h>

#include "warnbench/manual.hpp"

namespace wbtest {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(WARNBENCH_SOURCE_DIR) / rel;
}

inline std::filesystem::path sample_manual_path() {
  return source_path("data/manuals/sample_manual.json");
}

inline std::filesystem::path wordlist_path() { return source_path("data/wordlist.txt"); }

inline const warnbench::Manual& sample_manual() {
  static const warnbench::Manual m = warnbench::load_manual(sample_manual_path());
  return m;
}

// Fresh directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "wbtest") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
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

 private:
  std::filesystem::path path_;
};

}  // namespace wbtest
