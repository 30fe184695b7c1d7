#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include "quasar/io.hpp"

namespace testutil {

inline std::filesystem::path source_dir() { return QUASAR_SOURCE_DIR; }

inline std::filesystem::path fixture_path(const std::string& rel) {
  return source_dir() / "tests" / "fixtures" / rel;
}

inline std::string fixture_text(const std::string& rel) {
  return quasar::read_text_file(fixture_path(rel));
}

inline std::filesystem::path prompts_dir() { return source_dir() / "data" / "prompts"; }
inline std::filesystem::path templates_dir() { return source_dir() / "data" / "templates"; }

// Scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("quasar-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
