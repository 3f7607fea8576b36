#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace phs::testsupport {

// Scratch directory removed on destruction.
class TempDir {
public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int i = 0; i < 64; ++i) {
      auto candidate = base / ("phsbench-" + std::to_string(rd()));
      if (std::filesystem::create_directory(candidate)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create temp directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::string write_file(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
  }

private:
  std::filesystem::path path_;
};

}  // namespace phs::testsupport
