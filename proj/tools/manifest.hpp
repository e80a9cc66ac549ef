#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace sle::cli {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Output directory that remembers every file written through it.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);

  const std::filesystem::path& path() const { return dir_; }
  void write(const std::string& name, const std::string& content);
  /// {path, sha256, bytes} for each file, in write order.
  nlohmann::json file_list() const;

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

inline constexpr const char* kManifestName = "manifest.json";

struct VerifyResult {
  std::size_t checked = 0;
  std::vector<std::string> missing;
  std::vector<std::string> mismatched;

  bool ok() const { return missing.empty() && mismatched.empty(); }
};

/// Re-hashes every file listed in dir/manifest.json.
VerifyResult verify_manifest(const std::filesystem::path& dir);

}  // namespace sle::cli
