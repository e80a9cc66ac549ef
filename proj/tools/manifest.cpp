#include "manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace sle::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest init failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

OutputDir::OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void OutputDir::write(const std::string& name, const std::string& content) {
  const auto target = dir_ / name;
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + target.string());
  if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
}

nlohmann::json OutputDir::file_list() const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& name : names_) {
    const auto p = dir_ / name;
    files.push_back({{"path", name},
                     {"sha256", sha256_file(p)},
                     {"bytes", std::filesystem::file_size(p)}});
  }
  return files;
}

VerifyResult verify_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifestName);
  if (!in) throw std::runtime_error("no manifest in " + dir.string());
  const auto manifest = nlohmann::json::parse(in);
  VerifyResult r;
  for (const auto& f : manifest.at("files")) {
    const std::string name = f.at("path");
    ++r.checked;
    const auto p = dir / name;
    if (!std::filesystem::exists(p)) {
      r.missing.push_back(name);
    } else if (sha256_file(p) != f.at("sha256").get<std::string>()) {
      r.mismatched.push_back(name);
    }
  }
  return r;
}

}  // namespace sle::cli
