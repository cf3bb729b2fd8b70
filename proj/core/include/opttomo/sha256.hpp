#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

namespace opttomo {

class Sha256 {
public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t size);
  std::string hex_digest();  // finalizes; further updates are invalid

private:
  void* ctx_;
};

std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& text);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace opttomo
