#include "opttomo/sha256.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <vector>

#include "opttomo/errors.hpp"

namespace opttomo {

Sha256::Sha256() {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
    fail(errc::numeric_failure, "sha256 init failed");
  ctx_ = ctx;
}

Sha256::~Sha256() {
  if (ctx_ != nullptr) EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

void Sha256::update(const void* data, std::size_t size) {
  if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data, size) != 1)
    fail(errc::numeric_failure, "sha256 update failed");
}

std::string Sha256::hex_digest() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), digest.data(), &len) != 1)
    fail(errc::numeric_failure, "sha256 final failed");
  static const char* hexchars = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hexchars[digest[i] >> 4]);
    out.push_back(hexchars[digest[i] & 0x0f]);
  }
  return out;
}

std::string sha256_hex(const void* data, std::size_t size) {
  Sha256 h;
  h.update(data, size);
  return h.hex_digest();
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(text.data(), text.size());
}

std::string sha256_file_hex(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (f == nullptr)
    fail(errc::unreadable_file, "cannot open for hashing: " + path.string());
  Sha256 h;
  std::vector<unsigned char> buf(1 << 16);
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) h.update(buf.data(), n);
  bool bad = std::ferror(f) != 0;
  std::fclose(f);
  if (bad) fail(errc::unreadable_file, "read error while hashing: " + path.string());
  return h.hex_digest();
}

}  // namespace opttomo
