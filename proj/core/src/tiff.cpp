#include "opttomo/tiff.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <map>

#include "opttomo/errors.hpp"

namespace opttomo {

namespace {

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void put_entry(std::vector<unsigned char>& out, std::uint16_t tag,
               std::uint16_t type, std::uint32_t count, std::uint32_t value) {
  put_u16(out, tag);
  put_u16(out, type);
  put_u32(out, count);
  put_u32(out, value);
}

constexpr std::uint16_t kTypeShort = 3;
constexpr std::uint16_t kTypeLong = 4;

}  // namespace

void write_tiff_f32(const std::filesystem::path& path, std::size_t width,
                    std::size_t height, const std::vector<float>& pixels) {
  if (pixels.size() != width * height)
    fail(errc::dimension_mismatch, "pixel count does not match dimensions");
  if (width == 0 || height == 0)
    fail(errc::config_error, "image must be non-empty");

  const std::uint32_t data_bytes = static_cast<std::uint32_t>(4 * pixels.size());
  const std::uint32_t data_offset = 8;
  const std::uint32_t ifd_offset = data_offset + data_bytes;

  std::vector<unsigned char> out;
  out.reserve(ifd_offset + 2 + 10 * 12 + 4);
  // Header: little-endian byte order, magic 42, offset of the first IFD.
  out.push_back('I');
  out.push_back('I');
  put_u16(out, 42);
  put_u32(out, ifd_offset);

  for (float v : pixels) put_u32(out, std::bit_cast<std::uint32_t>(v));

  put_u16(out, 10);  // entry count
  put_entry(out, 256, kTypeLong, 1, static_cast<std::uint32_t>(width));
  put_entry(out, 257, kTypeLong, 1, static_cast<std::uint32_t>(height));
  put_entry(out, 258, kTypeShort, 1, 32);
  put_entry(out, 259, kTypeShort, 1, 1);  // no compression
  put_entry(out, 262, kTypeShort, 1, 1);  // black is zero
  put_entry(out, 273, kTypeLong, 1, data_offset);
  put_entry(out, 277, kTypeShort, 1, 1);
  put_entry(out, 278, kTypeLong, 1, static_cast<std::uint32_t>(height));
  put_entry(out, 279, kTypeLong, 1, data_bytes);
  put_entry(out, 339, kTypeShort, 1, 3);  // IEEE float samples
  put_u32(out, 0);  // no further IFDs

  std::ofstream f(path, std::ios::binary);
  if (!f) fail(errc::unreadable_file, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) fail(errc::unreadable_file, "write failed: " + path.string());
}

TiffImage read_tiff_f32(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(errc::unreadable_file, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());

  auto get_u16 = [&](std::size_t at) -> std::uint32_t {
    if (at + 2 > bytes.size())
      fail(errc::data_error, "truncated TIFF: " + path.string());
    return bytes[at] | (static_cast<std::uint32_t>(bytes[at + 1]) << 8);
  };
  auto get_u32 = [&](std::size_t at) -> std::uint32_t {
    if (at + 4 > bytes.size())
      fail(errc::data_error, "truncated TIFF: " + path.string());
    return bytes[at] | (static_cast<std::uint32_t>(bytes[at + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes[at + 2]) << 16) |
           (static_cast<std::uint32_t>(bytes[at + 3]) << 24);
  };

  if (bytes.size() < 8 || bytes[0] != 'I' || bytes[1] != 'I' || get_u16(2) != 42)
    fail(errc::data_error, "not a little-endian TIFF: " + path.string());

  const std::uint32_t ifd = get_u32(4);
  const std::uint32_t n_entries = get_u16(ifd);
  std::map<std::uint16_t, std::uint32_t> tags;
  for (std::uint32_t e = 0; e < n_entries; ++e) {
    const std::size_t at = ifd + 2 + 12 * e;
    const std::uint16_t tag = static_cast<std::uint16_t>(get_u16(at));
    const std::uint16_t type = static_cast<std::uint16_t>(get_u16(at + 2));
    const std::uint32_t count = get_u32(at + 4);
    if (count != 1)
      fail(errc::data_error, "multi-strip TIFF not supported: " + path.string());
    std::uint32_t value = type == kTypeShort ? get_u16(at + 8) : get_u32(at + 8);
    tags[tag] = value;
  }

  auto require_tag = [&](std::uint16_t tag) -> std::uint32_t {
    auto it = tags.find(tag);
    if (it == tags.end())
      fail(errc::data_error, "TIFF missing required tag " + std::to_string(tag) +
                                 ": " + path.string());
    return it->second;
  };

  if (require_tag(258) != 32 || require_tag(339) != 3)
    fail(errc::data_error, "not a float32 TIFF: " + path.string());
  if (require_tag(259) != 1)
    fail(errc::data_error, "compressed TIFF not supported: " + path.string());
  if (tags.count(277) != 0 && tags[277] != 1)
    fail(errc::data_error, "multi-sample TIFF not supported: " + path.string());

  TiffImage img;
  img.width = require_tag(256);
  img.height = require_tag(257);
  const std::uint32_t offset = require_tag(273);
  const std::uint32_t byte_count = require_tag(279);
  if (byte_count != 4 * img.width * img.height)
    fail(errc::data_error, "strip size mismatch: " + path.string());
  if (offset + byte_count > bytes.size())
    fail(errc::data_error, "truncated pixel data: " + path.string());

  img.pixels.resize(img.width * img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = std::bit_cast<float>(get_u32(offset + 4 * i));
  return img;
}

}  // namespace opttomo
